#pragma once

#include <span>
#include <string>

#include "sdca/solver.hpp"

namespace sdca {

// Self-describing model container: a text header (one `key value...` pair per
// line, ending with `payload <count>`) followed by that many little-endian
// IEEE-754 doubles. Linear models store the weights; kernel models store the
// dual matrix, and RBF models additionally the dense training features.
void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

// Gap history as a CSV table: epoch,primal,dual,gap.
void write_gap_log(const std::string& path, std::span<const GapRecord> gaps);

}  // namespace sdca
