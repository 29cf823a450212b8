#include "sdca/model_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "sdca/errors.hpp"

namespace sdca {

namespace {

constexpr const char* kMagic = "sdca-model";
constexpr int kVersion = 1;

const char* mode_name(Model::Mode mode) {
  switch (mode) {
    case Model::Mode::Linear: return "linear";
    case Model::Mode::KernelRbf: return "kernel-rbf";
    case Model::Mode::KernelPrecomputed: return "kernel-precomputed";
  }
  throw std::logic_error("unreachable model mode");
}

Model::Mode parse_mode(const std::string& name, const std::string& path) {
  if (name == "linear") return Model::Mode::Linear;
  if (name == "kernel-rbf") return Model::Mode::KernelRbf;
  if (name == "kernel-precomputed") return Model::Mode::KernelPrecomputed;
  throw DataError(path + ": unknown model mode '" + name + "'");
}

void put_doubles(std::ofstream& out, std::span<const double> values) {
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(values.data()),
              static_cast<std::streamsize>(values.size() * sizeof(double)));
    return;
  }
  for (double v : values) {
    auto bytes = std::bit_cast<std::array<unsigned char, 8>>(v);
    std::reverse(bytes.begin(), bytes.end());
    out.write(reinterpret_cast<const char*>(bytes.data()), 8);
  }
}

void get_doubles(std::ifstream& in, std::span<double> values,
                 const std::string& path) {
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (in.gcount() !=
      static_cast<std::streamsize>(values.size() * sizeof(double))) {
    throw DataError(path + ": truncated model payload");
  }
  if constexpr (std::endian::native == std::endian::big) {
    for (double& v : values) {
      auto bytes = std::bit_cast<std::array<unsigned char, 8>>(v);
      std::reverse(bytes.begin(), bytes.end());
      v = std::bit_cast<double>(bytes);
    }
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void save_model(const Model& model, const std::string& path) {
  std::size_t expect = 0;
  if (model.mode == Model::Mode::Linear) {
    expect = static_cast<std::size_t>(model.num_features) * model.num_classes;
    if (model.weights.size() != expect) {
      throw std::invalid_argument("save_model: weight size mismatch");
    }
  } else {
    expect = static_cast<std::size_t>(model.num_train) * model.num_classes;
    if (model.dual.size() != expect) {
      throw std::invalid_argument("save_model: dual size mismatch");
    }
    if (model.mode == Model::Mode::KernelRbf) {
      const std::size_t feat =
          static_cast<std::size_t>(model.num_train) * model.num_features;
      if (model.train_features.size() != feat) {
        throw std::invalid_argument("save_model: training feature mismatch");
      }
      expect += feat;
    }
  }
  if (static_cast<int>(model.class_values.size()) != model.num_classes) {
    throw std::invalid_argument("save_model: class map mismatch");
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << kMagic << ' ' << kVersion << '\n';
  out << "mode " << mode_name(model.mode) << '\n';
  out << "loss " << loss_family_name(model.spec.family) << '\n';
  out << "k " << model.spec.k << '\n';
  out << "gamma " << fmt(model.spec.gamma) << '\n';
  out << "lambda " << fmt(model.lambda) << '\n';
  out << "classes " << model.num_classes << '\n';
  out << "class_values";
  for (std::int64_t v : model.class_values) out << ' ' << v;
  out << '\n';
  out << "features " << model.num_features << '\n';
  out << "train_examples " << model.num_train << '\n';
  out << "rbf_theta " << fmt(model.rbf_theta) << '\n';
  out << "payload " << expect << '\n';

  if (model.mode == Model::Mode::Linear) {
    put_doubles(out, model.weights);
  } else {
    put_doubles(out, model.dual);
    if (model.mode == Model::Mode::KernelRbf) {
      put_doubles(out, model.train_features);
    }
  }
  if (!out) throw DataError(path + ": write failed");
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open");

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  {
    std::istringstream ls(line);
    std::string magic;
    int version = 0;
    if (!(ls >> magic >> version) || magic != kMagic) {
      throw DataError(path + ": not a model file");
    }
    if (version != kVersion) {
      throw DataError(path + ": unsupported model version " +
                      std::to_string(version));
    }
  }

  Model model;
  std::string loss_name_value;
  double gamma = 0.0;
  int k = 1;
  std::size_t payload = 0;
  bool have_payload = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) throw DataError(path + ": blank header line");
    if (key == "mode") {
      std::string m;
      ls >> m;
      model.mode = parse_mode(m, path);
    } else if (key == "loss") {
      ls >> loss_name_value;
    } else if (key == "k") {
      ls >> k;
    } else if (key == "gamma") {
      ls >> gamma;
    } else if (key == "lambda") {
      ls >> model.lambda;
    } else if (key == "classes") {
      ls >> model.num_classes;
    } else if (key == "class_values") {
      std::int64_t v;
      while (ls >> v) model.class_values.push_back(v);
      // The list is read until extraction fails; reaching end-of-line is the
      // normal outcome, anything else means a non-numeric token.
      if (!ls.eof()) {
        throw DataError(path + ": malformed header line: " + line);
      }
      ls.clear();
    } else if (key == "features") {
      ls >> model.num_features;
    } else if (key == "train_examples") {
      ls >> model.num_train;
    } else if (key == "rbf_theta") {
      ls >> model.rbf_theta;
    } else if (key == "payload") {
      if (!(ls >> payload)) throw DataError(path + ": bad payload count");
      have_payload = true;
      break;
    } else {
      throw DataError(path + ": unknown header key '" + key + "'");
    }
    if (ls.fail()) throw DataError(path + ": malformed header line: " + line);
  }
  if (!have_payload) throw DataError(path + ": missing payload marker");
  if (loss_name_value.empty()) throw DataError(path + ": missing loss");
  try {
    model.spec = make_loss_spec(loss_name_value, k, gamma);
  } catch (const ConfigError& e) {
    throw DataError(path + ": invalid loss header (" + e.what() + ")");
  }
  if (model.num_classes < 2 ||
      static_cast<int>(model.class_values.size()) != model.num_classes) {
    throw DataError(path + ": inconsistent class map");
  }
  if (!(model.lambda > 0.0) || !std::isfinite(model.lambda)) {
    throw DataError(path + ": invalid lambda");
  }

  std::size_t expect = 0;
  if (model.mode == Model::Mode::Linear) {
    if (model.num_features < 0) throw DataError(path + ": bad feature count");
    expect = static_cast<std::size_t>(model.num_features) * model.num_classes;
    model.weights.resize(expect);
  } else {
    if (model.num_train < 1) throw DataError(path + ": bad train_examples");
    expect = static_cast<std::size_t>(model.num_train) * model.num_classes;
    model.dual.resize(expect);
    if (model.mode == Model::Mode::KernelRbf) {
      if (model.num_features < 1 || !(model.rbf_theta > 0.0)) {
        throw DataError(path + ": invalid RBF header");
      }
      const std::size_t feat =
          static_cast<std::size_t>(model.num_train) * model.num_features;
      model.train_features.resize(feat);
      expect += feat;
    }
  }
  if (payload != expect) {
    throw DataError(path + ": payload count " + std::to_string(payload) +
                    " does not match header (expected " +
                    std::to_string(expect) + ")");
  }

  if (model.mode == Model::Mode::Linear) {
    get_doubles(in, model.weights, path);
  } else {
    get_doubles(in, model.dual, path);
    if (model.mode == Model::Mode::KernelRbf) {
      get_doubles(in, model.train_features, path);
    }
  }
  char extra;
  if (in.read(&extra, 1)) {
    throw DataError(path + ": trailing bytes after payload");
  }

  const auto check_finite = [&](const std::vector<double>& v) {
    for (double x : v) {
      if (!std::isfinite(x)) {
        throw DataError(path + ": non-finite model entry");
      }
    }
  };
  check_finite(model.weights);
  check_finite(model.dual);
  check_finite(model.train_features);
  return model;
}

void write_gap_log(const std::string& path, std::span<const GapRecord> gaps) {
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << "epoch,primal,dual,gap\n";
  for (const GapRecord& g : gaps) {
    out << g.epoch << ',' << fmt(g.primal) << ',' << fmt(g.dual) << ','
        << fmt(g.gap) << '\n';
  }
  if (!out) throw DataError(path + ": write failed");
}

}  // namespace sdca
