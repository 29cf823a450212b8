#pragma once

#include <span>
#include <string>
#include <vector>

namespace sdca {

// The thirteen trainable loss families. Top-k families take a rank parameter
// k; hinge families take a smoothing parameter gamma >= 0 (gamma > 0 replaces
// the kink with a quadratic Moreau envelope, and the `-smooth` names simply
// require gamma > 0, defaulting to 1). OVA families decompose into m
// independent binary problems; `ml-*` families consume label sets.
enum class LossFamily {
  OvaHinge,
  OvaLogistic,
  MultiSvm,
  Softmax,
  TopkSvmAlpha,
  TopkSvmBeta,
  TopkSvmAlphaSmooth,
  TopkSvmBetaSmooth,
  TopkEntropy,
  TopkEntropyTruncated,
  MlSvm,
  MlSvmSmooth,
  MlEntropy,
};

struct LossSpec {
  LossFamily family = LossFamily::MultiSvm;
  int k = 1;
  double gamma = 0.0;
};

// Name <-> family mapping for the CLI spellings ("multi-svm", "topk-svm-a",
// "ml-entropy", ...). parse_loss_family throws ConfigError on unknown names.
LossFamily parse_loss_family(const std::string& name);
std::string loss_family_name(LossFamily family);

// Builds a validated spec from CLI-level inputs. gamma < 0 means "not given":
// it defaults to 1 for the `-smooth` spellings and 0 otherwise. Throws
// ConfigError when the combination is invalid (k on a non-top-k family,
// gamma on a family that has no smoothed form, `-smooth` with gamma == 0).
LossSpec make_loss_spec(const std::string& name, int k, double gamma);

// Checks the spec against the number of classes (top-k needs k <= m - 1).
void validate_loss(const LossSpec& spec, int num_classes);

bool is_multilabel_loss(LossFamily family);
// True when loss_gradient is defined (log-type families and hinge families
// with gamma > 0).
bool loss_has_gradient(const LossSpec& spec);
// False only for the truncated top-k entropy, which is not convex.
bool loss_has_conjugate(LossFamily family);

// Loss L(Y, u) for scores u (length m) and the sorted 0-based label set
// `labels` (exactly one label for multiclass families, a proper nonempty
// subset for multilabel families).
double loss_value(const LossSpec& spec, std::span<const double> scores,
                  std::span<const int> labels);

// Convex conjugate L*(Y, v); returns +infinity outside the effective domain
// (membership tested with a relative tolerance of 1e-9). Throws for the
// truncated entropy, which has no useful conjugate.
double conjugate_value(const LossSpec& spec, std::span<const double> v,
                       std::span<const int> labels);

// Gradient of L with respect to the scores. Defined exactly when
// loss_has_gradient(spec); throws ConfigError otherwise.
std::vector<double> loss_gradient(const LossSpec& spec,
                                  std::span<const double> scores,
                                  std::span<const int> labels);

struct DualUpdateOutcome {
  bool skipped = false;  // set when k_ii <= 0 makes the update vacuous
};

// Exact coordinate maximizer of the dual objective for one training example.
// `a` (length m) is the example's dual column, updated in place. `q` holds
// the predictions without the example's own contribution,
//   q_j = <w_j, x_i> - k_ii a_j,
// k_ii is the example's kernel diagonal and lambda_n = lambda * n. Throws
// ConfigError for the truncated entropy (it is trained by a smooth warm
// start plus gradient finetuning, not by dual ascent).
DualUpdateOutcome dual_update(const LossSpec& spec, std::span<double> a,
                              std::span<const double> q, double k_ii,
                              double lambda_n, std::span<const int> labels);

}  // namespace sdca
