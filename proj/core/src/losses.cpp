#include "sdca/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "sdca/bipartite.hpp"
#include "sdca/entropy_prox.hpp"
#include "sdca/errors.hpp"
#include "sdca/topk_simplex.hpp"

namespace sdca {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double xlnx(double t) { return t > 0.0 ? t * std::log(t) : 0.0; }

double softplus(double x) {
  return std::log1p(std::exp(-std::abs(x))) + std::max(x, 0.0);
}

double linf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double log_sum_exp(std::span<const double> v) {
  double hi = -kInf;
  for (double x : v) hi = std::max(hi, x);
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

void check_scores(std::span<const double> scores) {
  if (scores.size() < 2) {
    throw std::invalid_argument("loss: need at least two classes");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) {
      throw std::invalid_argument("loss: non-finite score");
    }
  }
}

void check_labels(std::span<const int> labels, int m, bool multilabel) {
  if (labels.empty()) {
    throw std::invalid_argument("loss: empty label set");
  }
  int prev = -1;
  for (int y : labels) {
    if (y < 0 || y >= m) {
      throw std::invalid_argument("loss: label out of range");
    }
    if (y <= prev) {
      throw std::invalid_argument("loss: labels must be strictly increasing");
    }
    prev = y;
  }
  if (!multilabel && labels.size() != 1) {
    throw std::invalid_argument("loss: multiclass family expects one label");
  }
  if (multilabel && static_cast<int>(labels.size()) >= m) {
    throw std::invalid_argument(
        "loss: multilabel set must be a proper subset of the classes");
  }
}

bool contains_label(std::span<const int> labels, int j) {
  return std::binary_search(labels.begin(), labels.end(), j);
}

// Margin-violation scores with the ground truth removed:
// z_j = scores_j + shift - scores_y for j != y.
std::vector<double> drop_label(std::span<const double> scores, int y,
                               double shift) {
  std::vector<double> z;
  z.reserve(scores.size() - 1);
  for (std::size_t j = 0; j < scores.size(); ++j) {
    if (static_cast<int>(j) == y) continue;
    z.push_back(scores[j] + shift - scores[y]);
  }
  return z;
}

std::vector<double> top_desc(std::span<const double> z, int k) {
  std::vector<double> t(z.begin(), z.end());
  std::partial_sort(t.begin(), t.begin() + k, t.end(), std::greater<>());
  t.resize(k);
  return t;
}

// ---------------------------------------------------------------------------
// Values
// ---------------------------------------------------------------------------

double hinge_topk_value(std::span<const double> z, int k, double gamma,
                        bool alpha_variant) {
  if (gamma > 0.0) {
    std::vector<double> p =
        alpha_variant ? project_topk_alpha(z, k, gamma)
                      : project_topk_beta(z, k, gamma);
    double val = 0.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      val += p[j] * (z[j] - 0.5 * p[j]);
    }
    return val / gamma;
  }
  const std::vector<double> top = top_desc(z, k);
  if (alpha_variant) {
    const double mean =
        std::accumulate(top.begin(), top.end(), 0.0) / static_cast<double>(k);
    return std::max(0.0, mean);
  }
  double acc = 0.0;
  for (double t : top) acc += std::max(0.0, t);
  return acc / static_cast<double>(k);
}

double ml_svm_value(std::span<const double> scores,
                    std::span<const int> labels, double gamma) {
  const int m = static_cast<int>(scores.size());
  if (gamma > 0.0) {
    std::vector<double> b, bbar;
    for (int j = 0; j < m; ++j) {
      if (contains_label(labels, j)) {
        b.push_back(0.5 - scores[j]);
      } else {
        bbar.push_back(0.5 + scores[j]);
      }
    }
    auto [p, pbar] = project_bipartite(b, bbar, gamma);
    double val = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) val += p[j] * (b[j] - 0.5 * p[j]);
    for (std::size_t j = 0; j < bbar.size(); ++j) {
      val += pbar[j] * (bbar[j] - 0.5 * pbar[j]);
    }
    return val / gamma;
  }
  double min_pos = kInf, max_neg = -kInf;
  for (int j = 0; j < m; ++j) {
    if (contains_label(labels, j)) {
      min_pos = std::min(min_pos, scores[j]);
    } else {
      max_neg = std::max(max_neg, scores[j]);
    }
  }
  return std::max(0.0, 1.0 + max_neg - min_pos);
}

double ml_entropy_value(std::span<const double> scores,
                        std::span<const int> labels) {
  double mean_pos = 0.0;
  for (int y : labels) mean_pos += scores[y];
  mean_pos /= static_cast<double>(labels.size());
  return log_sum_exp(scores) - mean_pos;
}

// Keeps the m - k smallest of the label-removed differences (drops the k - 1
// largest competitors); ties are broken toward dropping smaller indices.
std::vector<double> truncated_kept(std::span<const double> scores, int y,
                                   int k) {
  std::vector<double> z = drop_label(scores, y, 0.0);
  std::vector<int> order(z.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return z[i] > z[j]; });
  std::vector<double> kept;
  kept.reserve(z.size() - (k - 1));
  for (std::size_t r = k - 1; r < order.size(); ++r) kept.push_back(z[order[r]]);
  return kept;
}

double truncated_entropy_value(std::span<const double> scores, int y, int k) {
  const std::vector<double> kept = truncated_kept(scores, y, k);
  double hi = 0.0;  // the implicit 1 = exp(0) term
  for (double v : kept) hi = std::max(hi, v);
  double acc = std::exp(-hi);
  for (double v : kept) acc += std::exp(v - hi);
  return hi + std::log(acc);
}

// ---------------------------------------------------------------------------
// Conjugates
// ---------------------------------------------------------------------------

double ova_conjugate(std::span<const double> v, int y, bool logistic) {
  const double tol = 1e-9 * std::max(1.0, linf_norm(v));
  double val = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double ty = (static_cast<int>(j) == y) ? 1.0 : -1.0;
    const double w = ty * v[j];
    if (w > tol || w < -1.0 - tol) return kInf;
    if (logistic) {
      val += xlnx(std::max(0.0, -w)) + xlnx(std::max(0.0, 1.0 + w));
    } else {
      val += w;
    }
  }
  return val;
}

// Hinge-family conjugate: -sum_{j != y} v_j + (gamma/2) ||v \ y||^2 on
// { <1, v> = 0, v \ y in the unit top-k simplex (alpha or beta) }.
double hinge_conjugate(std::span<const double> v, int y, int k, double gamma,
                       bool alpha_variant) {
  const double tol = 1e-9 * std::max(1.0, linf_norm(v));
  double total = 0.0, s = 0.0, sq = 0.0, vmax = -kInf;
  for (std::size_t j = 0; j < v.size(); ++j) {
    total += v[j];
    if (static_cast<int>(j) == y) continue;
    if (v[j] < -tol) return kInf;
    s += v[j];
    sq += v[j] * v[j];
    vmax = std::max(vmax, v[j]);
  }
  if (std::abs(total) > tol) return kInf;
  if (s > 1.0 + tol) return kInf;
  const double cap = alpha_variant ? s / k : 1.0 / k;
  if (vmax > cap + tol) return kInf;
  return -s + 0.5 * gamma * sq;
}

// Entropy-family conjugate: sum_{j != y} v_j ln v_j + (1 + v_y) ln(1 + v_y)
// on { <1, v> = 0, v \ y in the unit simplex (softmax) or unit top-k alpha
// simplex (top-k entropy) }.
double entropy_conjugate(std::span<const double> v, int y, int k,
                         bool topk_cap) {
  const double tol = 1e-9 * std::max(1.0, linf_norm(v));
  double total = 0.0, s = 0.0, vmax = -kInf, val = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    total += v[j];
    if (static_cast<int>(j) == y) continue;
    if (v[j] < -tol) return kInf;
    s += v[j];
    vmax = std::max(vmax, v[j]);
    val += xlnx(std::max(0.0, v[j]));
  }
  if (std::abs(total) > tol) return kInf;
  if (s > 1.0 + tol) return kInf;
  if (topk_cap && vmax > s / k + tol) return kInf;
  val += xlnx(std::max(0.0, 1.0 + v[y]));
  return val;
}

double ml_svm_conjugate(std::span<const double> v, std::span<const int> labels,
                        double gamma) {
  const double tol = 1e-9 * std::max(1.0, linf_norm(v));
  double pos = 0.0, neg = 0.0, sq = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    sq += v[j] * v[j];
    if (contains_label(labels, static_cast<int>(j))) {
      if (v[j] > tol) return kInf;
      pos += -v[j];
    } else {
      if (v[j] < -tol) return kInf;
      neg += v[j];
    }
  }
  if (std::abs(pos - neg) > tol) return kInf;
  if (pos > 1.0 + tol || neg > 1.0 + tol) return kInf;
  return 0.5 * (-pos - neg) + 0.5 * gamma * sq;
}

double ml_entropy_conjugate(std::span<const double> v,
                            std::span<const int> labels) {
  const double tol = 1e-9 * std::max(1.0, linf_norm(v));
  const double inv_k = 1.0 / static_cast<double>(labels.size());
  double total = 0.0, val = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    total += v[j];
    const double p = contains_label(labels, static_cast<int>(j))
                         ? v[j] + inv_k
                         : v[j];
    if (p < -tol) return kInf;
    val += xlnx(std::max(0.0, p));
  }
  if (std::abs(total) > tol) return kInf;
  return val;
}

// ---------------------------------------------------------------------------
// Gradients
// ---------------------------------------------------------------------------

std::vector<double> embed_without_label(std::span<const double> g_nolab, int y,
                                        int m) {
  std::vector<double> g(m, 0.0);
  double mass = 0.0;
  int idx = 0;
  for (int j = 0; j < m; ++j) {
    if (j == y) continue;
    g[j] = g_nolab[idx++];
    mass += g[j];
  }
  g[y] = -mass;
  return g;
}

std::vector<double> hinge_topk_gradient(std::span<const double> scores, int y,
                                        int k, double gamma,
                                        bool alpha_variant) {
  const std::vector<double> z = drop_label(scores, y, 1.0);
  std::vector<double> p = alpha_variant ? project_topk_alpha(z, k, gamma)
                                        : project_topk_beta(z, k, gamma);
  for (double& t : p) t /= gamma;
  return embed_without_label(p, y, static_cast<int>(scores.size()));
}

std::vector<double> softmax_gradient(std::span<const double> scores, int y) {
  const double lse = log_sum_exp(scores);
  std::vector<double> g(scores.size());
  for (std::size_t j = 0; j < scores.size(); ++j) {
    g[j] = std::exp(scores[j] - lse);
  }
  g[y] -= 1.0;
  return g;
}

std::vector<double> topk_entropy_gradient(std::span<const double> scores,
                                          int y, int k) {
  const std::vector<double> a = drop_label(scores, y, 0.0);
  const TopkEntropyPrimalResult sol = solve_topk_entropy_primal(a, k);
  return embed_without_label(sol.x, y, static_cast<int>(scores.size()));
}

std::vector<double> truncated_entropy_gradient(std::span<const double> scores,
                                               int y, int k) {
  const int m = static_cast<int>(scores.size());
  std::vector<double> z = drop_label(scores, y, 0.0);
  std::vector<int> order(z.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return z[i] > z[j]; });
  double hi = 0.0;
  for (std::size_t r = k - 1; r < order.size(); ++r) {
    hi = std::max(hi, z[order[r]]);
  }
  double denom = std::exp(-hi);
  for (std::size_t r = k - 1; r < order.size(); ++r) {
    denom += std::exp(z[order[r]] - hi);
  }
  std::vector<double> g_nolab(z.size(), 0.0);
  for (std::size_t r = k - 1; r < order.size(); ++r) {
    g_nolab[order[r]] = std::exp(z[order[r]] - hi) / denom;
  }
  return embed_without_label(g_nolab, y, m);
}

std::vector<double> ova_logistic_gradient(std::span<const double> scores,
                                          int y) {
  std::vector<double> g(scores.size());
  for (std::size_t j = 0; j < scores.size(); ++j) {
    const double ty = (static_cast<int>(j) == y) ? 1.0 : -1.0;
    g[j] = -ty / (1.0 + std::exp(ty * scores[j]));
  }
  return g;
}

std::vector<double> ml_svm_gradient(std::span<const double> scores,
                                    std::span<const int> labels, double gamma) {
  const int m = static_cast<int>(scores.size());
  std::vector<double> b, bbar;
  std::vector<int> pos_idx, neg_idx;
  for (int j = 0; j < m; ++j) {
    if (contains_label(labels, j)) {
      b.push_back(0.5 - scores[j]);
      pos_idx.push_back(j);
    } else {
      bbar.push_back(0.5 + scores[j]);
      neg_idx.push_back(j);
    }
  }
  auto [p, pbar] = project_bipartite(b, bbar, gamma);
  std::vector<double> g(m, 0.0);
  for (std::size_t i = 0; i < pos_idx.size(); ++i) g[pos_idx[i]] = -p[i] / gamma;
  for (std::size_t i = 0; i < neg_idx.size(); ++i) {
    g[neg_idx[i]] = pbar[i] / gamma;
  }
  return g;
}

std::vector<double> ml_entropy_gradient(std::span<const double> scores,
                                        std::span<const int> labels) {
  const double lse = log_sum_exp(scores);
  const double inv_k = 1.0 / static_cast<double>(labels.size());
  std::vector<double> g(scores.size());
  for (std::size_t j = 0; j < scores.size(); ++j) {
    g[j] = std::exp(scores[j] - lse);
  }
  for (int y : labels) g[y] -= inv_k;
  return g;
}

// ---------------------------------------------------------------------------
// Dual updates
// ---------------------------------------------------------------------------

// Monotone scalar root of H(beta) = ln(beta/(1-beta)) + h beta + r on (0, 1),
// solved by a bisection-safeguarded Newton iteration.
double logistic_dual_root(double h, double r) {
  double lo = 0.0, hi = 1.0, beta = 0.5;
  for (int iter = 0; iter < 100; ++iter) {
    const double g = std::log(beta / (1.0 - beta)) + h * beta + r;
    if (g > 0.0) {
      hi = beta;
    } else {
      lo = beta;
    }
    if (std::abs(g) <= 1e-14 * (1.0 + std::abs(h) + std::abs(r))) break;
    const double gp = 1.0 / beta + 1.0 / (1.0 - beta) + h;
    double next = beta - g / gp;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == beta) break;
    beta = next;
  }
  return beta;
}

void hinge_dual_update(std::span<double> a, std::span<const double> q, int y,
                       int k, double gamma, bool alpha_variant, double k_ii,
                       double lambda_n) {
  const int m = static_cast<int>(a.size());
  const double denom = k_ii + gamma * lambda_n;
  const double rho = k_ii / denom;
  std::vector<double> b;
  b.reserve(m - 1);
  for (int j = 0; j < m; ++j) {
    if (j == y) continue;
    b.push_back((q[j] + 1.0 - q[y]) / denom);
  }
  const double radius = 1.0 / lambda_n;
  const std::vector<double> x = alpha_variant
                                    ? project_topk_alpha(b, k, radius, rho)
                                    : project_topk_beta(b, k, radius, rho);
  double mass = 0.0;
  int idx = 0;
  for (int j = 0; j < m; ++j) {
    if (j == y) continue;
    a[j] = -x[idx];
    mass += x[idx];
    ++idx;
  }
  a[y] = mass;
}

void entropy_dual_update(std::span<double> a, std::span<const double> q, int y,
                         int k, double k_ii, double lambda_n) {
  const int m = static_cast<int>(a.size());
  const double alpha = k_ii / lambda_n;
  std::vector<double> b;
  b.reserve(m - 1);
  for (int j = 0; j < m; ++j) {
    if (j == y) continue;
    b.push_back(q[j] - q[y]);
  }
  const TopkEntropyDualResult sol = prox_topk_entropy_dual(b, alpha, k);
  int idx = 0;
  for (int j = 0; j < m; ++j) {
    if (j == y) continue;
    a[j] = -sol.x[idx++] / lambda_n;
  }
  a[y] = sol.s / lambda_n;
}

void ml_svm_dual_update(std::span<double> a, std::span<const double> q,
                        std::span<const int> labels, double gamma, double k_ii,
                        double lambda_n) {
  const int m = static_cast<int>(a.size());
  const double rho = 1.0 / (k_ii + gamma * lambda_n);
  std::vector<double> b, bbar;
  std::vector<int> pos_idx, neg_idx;
  for (int j = 0; j < m; ++j) {
    if (contains_label(labels, j)) {
      b.push_back(rho * (0.5 - q[j]));
      pos_idx.push_back(j);
    } else {
      bbar.push_back(rho * (0.5 + q[j]));
      neg_idx.push_back(j);
    }
  }
  auto [p, pbar] = project_bipartite(b, bbar, 1.0 / lambda_n);
  for (std::size_t i = 0; i < pos_idx.size(); ++i) a[pos_idx[i]] = p[i];
  for (std::size_t i = 0; i < neg_idx.size(); ++i) a[neg_idx[i]] = -pbar[i];
}

void ml_entropy_dual_update(std::span<double> a, std::span<const double> q,
                            std::span<const int> labels, double k_ii,
                            double lambda_n) {
  const int m = static_cast<int>(a.size());
  const double alpha = k_ii / lambda_n;
  const int ky = static_cast<int>(labels.size());
  const double inv_k = 1.0 / static_cast<double>(ky);
  std::vector<double> b, bbar;
  std::vector<int> pos_idx, neg_idx;
  for (int j = 0; j < m; ++j) {
    if (contains_label(labels, j)) {
      b.push_back(q[j] / alpha + inv_k);
      pos_idx.push_back(j);
    } else {
      bbar.push_back(q[j] / alpha);
      neg_idx.push_back(j);
    }
  }
  auto [p, pbar] = prox_ml_entropy(b, bbar, alpha, ky);
  for (std::size_t i = 0; i < pos_idx.size(); ++i) {
    a[pos_idx[i]] = -(p[i] - inv_k) / lambda_n;
  }
  for (std::size_t i = 0; i < neg_idx.size(); ++i) {
    a[neg_idx[i]] = -pbar[i] / lambda_n;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Public surface
// ---------------------------------------------------------------------------

LossFamily parse_loss_family(const std::string& name) {
  if (name == "ova-hinge") return LossFamily::OvaHinge;
  if (name == "ova-logistic") return LossFamily::OvaLogistic;
  if (name == "multi-svm") return LossFamily::MultiSvm;
  if (name == "softmax") return LossFamily::Softmax;
  if (name == "topk-svm-a") return LossFamily::TopkSvmAlpha;
  if (name == "topk-svm-b") return LossFamily::TopkSvmBeta;
  if (name == "topk-svm-a-smooth") return LossFamily::TopkSvmAlphaSmooth;
  if (name == "topk-svm-b-smooth") return LossFamily::TopkSvmBetaSmooth;
  if (name == "topk-entropy") return LossFamily::TopkEntropy;
  if (name == "topk-entropy-truncated") return LossFamily::TopkEntropyTruncated;
  if (name == "ml-svm") return LossFamily::MlSvm;
  if (name == "ml-svm-smooth") return LossFamily::MlSvmSmooth;
  if (name == "ml-entropy") return LossFamily::MlEntropy;
  throw ConfigError("unknown loss '" + name + "'");
}

std::string loss_family_name(LossFamily family) {
  switch (family) {
    case LossFamily::OvaHinge: return "ova-hinge";
    case LossFamily::OvaLogistic: return "ova-logistic";
    case LossFamily::MultiSvm: return "multi-svm";
    case LossFamily::Softmax: return "softmax";
    case LossFamily::TopkSvmAlpha: return "topk-svm-a";
    case LossFamily::TopkSvmBeta: return "topk-svm-b";
    case LossFamily::TopkSvmAlphaSmooth: return "topk-svm-a-smooth";
    case LossFamily::TopkSvmBetaSmooth: return "topk-svm-b-smooth";
    case LossFamily::TopkEntropy: return "topk-entropy";
    case LossFamily::TopkEntropyTruncated: return "topk-entropy-truncated";
    case LossFamily::MlSvm: return "ml-svm";
    case LossFamily::MlSvmSmooth: return "ml-svm-smooth";
    case LossFamily::MlEntropy: return "ml-entropy";
  }
  throw std::logic_error("unreachable loss family");
}

namespace {

bool takes_k(LossFamily f) {
  switch (f) {
    case LossFamily::TopkSvmAlpha:
    case LossFamily::TopkSvmBeta:
    case LossFamily::TopkSvmAlphaSmooth:
    case LossFamily::TopkSvmBetaSmooth:
    case LossFamily::TopkEntropy:
    case LossFamily::TopkEntropyTruncated:
      return true;
    default:
      return false;
  }
}

bool takes_gamma(LossFamily f) {
  switch (f) {
    case LossFamily::MultiSvm:
    case LossFamily::TopkSvmAlpha:
    case LossFamily::TopkSvmBeta:
    case LossFamily::TopkSvmAlphaSmooth:
    case LossFamily::TopkSvmBetaSmooth:
    case LossFamily::MlSvm:
    case LossFamily::MlSvmSmooth:
      return true;
    default:
      return false;
  }
}

bool requires_gamma(LossFamily f) {
  return f == LossFamily::TopkSvmAlphaSmooth ||
         f == LossFamily::TopkSvmBetaSmooth || f == LossFamily::MlSvmSmooth;
}

}  // namespace

LossSpec make_loss_spec(const std::string& name, int k, double gamma) {
  LossSpec spec;
  spec.family = parse_loss_family(name);
  spec.k = k;
  if (gamma < 0.0) {
    spec.gamma = requires_gamma(spec.family) ? 1.0 : 0.0;
  } else {
    spec.gamma = gamma;
  }
  if (spec.k < 1) throw ConfigError("k must be >= 1");
  if (spec.k != 1 && !takes_k(spec.family)) {
    throw ConfigError("loss '" + name + "' does not take a k parameter");
  }
  if (spec.gamma != 0.0 && !takes_gamma(spec.family)) {
    throw ConfigError("loss '" + name + "' has no smoothed form (gamma must be 0)");
  }
  if (requires_gamma(spec.family) && !(spec.gamma > 0.0)) {
    throw ConfigError("loss '" + name + "' requires gamma > 0");
  }
  if (!std::isfinite(spec.gamma) || spec.gamma < 0.0) {
    throw ConfigError("gamma must be finite and >= 0");
  }
  return spec;
}

void validate_loss(const LossSpec& spec, int num_classes) {
  if (num_classes < 2) throw ConfigError("need at least two classes");
  if (takes_k(spec.family) && spec.k > num_classes - 1) {
    throw ConfigError("k must be at most #classes - 1 (" +
                      std::to_string(num_classes - 1) + ")");
  }
}

bool is_multilabel_loss(LossFamily family) {
  return family == LossFamily::MlSvm || family == LossFamily::MlSvmSmooth ||
         family == LossFamily::MlEntropy;
}

bool loss_has_gradient(const LossSpec& spec) {
  switch (spec.family) {
    case LossFamily::OvaLogistic:
    case LossFamily::Softmax:
    case LossFamily::TopkEntropy:
    case LossFamily::TopkEntropyTruncated:
    case LossFamily::MlEntropy:
      return true;
    case LossFamily::MultiSvm:
    case LossFamily::TopkSvmAlpha:
    case LossFamily::TopkSvmBeta:
    case LossFamily::TopkSvmAlphaSmooth:
    case LossFamily::TopkSvmBetaSmooth:
    case LossFamily::MlSvm:
    case LossFamily::MlSvmSmooth:
      return spec.gamma > 0.0;
    case LossFamily::OvaHinge:
      return false;
  }
  return false;
}

bool loss_has_conjugate(LossFamily family) {
  return family != LossFamily::TopkEntropyTruncated;
}

namespace {

void check_k_range(const LossSpec& spec, std::size_t m) {
  if (takes_k(spec.family) && spec.k > static_cast<int>(m) - 1) {
    throw std::invalid_argument("loss: k exceeds #classes - 1");
  }
}

}  // namespace

double loss_value(const LossSpec& spec, std::span<const double> scores,
                  std::span<const int> labels) {
  check_scores(scores);
  check_labels(labels, static_cast<int>(scores.size()),
               is_multilabel_loss(spec.family));
  check_k_range(spec, scores.size());
  switch (spec.family) {
    case LossFamily::OvaHinge: {
      const int y = labels[0];
      double val = 0.0;
      for (std::size_t j = 0; j < scores.size(); ++j) {
        const double ty = (static_cast<int>(j) == y) ? 1.0 : -1.0;
        val += std::max(0.0, 1.0 - ty * scores[j]);
      }
      return val;
    }
    case LossFamily::OvaLogistic: {
      const int y = labels[0];
      double val = 0.0;
      for (std::size_t j = 0; j < scores.size(); ++j) {
        const double ty = (static_cast<int>(j) == y) ? 1.0 : -1.0;
        val += softplus(-ty * scores[j]);
      }
      return val;
    }
    case LossFamily::MultiSvm: {
      const int y = labels[0];
      if (spec.gamma > 0.0) {
        return hinge_topk_value(drop_label(scores, y, 1.0), 1, spec.gamma,
                                true);
      }
      double worst = 0.0;
      for (std::size_t j = 0; j < scores.size(); ++j) {
        if (static_cast<int>(j) == y) continue;
        worst = std::max(worst, 1.0 + scores[j] - scores[y]);
      }
      return worst;
    }
    case LossFamily::Softmax: {
      const int y = labels[0];
      return log_sum_exp(scores) - scores[y];
    }
    case LossFamily::TopkSvmAlpha:
    case LossFamily::TopkSvmAlphaSmooth:
      return hinge_topk_value(drop_label(scores, labels[0], 1.0), spec.k,
                              spec.gamma, true);
    case LossFamily::TopkSvmBeta:
    case LossFamily::TopkSvmBetaSmooth:
      return hinge_topk_value(drop_label(scores, labels[0], 1.0), spec.k,
                              spec.gamma, false);
    case LossFamily::TopkEntropy: {
      const std::vector<double> a = drop_label(scores, labels[0], 0.0);
      return solve_topk_entropy_primal(a, spec.k).value;
    }
    case LossFamily::TopkEntropyTruncated:
      return truncated_entropy_value(scores, labels[0], spec.k);
    case LossFamily::MlSvm:
    case LossFamily::MlSvmSmooth:
      return ml_svm_value(scores, labels, spec.gamma);
    case LossFamily::MlEntropy:
      return ml_entropy_value(scores, labels);
  }
  throw std::logic_error("unreachable loss family");
}

double conjugate_value(const LossSpec& spec, std::span<const double> v,
                       std::span<const int> labels) {
  check_scores(v);
  check_labels(labels, static_cast<int>(v.size()),
               is_multilabel_loss(spec.family));
  check_k_range(spec, v.size());
  switch (spec.family) {
    case LossFamily::OvaHinge:
      return ova_conjugate(v, labels[0], false);
    case LossFamily::OvaLogistic:
      return ova_conjugate(v, labels[0], true);
    case LossFamily::MultiSvm:
      return hinge_conjugate(v, labels[0], 1, spec.gamma, true);
    case LossFamily::Softmax:
      return entropy_conjugate(v, labels[0], 1, false);
    case LossFamily::TopkSvmAlpha:
    case LossFamily::TopkSvmAlphaSmooth:
      return hinge_conjugate(v, labels[0], spec.k, spec.gamma, true);
    case LossFamily::TopkSvmBeta:
    case LossFamily::TopkSvmBetaSmooth:
      return hinge_conjugate(v, labels[0], spec.k, spec.gamma, false);
    case LossFamily::TopkEntropy:
      return entropy_conjugate(v, labels[0], spec.k, true);
    case LossFamily::TopkEntropyTruncated:
      throw ConfigError(
          "topk-entropy-truncated is nonconvex and has no conjugate");
    case LossFamily::MlSvm:
    case LossFamily::MlSvmSmooth:
      return ml_svm_conjugate(v, labels, spec.gamma);
    case LossFamily::MlEntropy:
      return ml_entropy_conjugate(v, labels);
  }
  throw std::logic_error("unreachable loss family");
}

std::vector<double> loss_gradient(const LossSpec& spec,
                                  std::span<const double> scores,
                                  std::span<const int> labels) {
  check_scores(scores);
  check_labels(labels, static_cast<int>(scores.size()),
               is_multilabel_loss(spec.family));
  check_k_range(spec, scores.size());
  if (!loss_has_gradient(spec)) {
    throw ConfigError("loss '" + loss_family_name(spec.family) +
                      "' with gamma = 0 is not differentiable");
  }
  switch (spec.family) {
    case LossFamily::OvaLogistic:
      return ova_logistic_gradient(scores, labels[0]);
    case LossFamily::Softmax:
      return softmax_gradient(scores, labels[0]);
    case LossFamily::MultiSvm:
      return hinge_topk_gradient(scores, labels[0], 1, spec.gamma, true);
    case LossFamily::TopkSvmAlpha:
    case LossFamily::TopkSvmAlphaSmooth:
      return hinge_topk_gradient(scores, labels[0], spec.k, spec.gamma, true);
    case LossFamily::TopkSvmBeta:
    case LossFamily::TopkSvmBetaSmooth:
      return hinge_topk_gradient(scores, labels[0], spec.k, spec.gamma, false);
    case LossFamily::TopkEntropy:
      return topk_entropy_gradient(scores, labels[0], spec.k);
    case LossFamily::TopkEntropyTruncated:
      return truncated_entropy_gradient(scores, labels[0], spec.k);
    case LossFamily::MlSvm:
    case LossFamily::MlSvmSmooth:
      return ml_svm_gradient(scores, labels, spec.gamma);
    case LossFamily::MlEntropy:
      return ml_entropy_gradient(scores, labels);
    default:
      throw std::logic_error("unreachable loss family");
  }
}

DualUpdateOutcome dual_update(const LossSpec& spec, std::span<double> a,
                              std::span<const double> q, double k_ii,
                              double lambda_n, std::span<const int> labels) {
  if (a.size() != q.size()) {
    throw std::invalid_argument("dual_update: size mismatch");
  }
  check_scores(q);
  check_labels(labels, static_cast<int>(q.size()),
               is_multilabel_loss(spec.family));
  check_k_range(spec, q.size());
  if (!(lambda_n > 0.0) || !std::isfinite(lambda_n)) {
    throw std::invalid_argument("dual_update: lambda_n must be > 0");
  }
  if (!std::isfinite(k_ii)) {
    throw std::invalid_argument("dual_update: non-finite kernel diagonal");
  }
  if (k_ii <= 0.0) {
    return {.skipped = true};
  }
  const double c = 1.0 / lambda_n;
  switch (spec.family) {
    case LossFamily::OvaHinge: {
      const int y = labels[0];
      for (std::size_t j = 0; j < a.size(); ++j) {
        const double ty = (static_cast<int>(j) == y) ? 1.0 : -1.0;
        const double step = (1.0 - ty * q[j]) / k_ii;
        a[j] = ty * std::clamp(step, 0.0, c);
      }
      return {};
    }
    case LossFamily::OvaLogistic: {
      const int y = labels[0];
      for (std::size_t j = 0; j < a.size(); ++j) {
        const double ty = (static_cast<int>(j) == y) ? 1.0 : -1.0;
        const double beta = logistic_dual_root(k_ii * c, ty * q[j]);
        a[j] = ty * c * beta;
      }
      return {};
    }
    case LossFamily::MultiSvm:
      hinge_dual_update(a, q, labels[0], 1, spec.gamma, true, k_ii, lambda_n);
      return {};
    case LossFamily::TopkSvmAlpha:
    case LossFamily::TopkSvmAlphaSmooth:
      hinge_dual_update(a, q, labels[0], spec.k, spec.gamma, true, k_ii,
                        lambda_n);
      return {};
    case LossFamily::TopkSvmBeta:
    case LossFamily::TopkSvmBetaSmooth:
      hinge_dual_update(a, q, labels[0], spec.k, spec.gamma, false, k_ii,
                        lambda_n);
      return {};
    case LossFamily::Softmax:
      entropy_dual_update(a, q, labels[0], 1, k_ii, lambda_n);
      return {};
    case LossFamily::TopkEntropy:
      entropy_dual_update(a, q, labels[0], spec.k, k_ii, lambda_n);
      return {};
    case LossFamily::TopkEntropyTruncated:
      throw ConfigError(
          "topk-entropy-truncated has no dual update; train its smooth warm "
          "start instead");
    case LossFamily::MlSvm:
    case LossFamily::MlSvmSmooth:
      ml_svm_dual_update(a, q, labels, spec.gamma, k_ii, lambda_n);
      return {};
    case LossFamily::MlEntropy:
      ml_entropy_dual_update(a, q, labels, k_ii, lambda_n);
      return {};
  }
  throw std::logic_error("unreachable loss family");
}

}  // namespace sdca
