#include "sdca/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "sdca/errors.hpp"
#include "sdca/random.hpp"

namespace sdca {

namespace {

void validate_config(const TrainConfig& cfg) {
  if (!(cfg.lambda > 0.0) || !std::isfinite(cfg.lambda)) {
    throw ConfigError("lambda must be finite and > 0");
  }
  if (!(cfg.epsilon > 0.0) || !std::isfinite(cfg.epsilon)) {
    throw ConfigError("epsilon must be finite and > 0");
  }
  if (cfg.max_epochs < 1) throw ConfigError("max-epochs must be >= 1");
  if (cfg.gap_check_period < 1) {
    throw ConfigError("gap-check-period must be >= 1");
  }
}

void validate_dataset_for_loss(const Dataset& data, const LossSpec& spec) {
  if (data.num_examples() < 1) throw DataError("dataset has no examples");
  if (data.num_classes() < 2) throw DataError("dataset has fewer than 2 classes");
  validate_loss(spec, data.num_classes());
  const bool ml = is_multilabel_loss(spec.family);
  if (ml && !data.multilabel) {
    throw DataError("loss '" + loss_family_name(spec.family) +
                    "' needs label sets, but the dataset is single-label");
  }
  if (!ml && data.multilabel) {
    throw DataError("loss '" + loss_family_name(spec.family) +
                    "' needs single labels, but the dataset is multilabel");
  }
  const int m = data.num_classes();
  for (int i = 0; i < data.num_examples(); ++i) {
    const std::size_t sz = data.labels[i].size();
    if (sz == 0) {
      throw DataError("example " + std::to_string(i) + " has no labels");
    }
    if (!ml && sz != 1) {
      throw DataError("example " + std::to_string(i) +
                      " has multiple labels in single-label training");
    }
    if (ml && sz >= static_cast<std::size_t>(m)) {
      throw DataError("example " + std::to_string(i) +
                      " lists every class; multilabel losses need proper "
                      "subsets");
    }
  }
}

constexpr double kTiny = 1e-15;

}  // namespace

// ---------------------------------------------------------------------------
// DualState
// ---------------------------------------------------------------------------

DualState::DualState(const Dataset& data, const LossSpec& spec, double lambda)
    : data_(data), spec_(spec), lambda_(lambda) {
  validate_dataset_for_loss(data, spec);
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("lambda must be finite and > 0");
  }
  n_ = data.num_examples();
  m_ = data.num_classes();
  lambda_n_ = lambda_ * n_;
  diag_.resize(n_);
  for (int i = 0; i < n_; ++i) diag_[i] = data.features.row_sq_norm(i);
  a_.assign(static_cast<std::size_t>(n_) * m_, 0.0);
  w_.assign(static_cast<std::size_t>(data.num_features()) * m_, 0.0);
}

DualState::DualState(const Dataset& data, const LossSpec& spec, double lambda,
                     std::span<const double> gram)
    : data_(data), spec_(spec), lambda_(lambda), kernel_(true), gram_(gram) {
  validate_dataset_for_loss(data, spec);
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("lambda must be finite and > 0");
  }
  n_ = data.num_examples();
  m_ = data.num_classes();
  lambda_n_ = lambda_ * n_;
  if (gram.size() != static_cast<std::size_t>(n_) * n_) {
    throw DataError("Gram matrix size does not match the dataset");
  }
  diag_.resize(n_);
  for (int i = 0; i < n_; ++i) {
    diag_[i] = gram_[static_cast<std::size_t>(i) * n_ + i];
    if (!std::isfinite(diag_[i])) {
      throw DataError("non-finite Gram diagonal at example " +
                      std::to_string(i));
    }
  }
  a_.assign(static_cast<std::size_t>(n_) * m_, 0.0);
}

std::vector<double> DualState::scores_of(int i) const {
  std::vector<double> s(m_, 0.0);
  if (!kernel_) {
    const double* w = w_.data();
    data_.features.for_each(i, [&](int idx, double val) {
      const double* row = w + static_cast<std::size_t>(idx) * m_;
      for (int j = 0; j < m_; ++j) s[j] += val * row[j];
    });
    return s;
  }
  const double* krow = gram_.data() + static_cast<std::size_t>(i) * n_;
  for (int l = 0; l < n_; ++l) {
    const double coef = krow[l];
    if (coef == 0.0) continue;
    const double* col = a_.data() + static_cast<std::size_t>(l) * m_;
    for (int j = 0; j < m_; ++j) s[j] += coef * col[j];
  }
  return s;
}

void DualState::update_example(int i) {
  if (i < 0 || i >= n_) throw std::invalid_argument("update_example: bad index");
  const double k_ii = diag_[i];
  std::vector<double> scores = scores_of(i);
  double* ai = a_.data() + static_cast<std::size_t>(i) * m_;
  std::vector<double> q(m_), a_old(ai, ai + m_);
  for (int j = 0; j < m_; ++j) q[j] = scores[j] - k_ii * ai[j];

  const DualUpdateOutcome outcome =
      dual_update(spec_, {ai, static_cast<std::size_t>(m_)}, q, k_ii,
                  lambda_n_, data_.labels[i]);
  if (outcome.skipped) {
    ++skipped_;
    return;
  }
  if (!kernel_) {
    bool changed = false;
    for (int j = 0; j < m_; ++j) {
      if (ai[j] != a_old[j]) {
        changed = true;
        break;
      }
    }
    if (!changed) return;
    double* w = w_.data();
    data_.features.for_each(i, [&](int idx, double val) {
      double* row = w + static_cast<std::size_t>(idx) * m_;
      for (int j = 0; j < m_; ++j) row[j] += val * (ai[j] - a_old[j]);
    });
  }
}

namespace {

double regularizer_linear(std::span<const double> w, double lambda) {
  double sq = 0.0;
  for (double v : w) sq += v * v;
  return 0.5 * lambda * sq;
}

}  // namespace

double DualState::primal_objective() const {
  double loss_sum = 0.0;
  double reg = 0.0;
  if (!kernel_) {
    for (int i = 0; i < n_; ++i) {
      loss_sum += loss_value(spec_, scores_of(i), data_.labels[i]);
    }
    reg = regularizer_linear(w_, lambda_);
  } else {
    for (int i = 0; i < n_; ++i) {
      const std::vector<double> s = scores_of(i);
      loss_sum += loss_value(spec_, s, data_.labels[i]);
      const double* ai = a_.data() + static_cast<std::size_t>(i) * m_;
      double dot = 0.0;
      for (int j = 0; j < m_; ++j) dot += ai[j] * s[j];
      reg += dot;
    }
    reg *= 0.5 * lambda_;
  }
  return loss_sum / n_ + reg;
}

double DualState::dual_objective() const {
  double conj_sum = 0.0;
  std::vector<double> v(m_);
  for (int i = 0; i < n_; ++i) {
    const double* ai = a_.data() + static_cast<std::size_t>(i) * m_;
    for (int j = 0; j < m_; ++j) v[j] = -lambda_n_ * ai[j];
    conj_sum += conjugate_value(spec_, v, data_.labels[i]);
  }
  double reg = 0.0;
  if (!kernel_) {
    reg = regularizer_linear(w_, lambda_);
  } else {
    for (int i = 0; i < n_; ++i) {
      const std::vector<double> s = scores_of(i);
      const double* ai = a_.data() + static_cast<std::size_t>(i) * m_;
      double dot = 0.0;
      for (int j = 0; j < m_; ++j) dot += ai[j] * s[j];
      reg += dot;
    }
    reg *= 0.5 * lambda_;
  }
  return -conj_sum / n_ - reg;
}

std::span<const double> DualState::dual_column(int i) const {
  return {a_.data() + static_cast<std::size_t>(i) * m_,
          static_cast<std::size_t>(m_)};
}

std::span<const double> DualState::weights() const {
  if (kernel_) throw std::logic_error("weights() on a kernel-mode state");
  return w_;
}

// ---------------------------------------------------------------------------
// Training loops
// ---------------------------------------------------------------------------

namespace {

TrainResult run_sdca(DualState& state, const Dataset& data,
                     const LossSpec& spec, const TrainConfig& cfg,
                     Model::Mode mode, double rbf_theta) {
  const int n = data.num_examples();
  Rng rng(cfg.seed);
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);

  TrainResult result;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    rng.shuffle(perm);
    for (int i : perm) state.update_example(i);
    if (epoch % cfg.gap_check_period != 0 && epoch != cfg.max_epochs) continue;

    const double primal = state.primal_objective();
    const double dual = state.dual_objective();
    if (!std::isfinite(primal) || !std::isfinite(dual)) {
      throw NumericError(
          "objective became non-finite at epoch " + std::to_string(epoch) +
          " (dual iterate outside its feasible set)");
    }
    if (primal - dual < -1e-9 * std::max(1.0, std::abs(primal))) {
      throw NumericError("weak duality violated at epoch " +
                         std::to_string(epoch));
    }
    const double gap = (primal - dual) / std::max(primal, kTiny);
    result.gaps.push_back({epoch, primal, dual, gap});
    if (gap <= cfg.epsilon) break;
  }
  result.skipped = state.skipped();

  Model model;
  model.mode = mode;
  model.spec = spec;
  model.lambda = state.lambda();
  model.num_classes = data.num_classes();
  model.class_values = data.class_values;
  if (mode == Model::Mode::Linear) {
    model.num_features = data.num_features();
    const std::span<const double> w = state.weights();
    model.weights.assign(w.begin(), w.end());
  } else {
    model.num_train = n;
    model.dual.resize(static_cast<std::size_t>(n) * data.num_classes());
    for (int i = 0; i < n; ++i) {
      const std::span<const double> col = state.dual_column(i);
      std::copy(col.begin(), col.end(),
                model.dual.begin() +
                    static_cast<std::size_t>(i) * data.num_classes());
    }
    if (mode == Model::Mode::KernelRbf) {
      model.num_features = data.num_features();
      model.rbf_theta = rbf_theta;
      model.train_features.resize(static_cast<std::size_t>(n) *
                                  data.num_features());
      for (int i = 0; i < n; ++i) {
        data.features.copy_row(
            i, {model.train_features.data() +
                    static_cast<std::size_t>(i) * data.num_features(),
                static_cast<std::size_t>(data.num_features())});
      }
    }
  }
  result.model = std::move(model);
  return result;
}

}  // namespace

TrainResult sdca_train(const Dataset& data, const LossSpec& spec,
                       const TrainConfig& cfg) {
  validate_config(cfg);
  if (spec.family == LossFamily::TopkEntropyTruncated) {
    throw ConfigError(
        "topk-entropy-truncated is trained by warm start + finetuning; use "
        "train_model");
  }
  DualState state(data, spec, cfg.lambda);
  return run_sdca(state, data, spec, cfg, Model::Mode::Linear, 0.0);
}

TrainResult sdca_train_gram(const Dataset& data, const LossSpec& spec,
                            const TrainConfig& cfg,
                            std::span<const double> gram, Model::Mode mode,
                            double rbf_theta) {
  validate_config(cfg);
  if (spec.family == LossFamily::TopkEntropyTruncated) {
    throw ConfigError(
        "topk-entropy-truncated is trained by warm start + finetuning; use "
        "train_model");
  }
  if (mode == Model::Mode::Linear) {
    throw ConfigError("sdca_train_gram needs a kernel mode");
  }
  if (mode == Model::Mode::KernelRbf && !(rbf_theta > 0.0)) {
    throw ConfigError("kernel-rbf mode needs theta > 0");
  }
  DualState state(data, spec, cfg.lambda, gram);
  return run_sdca(state, data, spec, cfg, mode, rbf_theta);
}

// ---------------------------------------------------------------------------
// Truncated-entropy finetuning
// ---------------------------------------------------------------------------

double linear_objective(const Dataset& data, const LossSpec& spec,
                        double lambda, std::span<const double> weights) {
  const int n = data.num_examples();
  const int m = data.num_classes();
  if (weights.size() !=
      static_cast<std::size_t>(data.num_features()) * m) {
    throw std::invalid_argument("linear_objective: weight size mismatch");
  }
  double loss_sum = 0.0;
  std::vector<double> s(m);
  for (int i = 0; i < n; ++i) {
    std::fill(s.begin(), s.end(), 0.0);
    data.features.for_each(i, [&](int idx, double val) {
      const double* row = weights.data() + static_cast<std::size_t>(idx) * m;
      for (int j = 0; j < m; ++j) s[j] += val * row[j];
    });
    loss_sum += loss_value(spec, s, data.labels[i]);
  }
  return loss_sum / n + regularizer_linear(weights, lambda);
}

Model finetune_truncated_entropy(const Dataset& data, const LossSpec& spec,
                                 const TrainConfig& cfg, const Model& init,
                                 int max_iters) {
  validate_config(cfg);
  if (spec.family != LossFamily::TopkEntropyTruncated) {
    throw ConfigError("finetune_truncated_entropy needs the truncated loss");
  }
  validate_dataset_for_loss(data, spec);
  if (init.mode != Model::Mode::Linear) {
    throw ConfigError("finetuning needs a linear warm-start model");
  }
  const int m = data.num_classes();
  const int d = data.num_features();
  if (init.num_classes != m || init.num_features != d) {
    throw DataError("warm-start model does not match the dataset shape");
  }
  if (max_iters < 1) throw ConfigError("finetune iteration cap must be >= 1");

  const int n = data.num_examples();
  const double lambda = cfg.lambda;
  std::vector<double> w(init.weights);
  std::vector<double> grad(w.size());
  std::vector<double> trial(w.size());
  std::vector<double> s(m);

  double objective = linear_objective(data, spec, lambda, w);
  double step = 1.0;
  for (int iter = 0; iter < max_iters; ++iter) {
    // grad = lambda W + (1/n) sum_i x_i g_i^T
    for (std::size_t t = 0; t < w.size(); ++t) grad[t] = lambda * w[t];
    for (int i = 0; i < n; ++i) {
      std::fill(s.begin(), s.end(), 0.0);
      data.features.for_each(i, [&](int idx, double val) {
        const double* row = w.data() + static_cast<std::size_t>(idx) * m;
        for (int j = 0; j < m; ++j) s[j] += val * row[j];
      });
      const std::vector<double> g = loss_gradient(spec, s, data.labels[i]);
      data.features.for_each(i, [&](int idx, double val) {
        double* row = grad.data() + static_cast<std::size_t>(idx) * m;
        const double coef = val / n;
        for (int j = 0; j < m; ++j) row[j] += coef * g[j];
      });
    }
    double grad_sq = 0.0;
    for (double v : grad) grad_sq += v * v;
    if (std::sqrt(grad_sq) <= 1e-6 * (1.0 + std::abs(objective))) break;

    double t = std::min(1.0, 2.0 * step);
    bool accepted = false;
    double trial_obj = objective;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t u = 0; u < w.size(); ++u) {
        trial[u] = w[u] - t * grad[u];
      }
      trial_obj = linear_objective(data, spec, lambda, trial);
      if (trial_obj <= objective - 1e-4 * t * grad_sq) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    w.swap(trial);
    objective = trial_obj;
    step = t;
  }

  Model model;
  model.mode = Model::Mode::Linear;
  model.spec = spec;
  model.lambda = lambda;
  model.num_features = d;
  model.num_classes = m;
  model.class_values = data.class_values;
  model.weights = std::move(w);
  return model;
}

TrainResult train_model(const Dataset& data, const LossSpec& spec,
                        const TrainConfig& cfg) {
  if (spec.family != LossFamily::TopkEntropyTruncated) {
    return sdca_train(data, spec, cfg);
  }
  LossSpec warm;
  warm.family = LossFamily::Softmax;
  warm.k = 1;
  warm.gamma = 0.0;
  TrainResult result = sdca_train(data, warm, cfg);
  result.model =
      finetune_truncated_entropy(data, spec, cfg, result.model, 500);
  return result;
}

// ---------------------------------------------------------------------------
// Prediction
// ---------------------------------------------------------------------------

ScoreMatrix predict_scores(const Model& model, const FeatureMatrix& x) {
  const int m = model.num_classes;
  if (m < 2) throw DataError("model has no classes");
  ScoreMatrix out;
  out.n = x.rows();
  out.m = m;
  out.values.assign(static_cast<std::size_t>(out.n) * m, 0.0);

  if (model.mode == Model::Mode::Linear) {
    if (x.cols() > model.num_features) {
      throw DataError("query features exceed the model dimension (" +
                      std::to_string(x.cols()) + " > " +
                      std::to_string(model.num_features) + ")");
    }
    for (int i = 0; i < x.rows(); ++i) {
      double* s = out.values.data() + static_cast<std::size_t>(i) * m;
      x.for_each(i, [&](int idx, double val) {
        const double* row =
            model.weights.data() + static_cast<std::size_t>(idx) * m;
        for (int j = 0; j < m; ++j) s[j] += val * row[j];
      });
    }
    return out;
  }
  if (model.mode == Model::Mode::KernelRbf) {
    if (x.cols() > model.num_features) {
      throw DataError("query features exceed the model dimension");
    }
    const int n = model.num_train;
    const int d = model.num_features;
    std::vector<double> train_sq(n, 0.0);
    for (int l = 0; l < n; ++l) {
      const double* row =
          model.train_features.data() + static_cast<std::size_t>(l) * d;
      for (int j = 0; j < d; ++j) train_sq[l] += row[j] * row[j];
    }
    std::vector<double> query(d);
    for (int i = 0; i < x.rows(); ++i) {
      x.copy_row(i, {query.data(), static_cast<std::size_t>(x.cols())});
      std::fill(query.begin() + x.cols(), query.end(), 0.0);
      double qsq = 0.0;
      for (int j = 0; j < d; ++j) qsq += query[j] * query[j];
      double* s = out.values.data() + static_cast<std::size_t>(i) * m;
      for (int l = 0; l < n; ++l) {
        const double* row =
            model.train_features.data() + static_cast<std::size_t>(l) * d;
        double dot = 0.0;
        for (int j = 0; j < d; ++j) dot += query[j] * row[j];
        const double dist2 = std::max(0.0, qsq + train_sq[l] - 2.0 * dot);
        const double kv = std::exp(-model.rbf_theta * dist2);
        const double* al =
            model.dual.data() + static_cast<std::size_t>(l) * m;
        for (int j = 0; j < m; ++j) s[j] += kv * al[j];
      }
    }
    return out;
  }
  throw ConfigError(
      "a precomputed-kernel model needs cross-Gram values; use the gram "
      "prediction path");
}

ScoreMatrix predict_scores_gram(const Model& model,
                                std::span<const double> cross_gram,
                                int n_query) {
  if (model.mode == Model::Mode::Linear) {
    throw ConfigError("gram prediction needs a kernel model");
  }
  const int n = model.num_train;
  const int m = model.num_classes;
  if (n_query < 1 ||
      cross_gram.size() != static_cast<std::size_t>(n_query) * n) {
    throw DataError("cross-Gram size does not match n_query x n_train");
  }
  ScoreMatrix out;
  out.n = n_query;
  out.m = m;
  out.values.assign(static_cast<std::size_t>(n_query) * m, 0.0);
  for (int i = 0; i < n_query; ++i) {
    const double* krow = cross_gram.data() + static_cast<std::size_t>(i) * n;
    double* s = out.values.data() + static_cast<std::size_t>(i) * m;
    for (int l = 0; l < n; ++l) {
      const double coef = krow[l];
      if (coef == 0.0) continue;
      const double* al = model.dual.data() + static_cast<std::size_t>(l) * m;
      for (int j = 0; j < m; ++j) s[j] += coef * al[j];
    }
  }
  return out;
}

}  // namespace sdca
