#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sdca/data.hpp"
#include "sdca/losses.hpp"
#include "sdca/metrics.hpp"

namespace sdca {

struct TrainConfig {
  double lambda = 0.0;  // strictly positive regularizer
  double epsilon = 1e-3;  // relative duality-gap target
  int max_epochs = 1000;
  std::uint64_t seed = 1;
  int gap_check_period = 1;  // epochs between gap evaluations
};

struct GapRecord {
  int epoch = 0;
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;  // (primal - dual) / max(primal, tiny)
};

struct Model {
  enum class Mode { Linear, KernelRbf, KernelPrecomputed };
  Mode mode = Mode::Linear;
  LossSpec spec;
  double lambda = 0.0;
  int num_features = 0;  // d; 0 in precomputed-kernel mode
  int num_classes = 0;
  std::vector<std::int64_t> class_values;
  // Linear: weights, d x m, feature-major (weights[feat * m + class]).
  std::vector<double> weights;
  // Kernel modes: dual matrix, m x n_train, example-major columns
  // (dual[i * m + class] is example i's dual vector).
  std::vector<double> dual;
  int num_train = 0;
  double rbf_theta = 0.0;
  // Kernel-RBF mode: dense training features, n_train x d row-major.
  std::vector<double> train_features;
};

// Incremental dual-ascent state; exposed so each coordinate step and both
// objectives can be observed directly. Holds references to the dataset (and
// the Gram matrix in kernel mode), which must outlive the state.
class DualState {
 public:
  // Linear mode: maintains W = X A^T by rank-1 updates.
  DualState(const Dataset& data, const LossSpec& spec, double lambda);
  // Kernel mode over an n x n row-major Gram matrix.
  DualState(const Dataset& data, const LossSpec& spec, double lambda,
            std::span<const double> gram);

  // One exact coordinate maximization of the dual at example i.
  void update_example(int i);

  double primal_objective() const;
  double dual_objective() const;

  std::span<const double> dual_column(int i) const;
  // Linear mode: the maintained weights, d x m feature-major.
  std::span<const double> weights() const;
  // Current model scores of training example i.
  std::vector<double> scores_of(int i) const;

  int num_examples() const { return n_; }
  int num_classes() const { return m_; }
  double lambda() const { return lambda_; }
  // Updates skipped because the example's kernel diagonal is <= 0.
  int skipped() const { return skipped_; }

 private:
  const Dataset& data_;
  LossSpec spec_;
  double lambda_ = 0.0;
  double lambda_n_ = 0.0;
  int n_ = 0, m_ = 0;
  bool kernel_ = false;
  std::span<const double> gram_;
  std::vector<double> diag_;  // K_ii
  std::vector<double> a_;     // m x n, example-major columns
  std::vector<double> w_;     // d x m feature-major (linear mode)
  int skipped_ = 0;
};

struct TrainResult {
  Model model;
  std::vector<GapRecord> gaps;
  int skipped = 0;  // examples skipped per epoch due to K_ii <= 0
};

// SDCA with epoch-wise shuffling until the relative duality gap reaches
// cfg.epsilon or cfg.max_epochs passes complete. Rejects the truncated
// entropy (see train_model). Throws NumericError if the objectives go
// non-finite or weak duality fails.
TrainResult sdca_train(const Dataset& data, const LossSpec& spec,
                       const TrainConfig& cfg);
// Kernel-mode variant over a precomputed n x n Gram matrix. `mode` selects
// what the model stores: KernelRbf keeps the (dense) training features and
// theta so it can score new points; KernelPrecomputed expects a cross-Gram
// at prediction time.
TrainResult sdca_train_gram(const Dataset& data, const LossSpec& spec,
                            const TrainConfig& cfg,
                            std::span<const double> gram, Model::Mode mode,
                            double rbf_theta = 0.0);

// Full-batch gradient descent with Armijo backtracking on the regularized
// truncated top-k entropy objective, warm-started from a trained linear
// model (intended: the softmax solution). Stops when the gradient norm
// drops below 1e-6 * (1 + |objective|) or after max_iters steps; the
// objective never increases.
Model finetune_truncated_entropy(const Dataset& data, const LossSpec& spec,
                                 const TrainConfig& cfg, const Model& init,
                                 int max_iters = 500);

// One-call training for every family: dispatches the truncated entropy to a
// softmax SDCA warm start plus finetuning, everything else to sdca_train.
TrainResult train_model(const Dataset& data, const LossSpec& spec,
                        const TrainConfig& cfg);

// Scores for new examples. Linear and kernel-RBF models embed everything
// they need; precomputed-kernel models must go through
// predict_scores_gram.
ScoreMatrix predict_scores(const Model& model, const FeatureMatrix& x);
// cross_gram: n_query x n_train row-major kernel evaluations.
ScoreMatrix predict_scores_gram(const Model& model,
                                std::span<const double> cross_gram,
                                int n_query);

// The regularized objective value of a linear model on a dataset:
// (1/n) sum_i L(Y_i, W^T x_i) + (lambda/2) ||W||^2.
double linear_objective(const Dataset& data, const LossSpec& spec,
                        double lambda, std::span<const double> weights);

}  // namespace sdca
