#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace sdca {

// Scores for n examples over m classes, row-major (example-major).
struct ScoreMatrix {
  int n = 0, m = 0;
  std::vector<double> values;

  std::span<const double> row(int i) const {
    return {values.data() + static_cast<std::size_t>(i) * m,
            static_cast<std::size_t>(m)};
  }
};

// 1 when strictly more than k - 1 classes score strictly above the ground
// truth (ties at rank k favor the ground truth), else 0.
int topk_error(std::span<const double> scores, int y, int k);

// Mean of 1 - topk_error over single-label examples.
double topk_accuracy(const ScoreMatrix& scores,
                     const std::vector<std::vector<int>>& labels, int k);

// 1 - (sum of the k largest entries of the distribution p).
double bayes_topk_error(std::span<const double> p, int k);

struct RankingMetrics {
  double rank_loss = 0.0;
  std::map<int, double> precision_at;
  std::map<int, double> recall_at;
  double map = 0.0;
  // Examples with empty or full label sets, excluded from rank_loss.
  int rank_loss_excluded = 0;
};

// Rank loss counts pairs with f_y <= f_ybar (ties count as reversed),
// normalized by |Y| |Ybar| per example. Precision/recall at k use the top-k
// predicted set (score descending, index ascending on ties). mAP averages
// per-class average precision (precision at each positive, no interpolation)
// over classes that have at least one positive example.
RankingMetrics ranking_metrics(const ScoreMatrix& scores,
                               const std::vector<std::vector<int>>& labels,
                               std::span<const int> ks);

struct PartitionMetrics {
  double f1_instance = 0.0;
  double f1_macro = 0.0;
  double f1_micro = 0.0;
  double accuracy = 0.0;         // mean Jaccard |h n Y| / |h u Y|
  double subset_accuracy = 0.0;  // mean [h == Y]
  double hamming_loss = 0.0;     // mean |h delta Y| / m
  double threshold = 0.0;
};

// Thresholded multilabel metrics at h(x) = { j : f_j(x) >= delta }; F1 cells
// with zero denominators count as 0.
PartitionMetrics partition_metrics(const ScoreMatrix& scores,
                                   const std::vector<std::vector<int>>& labels,
                                   double delta);

enum class TuneMetric {
  F1Instance,
  F1Macro,
  F1Micro,
  Accuracy,
  SubsetAccuracy,
  HammingLoss,
};

TuneMetric parse_tune_metric(const std::string& name);  // ConfigError
std::string tune_metric_name(TuneMetric metric);
// True when larger values are better (false only for the Hamming loss).
bool tune_metric_maximize(TuneMetric metric);

// The default threshold grid: {-10^x} U {0} U {10^x} for
// x = -5.9, -5.7, ..., 0.9 (71 values).
std::vector<double> default_threshold_grid();

// Grid value optimizing the metric on the validation scores; ties broken
// toward smaller |delta|.
double tune_threshold(const ScoreMatrix& scores,
                      const std::vector<std::vector<int>>& labels,
                      TuneMetric metric, std::span<const double> grid);

}  // namespace sdca
