#include "sdca/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sdca/errors.hpp"

namespace sdca {

namespace {

void check_scores_labels(const ScoreMatrix& scores,
                         const std::vector<std::vector<int>>& labels) {
  if (scores.n < 1 || scores.m < 1 ||
      scores.values.size() !=
          static_cast<std::size_t>(scores.n) * scores.m) {
    throw std::invalid_argument("metrics: inconsistent score matrix");
  }
  if (labels.size() != static_cast<std::size_t>(scores.n)) {
    throw std::invalid_argument("metrics: labels/scores size mismatch");
  }
  for (const auto& labs : labels) {
    for (int y : labs) {
      if (y < 0 || y >= scores.m) {
        throw std::invalid_argument("metrics: label out of range");
      }
    }
  }
}

bool in_set(const std::vector<int>& sorted, int j) {
  return std::binary_search(sorted.begin(), sorted.end(), j);
}

// Class indexes ordered by score descending, index ascending on ties.
std::vector<int> ranking_order(std::span<const double> row) {
  std::vector<int> order(row.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return row[a] > row[b]; });
  return order;
}

}  // namespace

int topk_error(std::span<const double> scores, int y, int k) {
  if (y < 0 || y >= static_cast<int>(scores.size())) {
    throw std::invalid_argument("topk_error: label out of range");
  }
  if (k < 1 || k > static_cast<int>(scores.size())) {
    throw std::invalid_argument("topk_error: k out of range");
  }
  int above = 0;
  for (double s : scores) {
    if (s > scores[y]) ++above;
  }
  return above >= k ? 1 : 0;
}

double topk_accuracy(const ScoreMatrix& scores,
                     const std::vector<std::vector<int>>& labels, int k) {
  check_scores_labels(scores, labels);
  double acc = 0.0;
  for (int i = 0; i < scores.n; ++i) {
    if (labels[i].size() != 1) {
      throw std::invalid_argument("topk_accuracy: needs single-label data");
    }
    acc += 1 - topk_error(scores.row(i), labels[i][0], k);
  }
  return acc / scores.n;
}

double bayes_topk_error(std::span<const double> p, int k) {
  if (p.empty() || k < 1 || k > static_cast<int>(p.size())) {
    throw std::invalid_argument("bayes_topk_error: k out of range");
  }
  double total = 0.0;
  for (double v : p) {
    if (v < -1e-12) throw std::invalid_argument("bayes_topk_error: negative p");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("bayes_topk_error: p does not sum to 1");
  }
  std::vector<double> sorted(p.begin(), p.end());
  std::partial_sort(sorted.begin(), sorted.begin() + k, sorted.end(),
                    std::greater<>());
  double covered = 0.0;
  for (int j = 0; j < k; ++j) covered += sorted[j];
  return 1.0 - covered;
}

RankingMetrics ranking_metrics(const ScoreMatrix& scores,
                               const std::vector<std::vector<int>>& labels,
                               std::span<const int> ks) {
  check_scores_labels(scores, labels);
  for (int k : ks) {
    if (k < 1 || k > scores.m) {
      throw std::invalid_argument("ranking_metrics: k out of range");
    }
  }

  RankingMetrics out;
  // Rank loss.
  double rl_sum = 0.0;
  int rl_count = 0;
  for (int i = 0; i < scores.n; ++i) {
    const auto& y = labels[i];
    const int ny = static_cast<int>(y.size());
    const int nbar = scores.m - ny;
    if (ny == 0 || nbar == 0) {
      ++out.rank_loss_excluded;
      continue;
    }
    const auto row = scores.row(i);
    int reversed = 0;
    for (int pos : y) {
      for (int j = 0; j < scores.m; ++j) {
        if (in_set(y, j)) continue;
        if (row[pos] <= row[j]) ++reversed;
      }
    }
    rl_sum += static_cast<double>(reversed) / (static_cast<double>(ny) * nbar);
    ++rl_count;
  }
  out.rank_loss = rl_count > 0 ? rl_sum / rl_count : 0.0;

  // Precision / recall at k.
  for (int k : ks) {
    double prec = 0.0, rec = 0.0;
    int rec_count = 0;
    for (int i = 0; i < scores.n; ++i) {
      const std::vector<int> order = ranking_order(scores.row(i));
      int hits = 0;
      for (int r = 0; r < k; ++r) {
        if (in_set(labels[i], order[r])) ++hits;
      }
      prec += static_cast<double>(hits) / k;
      if (!labels[i].empty()) {
        rec += static_cast<double>(hits) / labels[i].size();
        ++rec_count;
      }
    }
    out.precision_at[k] = prec / scores.n;
    out.recall_at[k] = rec_count > 0 ? rec / rec_count : 0.0;
  }

  // Mean average precision over classes with at least one positive.
  double ap_sum = 0.0;
  int ap_classes = 0;
  for (int c = 0; c < scores.m; ++c) {
    std::vector<int> order(scores.n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return scores.row(a)[c] > scores.row(b)[c];
    });
    int positives = 0;
    double ap = 0.0;
    for (int r = 0; r < scores.n; ++r) {
      if (in_set(labels[order[r]], c)) {
        ++positives;
        ap += static_cast<double>(positives) / (r + 1);
      }
    }
    if (positives > 0) {
      ap_sum += ap / positives;
      ++ap_classes;
    }
  }
  out.map = ap_classes > 0 ? ap_sum / ap_classes : 0.0;
  return out;
}

PartitionMetrics partition_metrics(const ScoreMatrix& scores,
                                   const std::vector<std::vector<int>>& labels,
                                   double delta) {
  check_scores_labels(scores, labels);
  if (!std::isfinite(delta)) {
    throw std::invalid_argument("partition_metrics: non-finite threshold");
  }

  PartitionMetrics out;
  out.threshold = delta;
  const int n = scores.n, m = scores.m;
  std::vector<long long> cls_tp(m, 0), cls_fp(m, 0), cls_fn(m, 0);
  long long tot_tp = 0, tot_fp = 0, tot_fn = 0;
  double f1_inst = 0.0, jaccard = 0.0, subset = 0.0, hamming = 0.0;

  for (int i = 0; i < n; ++i) {
    const auto row = scores.row(i);
    int tp = 0, fp = 0, fn = 0;
    for (int j = 0; j < m; ++j) {
      const bool pred = row[j] >= delta;
      const bool truth = in_set(labels[i], j);
      if (pred && truth) {
        ++tp;
        ++cls_tp[j];
      } else if (pred) {
        ++fp;
        ++cls_fp[j];
      } else if (truth) {
        ++fn;
        ++cls_fn[j];
      }
    }
    tot_tp += tp;
    tot_fp += fp;
    tot_fn += fn;
    f1_inst += (2 * tp + fp + fn) > 0
                   ? 2.0 * tp / static_cast<double>(2 * tp + fp + fn)
                   : 0.0;
    jaccard += (tp + fp + fn) > 0
                   ? static_cast<double>(tp) / static_cast<double>(tp + fp + fn)
                   : 0.0;
    subset += (fp == 0 && fn == 0) ? 1.0 : 0.0;
    hamming += static_cast<double>(fp + fn) / m;
  }

  double f1_macro = 0.0;
  for (int j = 0; j < m; ++j) {
    const long long denom = 2 * cls_tp[j] + cls_fp[j] + cls_fn[j];
    f1_macro += denom > 0 ? 2.0 * cls_tp[j] / static_cast<double>(denom) : 0.0;
  }
  const long long micro_denom = 2 * tot_tp + tot_fp + tot_fn;

  out.f1_instance = f1_inst / n;
  out.f1_macro = f1_macro / m;
  out.f1_micro =
      micro_denom > 0 ? 2.0 * tot_tp / static_cast<double>(micro_denom) : 0.0;
  out.accuracy = jaccard / n;
  out.subset_accuracy = subset / n;
  out.hamming_loss = hamming / n;
  return out;
}

TuneMetric parse_tune_metric(const std::string& name) {
  if (name == "f1-instance") return TuneMetric::F1Instance;
  if (name == "f1-macro") return TuneMetric::F1Macro;
  if (name == "f1-micro") return TuneMetric::F1Micro;
  if (name == "accuracy") return TuneMetric::Accuracy;
  if (name == "subset-accuracy") return TuneMetric::SubsetAccuracy;
  if (name == "hamming-loss") return TuneMetric::HammingLoss;
  throw ConfigError("unknown tuning metric '" + name + "'");
}

std::string tune_metric_name(TuneMetric metric) {
  switch (metric) {
    case TuneMetric::F1Instance: return "f1-instance";
    case TuneMetric::F1Macro: return "f1-macro";
    case TuneMetric::F1Micro: return "f1-micro";
    case TuneMetric::Accuracy: return "accuracy";
    case TuneMetric::SubsetAccuracy: return "subset-accuracy";
    case TuneMetric::HammingLoss: return "hamming-loss";
  }
  throw std::logic_error("unreachable tuning metric");
}

bool tune_metric_maximize(TuneMetric metric) {
  return metric != TuneMetric::HammingLoss;
}

std::vector<double> default_threshold_grid() {
  std::vector<double> grid;
  grid.reserve(71);
  for (int j = 34; j >= 0; --j) {
    grid.push_back(-std::pow(10.0, -5.9 + 0.2 * j));
  }
  grid.push_back(0.0);
  for (int j = 0; j <= 34; ++j) {
    grid.push_back(std::pow(10.0, -5.9 + 0.2 * j));
  }
  return grid;
}

double tune_threshold(const ScoreMatrix& scores,
                      const std::vector<std::vector<int>>& labels,
                      TuneMetric metric, std::span<const double> grid) {
  check_scores_labels(scores, labels);
  if (grid.empty()) throw std::invalid_argument("tune_threshold: empty grid");

  // Visit candidates by increasing |delta| so that requiring a strict
  // improvement breaks ties toward the smaller magnitude.
  std::vector<double> order(grid.begin(), grid.end());
  std::stable_sort(order.begin(), order.end(), [](double a, double b) {
    if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
    return a < b;
  });

  const bool maximize = tune_metric_maximize(metric);
  double best_delta = order.front();
  double best_value = maximize ? -1.0 : 2.0;
  for (double delta : order) {
    const PartitionMetrics pm = partition_metrics(scores, labels, delta);
    double value = 0.0;
    switch (metric) {
      case TuneMetric::F1Instance: value = pm.f1_instance; break;
      case TuneMetric::F1Macro: value = pm.f1_macro; break;
      case TuneMetric::F1Micro: value = pm.f1_micro; break;
      case TuneMetric::Accuracy: value = pm.accuracy; break;
      case TuneMetric::SubsetAccuracy: value = pm.subset_accuracy; break;
      case TuneMetric::HammingLoss: value = pm.hamming_loss; break;
    }
    if ((maximize && value > best_value) || (!maximize && value < best_value)) {
      best_value = value;
      best_delta = delta;
    }
  }
  return best_delta;
}

}  // namespace sdca
