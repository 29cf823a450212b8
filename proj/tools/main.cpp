// Command-line interface: train / predict / evaluate / cv / gen-synthetic.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <future>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include <sdca/data.hpp>
#include <sdca/errors.hpp>
#include <sdca/losses.hpp>
#include <sdca/metrics.hpp>
#include <sdca/model_io.hpp>
#include <sdca/random.hpp>
#include <sdca/solver.hpp>

namespace {

using sdca::ConfigError;
using sdca::DataError;
using sdca::Dataset;
using sdca::LossSpec;
using sdca::Model;
using sdca::NumericError;
using sdca::ScoreMatrix;
using sdca::TrainConfig;
using sdca::TrainResult;

std::string fmt_g(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Dataset load_dataset(const std::string& path, const std::string& format,
                     bool multilabel) {
  if (format == "libsvm") return sdca::read_libsvm(path, multilabel);
  if (format == "csv") return sdca::read_csv(path, multilabel);
  throw ConfigError("--format must be libsvm or csv, got '" + format + "'");
}

struct KernelChoice {
  Model::Mode mode = Model::Mode::Linear;
  double theta = 0.0;
  std::string gram_path;
};

KernelChoice parse_kernel(const std::string& s) {
  KernelChoice kc;
  if (s == "none") return kc;
  if (s.rfind("rbf:", 0) == 0) {
    const std::string arg = s.substr(4);
    std::size_t used = 0;
    double theta = 0.0;
    try {
      theta = std::stod(arg, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != arg.size() || !std::isfinite(theta) || theta <= 0.0) {
      throw ConfigError("--kernel rbf:<theta> needs a positive bandwidth, got '" +
                        arg + "'");
    }
    kc.mode = Model::Mode::KernelRbf;
    kc.theta = theta;
    return kc;
  }
  if (s.rfind("precomputed:", 0) == 0) {
    kc.gram_path = s.substr(12);
    if (kc.gram_path.empty()) {
      throw ConfigError("--kernel precomputed:<path> needs a file path");
    }
    kc.mode = Model::Mode::KernelPrecomputed;
    return kc;
  }
  throw ConfigError(
      "--kernel must be none, rbf:<theta>, or precomputed:<path>, got '" + s +
      "'");
}

std::vector<double> parse_double_list(const std::string& s,
                                      const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size() || tok.empty() || !std::isfinite(v)) {
      throw ConfigError(flag + ": cannot parse '" + tok + "' as a number");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError(flag + ": empty list");
  return out;
}

std::vector<int> parse_int_list(const std::string& s, const std::string& flag) {
  std::vector<int> out;
  for (double v : parse_double_list(s, flag)) {
    int k = static_cast<int>(v);
    if (static_cast<double>(k) != v) {
      throw ConfigError(flag + ": expected integers");
    }
    out.push_back(k);
  }
  return out;
}

// Raw row-major doubles; accepts the payload file written next to a Gram
// sidecar, or any n_query x n_train block produced externally.
std::vector<double> read_cross_gram(const std::string& path, int n_query,
                                    int n_train) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open kernel block file '" + path + "'");
  const std::size_t count =
      static_cast<std::size_t>(n_query) * static_cast<std::size_t>(n_train);
  std::vector<double> values(count);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (static_cast<std::size_t>(in.gcount()) != count * sizeof(double)) {
    throw DataError("kernel block file '" + path + "' is shorter than " +
                    std::to_string(n_query) + " x " + std::to_string(n_train) +
                    " doubles");
  }
  char extra;
  if (in.read(&extra, 1)) {
    throw DataError("kernel block file '" + path + "' has trailing bytes; " +
                    "expected exactly " + std::to_string(n_query) + " x " +
                    std::to_string(n_train) + " doubles");
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw DataError("kernel block file '" + path +
                      "' contains a non-finite entry");
    }
  }
  return values;
}

ScoreMatrix score_dataset(const Model& model, const Dataset& data,
                          const std::string& gram_path) {
  if (model.mode == Model::Mode::KernelPrecomputed) {
    if (gram_path.empty()) {
      throw ConfigError(
          "this model uses a precomputed kernel; pass --gram with the "
          "query-by-training kernel block");
    }
    auto cross = read_cross_gram(gram_path, data.num_examples(), model.num_train);
    return sdca::predict_scores_gram(model, cross, data.num_examples());
  }
  return sdca::predict_scores(model, data.features);
}

// Test labels arrive as indices into the data file's own class list; the
// score columns are the model's classes. Remap through the external values.
std::vector<std::vector<int>> map_labels_to_model(const Model& model,
                                                  const Dataset& data) {
  std::vector<std::vector<int>> out(data.num_examples());
  for (int i = 0; i < data.num_examples(); ++i) {
    out[i].reserve(data.labels[i].size());
    for (int id : data.labels[i]) {
      const std::int64_t value = data.class_values[id];
      auto it = std::lower_bound(model.class_values.begin(),
                                 model.class_values.end(), value);
      if (it == model.class_values.end() || *it != value) {
        throw DataError("label " + std::to_string(value) +
                        " does not appear in the model's class list");
      }
      out[i].push_back(static_cast<int>(it - model.class_values.begin()));
    }
    std::sort(out[i].begin(), out[i].end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string train_path, model_path, loss, kernel = "none";
  std::string format = "libsvm", gap_log;
  bool multilabel = false;
  int k = 1;
  double gamma = -1.0;
  double c = 0.0, lambda = 0.0;
  bool has_c = false, has_lambda = false;
  double eps = 1e-3;
  int max_epochs = 1000, gap_period = 1;
  std::uint64_t seed = 1;
};

double resolve_lambda(bool has_c, double c, bool has_lambda, double lambda,
                      int n) {
  if (has_c == has_lambda) {
    throw ConfigError("provide exactly one of --c and --lambda");
  }
  if (has_lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      throw ConfigError("--lambda must be positive and finite");
    }
    return lambda;
  }
  if (!(c > 0.0) || !std::isfinite(c)) {
    throw ConfigError("--c must be positive and finite");
  }
  return 1.0 / (c * static_cast<double>(n));
}

TrainResult train_with_kernel(const Dataset& data, const LossSpec& spec,
                              const TrainConfig& cfg, const KernelChoice& kc) {
  if (kc.mode == Model::Mode::Linear) {
    return sdca::train_model(data, spec, cfg);
  }
  if (spec.family == sdca::LossFamily::TopkEntropyTruncated) {
    throw ConfigError("truncated top-k entropy training is linear-only");
  }
  std::vector<double> gram;
  if (kc.mode == Model::Mode::KernelRbf) {
    gram = sdca::rbf_gram(data.features, kc.theta);
  } else {
    auto [gn, g] = sdca::read_gram(kc.gram_path);
    if (gn != data.num_examples()) {
      throw DataError("Gram matrix holds " + std::to_string(gn) +
                      " examples but the training set has " +
                      std::to_string(data.num_examples()));
    }
    gram = std::move(g);
  }
  return sdca::sdca_train_gram(data, spec, cfg, gram, kc.mode, kc.theta);
}

int run_train(const TrainArgs& a) {
  Dataset data = load_dataset(a.train_path, a.format, a.multilabel);
  LossSpec spec = sdca::make_loss_spec(a.loss, a.k, a.gamma);
  TrainConfig cfg;
  cfg.lambda = resolve_lambda(a.has_c, a.c, a.has_lambda, a.lambda,
                              data.num_examples());
  cfg.epsilon = a.eps;
  cfg.max_epochs = a.max_epochs;
  cfg.seed = a.seed;
  cfg.gap_check_period = a.gap_period;

  TrainResult result = train_with_kernel(data, spec, cfg, parse_kernel(a.kernel));
  sdca::save_model(result.model, a.model_path);
  if (!a.gap_log.empty()) sdca::write_gap_log(a.gap_log, result.gaps);

  std::ostringstream out;
  out << "examples " << data.num_examples() << "\n"
      << "classes " << data.num_classes() << "\n"
      << "loss " << sdca::loss_family_name(spec.family) << "\n"
      << "lambda " << fmt_g(cfg.lambda) << "\n";
  if (!result.gaps.empty()) {
    const auto& last = result.gaps.back();
    out << "epochs " << last.epoch << "\n"
        << "primal " << fmt_g(last.primal) << "\n"
        << "dual " << fmt_g(last.dual) << "\n"
        << "gap " << fmt_g(last.gap) << "\n";
  }
  out << "skipped " << result.skipped << "\n"
      << "model " << a.model_path << "\n";
  std::cout << out.str();
  return 0;
}

// ---------------------------------------------------------------------------
// predict

struct PredictArgs {
  std::string model_path, data_path, format = "libsvm", gram_path, output;
  bool multilabel = false;
  int topk = 1;
};

int run_predict(const PredictArgs& a) {
  Model model = sdca::load_model(a.model_path);
  Dataset data = load_dataset(a.data_path, a.format, a.multilabel);
  ScoreMatrix scores = score_dataset(model, data, a.gram_path);
  const int m = scores.m;
  if (a.topk < 1 || a.topk > m) {
    throw ConfigError("--topk must be between 1 and the class count " +
                      std::to_string(m));
  }

  std::ostream* os = &std::cout;
  std::ofstream file;
  if (!a.output.empty()) {
    file.open(a.output);
    if (!file) throw DataError("cannot write '" + a.output + "'");
    os = &file;
  }

  for (int c = 0; c < m; ++c) {
    *os << (c ? "," : "") << "score_" << model.class_values[c];
  }
  for (int r = 1; r <= a.topk; ++r) *os << ",top" << r;
  *os << "\n";

  std::vector<int> order(m);
  for (int i = 0; i < scores.n; ++i) {
    auto row = scores.row(i);
    for (int c = 0; c < m; ++c) {
      *os << (c ? "," : "") << fmt_g(row[c]);
    }
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return row[x] > row[y]; });
    for (int r = 0; r < a.topk; ++r) {
      *os << "," << model.class_values[order[r]];
    }
    *os << "\n";
  }
  if (os == &file && !file) throw DataError("failed writing '" + a.output + "'");
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
  std::string model_path, data_path, format = "libsvm", gram_path;
  std::string ks = "1";
  std::string tune_metric, val_path, val_gram, report;
  bool multilabel = false;
  double threshold = 0.0;
};

int run_evaluate(const EvaluateArgs& a) {
  Model model = sdca::load_model(a.model_path);
  Dataset data = load_dataset(a.data_path, a.format, a.multilabel);
  ScoreMatrix scores = score_dataset(model, data, a.gram_path);
  auto labels = map_labels_to_model(model, data);

  std::vector<int> ks = parse_int_list(a.ks, "--ks");
  for (int k : ks) {
    if (k < 1 || k > scores.m) {
      throw ConfigError("--ks entries must be between 1 and the class count " +
                        std::to_string(scores.m));
    }
  }

  double delta = a.threshold;
  if (!a.tune_metric.empty()) {
    if (a.val_path.empty()) {
      throw ConfigError("--tune-threshold needs --val with a validation set");
    }
    Dataset val = load_dataset(a.val_path, a.format, a.multilabel);
    ScoreMatrix val_scores = score_dataset(model, val, a.val_gram);
    auto val_labels = map_labels_to_model(model, val);
    auto grid = sdca::default_threshold_grid();
    delta = sdca::tune_threshold(val_scores, val_labels,
                                 sdca::parse_tune_metric(a.tune_metric), grid);
  }

  std::ostringstream out;
  out << "examples " << scores.n << "\n"
      << "classes " << scores.m << "\n"
      << "loss " << sdca::loss_family_name(model.spec.family) << "\n";
  if (!data.multilabel) {
    for (int k : ks) {
      out << "top" << k << "_accuracy "
          << fmt_g(sdca::topk_accuracy(scores, labels, k)) << "\n";
    }
  }
  auto rank = sdca::ranking_metrics(scores, labels, ks);
  out << "rank_loss " << fmt_g(rank.rank_loss) << "\n"
      << "rank_loss_excluded " << rank.rank_loss_excluded << "\n";
  for (int k : ks) {
    out << "precision_at_" << k << " " << fmt_g(rank.precision_at.at(k)) << "\n"
        << "recall_at_" << k << " " << fmt_g(rank.recall_at.at(k)) << "\n";
  }
  out << "map " << fmt_g(rank.map) << "\n";
  auto part = sdca::partition_metrics(scores, labels, delta);
  out << "threshold " << fmt_g(part.threshold) << "\n"
      << "f1_instance " << fmt_g(part.f1_instance) << "\n"
      << "f1_macro " << fmt_g(part.f1_macro) << "\n"
      << "f1_micro " << fmt_g(part.f1_micro) << "\n"
      << "jaccard_accuracy " << fmt_g(part.accuracy) << "\n"
      << "subset_accuracy " << fmt_g(part.subset_accuracy) << "\n"
      << "hamming_loss " << fmt_g(part.hamming_loss) << "\n";

  std::cout << out.str();
  if (!a.report.empty()) {
    std::ofstream file(a.report);
    if (!file) throw DataError("cannot write '" + a.report + "'");
    file << out.str();
    if (!file) throw DataError("failed writing '" + a.report + "'");
  }
  return 0;
}

// ---------------------------------------------------------------------------
// cv

struct CvArgs {
  std::string data_path, format = "libsvm", loss, kernel = "none";
  std::string c_grid, metric, report;
  bool multilabel = false;
  int k = 1;
  double gamma = -1.0;
  int folds = 10, jobs = 1, max_epochs = 1000, gap_period = 1;
  double eps = 1e-3;
  std::uint64_t seed = 1;
};

struct CvMetric {
  enum class Kind { TopkAccuracy, RankLoss, Partition };
  Kind kind = Kind::TopkAccuracy;
  int k = 1;
  sdca::TuneMetric partition = sdca::TuneMetric::F1Instance;
  bool maximize = true;
  std::string name;
};

CvMetric parse_cv_metric(const std::string& s) {
  CvMetric m;
  m.name = s;
  if (s == "rank-loss") {
    m.kind = CvMetric::Kind::RankLoss;
    m.maximize = false;
    return m;
  }
  if (s.rfind("top", 0) == 0 && s.size() > 3 &&
      s.find_first_not_of("0123456789", 3) == std::string::npos) {
    m.kind = CvMetric::Kind::TopkAccuracy;
    m.k = std::stoi(s.substr(3));
    if (m.k < 1) throw ConfigError("--metric top<k> needs k >= 1");
    return m;
  }
  m.kind = CvMetric::Kind::Partition;
  m.partition = sdca::parse_tune_metric(s);  // ConfigError on anything else
  m.maximize = sdca::tune_metric_maximize(m.partition);
  return m;
}

double partition_value(const sdca::PartitionMetrics& pm, sdca::TuneMetric m) {
  switch (m) {
    case sdca::TuneMetric::F1Instance: return pm.f1_instance;
    case sdca::TuneMetric::F1Macro: return pm.f1_macro;
    case sdca::TuneMetric::F1Micro: return pm.f1_micro;
    case sdca::TuneMetric::Accuracy: return pm.accuracy;
    case sdca::TuneMetric::SubsetAccuracy: return pm.subset_accuracy;
    case sdca::TuneMetric::HammingLoss: return pm.hamming_loss;
  }
  throw std::logic_error("unreachable");
}

double eval_cv_metric(const CvMetric& metric, const ScoreMatrix& scores,
                      const std::vector<std::vector<int>>& labels) {
  switch (metric.kind) {
    case CvMetric::Kind::TopkAccuracy:
      return sdca::topk_accuracy(scores, labels, metric.k);
    case CvMetric::Kind::RankLoss:
      return sdca::ranking_metrics(scores, labels, {}).rank_loss;
    case CvMetric::Kind::Partition:
      return partition_value(sdca::partition_metrics(scores, labels, 0.0),
                             metric.partition);
  }
  throw std::logic_error("unreachable");
}

int run_cv(const CvArgs& a) {
  Dataset data = load_dataset(a.data_path, a.format, a.multilabel);
  LossSpec spec = sdca::make_loss_spec(a.loss, a.k, a.gamma);
  KernelChoice kc = parse_kernel(a.kernel);
  if (kc.mode != Model::Mode::Linear &&
      spec.family == sdca::LossFamily::TopkEntropyTruncated) {
    throw ConfigError("truncated top-k entropy training is linear-only");
  }
  if (a.folds < 2) throw ConfigError("--folds must be at least 2");
  if (a.jobs < 1) throw ConfigError("--jobs must be at least 1");
  std::vector<double> grid = parse_double_list(a.c_grid, "--c-grid");
  for (double c : grid) {
    if (!(c > 0.0)) throw ConfigError("--c-grid values must be positive");
  }
  CvMetric metric = parse_cv_metric(
      a.metric.empty() ? (data.multilabel ? "f1-instance" : "top1") : a.metric);
  if (metric.kind == CvMetric::Kind::TopkAccuracy) {
    if (data.multilabel) {
      throw ConfigError("--metric top<k> needs single-label data");
    }
    if (metric.k > data.num_classes()) {
      throw ConfigError("--metric top<k>: k exceeds the class count");
    }
  }

  auto assignment = sdca::make_folds(data, a.folds, a.seed);
  std::vector<std::vector<int>> train_rows(a.folds), test_rows(a.folds);
  for (int i = 0; i < data.num_examples(); ++i) {
    for (int f = 0; f < a.folds; ++f) {
      (assignment.fold[i] == f ? test_rows[f] : train_rows[f]).push_back(i);
    }
  }

  // Loaded once; per-task blocks are gathered from it.
  std::vector<double> full_gram;
  if (kc.mode == Model::Mode::KernelPrecomputed) {
    auto [gn, g] = sdca::read_gram(kc.gram_path);
    if (gn != data.num_examples()) {
      throw DataError("Gram matrix holds " + std::to_string(gn) +
                      " examples but the data set has " +
                      std::to_string(data.num_examples()));
    }
    full_gram = std::move(g);
  }

  const int n_all = data.num_examples();
  auto run_task = [&](int ci, int f) -> double {
    Dataset sub_train = sdca::subset_rows(data, train_rows[f]);
    Dataset sub_test = sdca::subset_rows(data, test_rows[f]);
    TrainConfig cfg;
    cfg.lambda = 1.0 / (grid[ci] * sub_train.num_examples());
    cfg.epsilon = a.eps;
    cfg.max_epochs = a.max_epochs;
    cfg.gap_check_period = a.gap_period;
    cfg.seed = sdca::derive_seed(
        a.seed, static_cast<std::uint64_t>(ci) * a.folds + f);

    Model model;
    ScoreMatrix scores;
    if (kc.mode == Model::Mode::Linear) {
      model = sdca::train_model(sub_train, spec, cfg).model;
      scores = sdca::predict_scores(model, sub_test.features);
    } else if (kc.mode == Model::Mode::KernelRbf) {
      auto gram = sdca::rbf_gram(sub_train.features, kc.theta);
      model = sdca::sdca_train_gram(sub_train, spec, cfg, gram,
                                    Model::Mode::KernelRbf, kc.theta)
                  .model;
      scores = sdca::predict_scores(model, sub_test.features);
    } else {
      const auto& tr = train_rows[f];
      const auto& te = test_rows[f];
      std::vector<double> gram(tr.size() * tr.size());
      for (std::size_t p = 0; p < tr.size(); ++p) {
        for (std::size_t q = 0; q < tr.size(); ++q) {
          gram[p * tr.size() + q] =
              full_gram[static_cast<std::size_t>(tr[p]) * n_all + tr[q]];
        }
      }
      model = sdca::sdca_train_gram(sub_train, spec, cfg, gram,
                                    Model::Mode::KernelPrecomputed)
                  .model;
      std::vector<double> cross(te.size() * tr.size());
      for (std::size_t p = 0; p < te.size(); ++p) {
        for (std::size_t q = 0; q < tr.size(); ++q) {
          cross[p * tr.size() + q] =
              full_gram[static_cast<std::size_t>(te[p]) * n_all + tr[q]];
        }
      }
      scores = sdca::predict_scores_gram(model, cross,
                                         static_cast<int>(te.size()));
    }
    // subset_rows keeps the full class list, so fold labels already index
    // the model's classes.
    return eval_cv_metric(metric, scores, sub_test.labels);
  };

  const int n_tasks = static_cast<int>(grid.size()) * a.folds;
  std::vector<double> task_value(n_tasks, 0.0);
  if (a.jobs == 1) {
    for (int t = 0; t < n_tasks; ++t) {
      task_value[t] = run_task(t / a.folds, t % a.folds);
    }
  } else {
    int next = 0;
    while (next < n_tasks) {
      const int batch = std::min(a.jobs, n_tasks - next);
      std::vector<std::future<double>> futures;
      futures.reserve(batch);
      for (int b = 0; b < batch; ++b) {
        const int t = next + b;
        futures.push_back(std::async(std::launch::async, run_task, t / a.folds,
                                     t % a.folds));
      }
      for (int b = 0; b < batch; ++b) {
        task_value[next + b] = futures[b].get();
      }
      next += batch;
    }
  }

  std::ostringstream out;
  out << "metric " << metric.name << "\n"
      << "folds " << a.folds << (assignment.stratified ? " stratified" : "")
      << "\n";
  int best = -1;
  std::vector<double> means(grid.size());
  for (std::size_t ci = 0; ci < grid.size(); ++ci) {
    double sum = 0.0;
    out << "c " << fmt_g(grid[ci]);
    for (int f = 0; f < a.folds; ++f) {
      const double v = task_value[ci * a.folds + f];
      sum += v;
      out << " " << fmt_g(v);
    }
    means[ci] = sum / a.folds;
    out << " mean " << fmt_g(means[ci]) << "\n";
    if (best < 0 || (metric.maximize ? means[ci] > means[best]
                                     : means[ci] < means[best])) {
      best = static_cast<int>(ci);
    }
  }
  out << "best_c " << fmt_g(grid[best]) << "\n"
      << "best_mean " << fmt_g(means[best]) << "\n";

  std::cout << out.str();
  if (!a.report.empty()) {
    std::ofstream file(a.report);
    if (!file) throw DataError("cannot write '" + a.report + "'");
    file << out.str();
    if (!file) throw DataError("failed writing '" + a.report + "'");
  }
  return 0;
}

// ---------------------------------------------------------------------------
// gen-synthetic

struct GenArgs {
  std::string out_prefix;
  int n_train = 200, n_val = 200, n_test = 200000;
  std::uint64_t seed = 1;
};

int run_gen(const GenArgs& a) {
  sdca::CircleSpec spec;
  spec.n_train = a.n_train;
  spec.n_val = a.n_val;
  spec.n_test = a.n_test;
  spec.seed = a.seed;
  sdca::CircleData data = sdca::gen_circle(spec);
  const std::pair<const char*, const Dataset*> splits[] = {
      {"train", &data.train}, {"val", &data.val}, {"test", &data.test}};
  for (const auto& [name, split] : splits) {
    const std::string path = a.out_prefix + "." + name + ".libsvm";
    sdca::write_libsvm(*split, path);
    std::cout << "wrote " << path << " (" << split->num_examples()
              << " examples)\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Multiclass, top-k, and multilabel linear/kernel classifiers trained by "
      "dual coordinate ascent with exact proximal updates"};
  app.require_subcommand(1);

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "Train a model");
  train->add_option("--train", train_args.train_path, "Training data file")
      ->required();
  train->add_option("--model", train_args.model_path, "Output model file")
      ->required();
  train->add_option("--loss", train_args.loss, "Loss family name")->required();
  train->add_option("--k", train_args.k, "Top-k parameter (top-k losses only)");
  train->add_option("--gamma", train_args.gamma,
                    "Smoothing parameter (default: 1 for *-smooth, else 0)")
      ->check(CLI::NonNegativeNumber);
  auto* c_opt = train->add_option("--c", train_args.c,
                                  "Per-example cost; lambda = 1/(c n)");
  auto* l_opt = train->add_option("--lambda", train_args.lambda,
                                  "Regularization parameter");
  c_opt->excludes(l_opt);
  l_opt->excludes(c_opt);
  train->add_option("--eps", train_args.eps, "Relative duality-gap target");
  train->add_option("--max-epochs", train_args.max_epochs, "Epoch budget");
  train->add_option("--seed", train_args.seed, "Random seed");
  train->add_option("--gap-check-period", train_args.gap_period,
                    "Epochs between gap evaluations");
  train->add_option("--kernel", train_args.kernel,
                    "none | rbf:<theta> | precomputed:<path>");
  train->add_option("--format", train_args.format, "libsvm | csv");
  train->add_flag("--multilabel", train_args.multilabel,
                  "Parse comma-separated label sets");
  train->add_option("--gap-log", train_args.gap_log,
                    "Write the gap trace as CSV");

  PredictArgs predict_args;
  auto* predict = app.add_subcommand("predict", "Score a data file");
  predict->add_option("--model", predict_args.model_path, "Model file")
      ->required();
  predict->add_option("--data", predict_args.data_path, "Data file")
      ->required();
  predict->add_option("--format", predict_args.format, "libsvm | csv");
  predict->add_flag("--multilabel", predict_args.multilabel,
                    "Parse comma-separated label sets");
  predict->add_option("--gram", predict_args.gram_path,
                      "Query-by-training kernel block (precomputed models)");
  predict->add_option("--output", predict_args.output,
                      "Output CSV (default: stdout)");
  predict->add_option("--topk", predict_args.topk,
                      "Number of top predictions per row");

  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a model");
  evaluate->add_option("--model", eval_args.model_path, "Model file")
      ->required();
  evaluate->add_option("--data", eval_args.data_path, "Test data file")
      ->required();
  evaluate->add_option("--format", eval_args.format, "libsvm | csv");
  evaluate->add_flag("--multilabel", eval_args.multilabel,
                     "Parse comma-separated label sets");
  evaluate->add_option("--gram", eval_args.gram_path,
                       "Test-by-training kernel block (precomputed models)");
  evaluate->add_option("--ks", eval_args.ks,
                       "Comma-separated k list for top-k metrics");
  evaluate->add_option("--threshold", eval_args.threshold,
                       "Fixed decision threshold for partition metrics");
  evaluate->add_option("--tune-threshold", eval_args.tune_metric,
                       "Tune the threshold on --val for this metric");
  evaluate->add_option("--val", eval_args.val_path, "Validation data file");
  evaluate->add_option("--val-gram", eval_args.val_gram,
                       "Validation-by-training kernel block");
  evaluate->add_option("--report", eval_args.report,
                       "Also write the report to this file");

  CvArgs cv_args;
  auto* cv = app.add_subcommand("cv", "Cross-validate over a cost grid");
  cv->add_option("--data", cv_args.data_path, "Data file")->required();
  cv->add_option("--loss", cv_args.loss, "Loss family name")->required();
  cv->add_option("--c-grid", cv_args.c_grid, "Comma-separated cost values")
      ->required();
  cv->add_option("--k", cv_args.k, "Top-k parameter");
  cv->add_option("--gamma", cv_args.gamma, "Smoothing parameter")
      ->check(CLI::NonNegativeNumber);
  cv->add_option("--kernel", cv_args.kernel,
                 "none | rbf:<theta> | precomputed:<path>");
  cv->add_option("--format", cv_args.format, "libsvm | csv");
  cv->add_flag("--multilabel", cv_args.multilabel,
               "Parse comma-separated label sets");
  cv->add_option("--folds", cv_args.folds, "Fold count");
  cv->add_option("--metric", cv_args.metric,
                 "top<k> | rank-loss | f1-instance | f1-macro | f1-micro | "
                 "accuracy | subset-accuracy | hamming-loss");
  cv->add_option("--jobs", cv_args.jobs, "Parallel fold/grid tasks");
  cv->add_option("--eps", cv_args.eps, "Relative duality-gap target");
  cv->add_option("--max-epochs", cv_args.max_epochs, "Epoch budget");
  cv->add_option("--gap-check-period", cv_args.gap_period,
                 "Epochs between gap evaluations");
  cv->add_option("--seed", cv_args.seed, "Random seed");
  cv->add_option("--report", cv_args.report,
                 "Also write the table to this file");

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen-synthetic",
                                 "Generate the synthetic circle benchmark");
  gen->add_option("--out", gen_args.out_prefix, "Output file prefix")
      ->required();
  gen->add_option("--n-train", gen_args.n_train, "Training examples");
  gen->add_option("--n-val", gen_args.n_val, "Validation examples");
  gen->add_option("--n-test", gen_args.n_test, "Test examples");
  gen->add_option("--seed", gen_args.seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // normalize usage failures
  }

  try {
    train_args.has_c = c_opt->count() > 0;
    train_args.has_lambda = l_opt->count() > 0;
    if (train->parsed()) return run_train(train_args);
    if (predict->parsed()) return run_predict(predict_args);
    if (evaluate->parsed()) return run_evaluate(eval_args);
    if (cv->parsed()) return run_cv(cv_args);
    if (gen->parsed()) return run_gen(gen_args);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
