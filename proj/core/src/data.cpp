#include "sdca/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "sdca/errors.hpp"
#include "sdca/random.hpp"

namespace sdca {

// ---------------------------------------------------------------------------
// FeatureMatrix
// ---------------------------------------------------------------------------

FeatureMatrix FeatureMatrix::dense(int n, int d, std::vector<double> values) {
  if (n < 0 || d < 0 ||
      values.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(d)) {
    throw std::invalid_argument("FeatureMatrix::dense: size mismatch");
  }
  FeatureMatrix x;
  x.sparse_ = false;
  x.n_ = n;
  x.d_ = d;
  x.values_ = std::move(values);
  return x;
}

FeatureMatrix FeatureMatrix::sparse(int n, int d,
                                    std::vector<std::int64_t> indptr,
                                    std::vector<int> indices,
                                    std::vector<double> values) {
  if (n < 0 || d < 0 || indptr.size() != static_cast<std::size_t>(n) + 1 ||
      indices.size() != values.size() ||
      indptr.front() != 0 ||
      indptr.back() != static_cast<std::int64_t>(values.size())) {
    throw std::invalid_argument("FeatureMatrix::sparse: inconsistent CSR");
  }
  for (int idx : indices) {
    if (idx < 0 || idx >= d) {
      throw std::invalid_argument("FeatureMatrix::sparse: index out of range");
    }
  }
  FeatureMatrix x;
  x.sparse_ = true;
  x.n_ = n;
  x.d_ = d;
  x.indptr_ = std::move(indptr);
  x.indices_ = std::move(indices);
  x.values_ = std::move(values);
  return x;
}

double FeatureMatrix::dot_row(int i, std::span<const double> w) const {
  double acc = 0.0;
  if (!sparse_) {
    const double* row = values_.data() + static_cast<std::size_t>(i) * d_;
    for (int j = 0; j < d_; ++j) acc += row[j] * w[j];
    return acc;
  }
  for (std::int64_t p = indptr_[i]; p < indptr_[i + 1]; ++p) {
    acc += values_[p] * w[indices_[p]];
  }
  return acc;
}

void FeatureMatrix::axpy_row(int i, double coef, std::span<double> acc) const {
  if (!sparse_) {
    const double* row = values_.data() + static_cast<std::size_t>(i) * d_;
    for (int j = 0; j < d_; ++j) acc[j] += coef * row[j];
    return;
  }
  for (std::int64_t p = indptr_[i]; p < indptr_[i + 1]; ++p) {
    acc[indices_[p]] += coef * values_[p];
  }
}

double FeatureMatrix::row_sq_norm(int i) const {
  double acc = 0.0;
  if (!sparse_) {
    const double* row = values_.data() + static_cast<std::size_t>(i) * d_;
    for (int j = 0; j < d_; ++j) acc += row[j] * row[j];
    return acc;
  }
  for (std::int64_t p = indptr_[i]; p < indptr_[i + 1]; ++p) {
    acc += values_[p] * values_[p];
  }
  return acc;
}

double FeatureMatrix::row_dot(int i, const FeatureMatrix& other, int j) const {
  if (d_ != other.d_) {
    throw std::invalid_argument("FeatureMatrix::row_dot: dimension mismatch");
  }
  if (!sparse_ && !other.sparse_) {
    const double* a = values_.data() + static_cast<std::size_t>(i) * d_;
    const double* b = other.values_.data() + static_cast<std::size_t>(j) * d_;
    double acc = 0.0;
    for (int t = 0; t < d_; ++t) acc += a[t] * b[t];
    return acc;
  }
  if (sparse_ && other.sparse_) {
    double acc = 0.0;
    std::int64_t p = indptr_[i], pe = indptr_[i + 1];
    std::int64_t q = other.indptr_[j], qe = other.indptr_[j + 1];
    while (p < pe && q < qe) {
      const int pi = indices_[p], qi = other.indices_[q];
      if (pi == qi) {
        acc += values_[p++] * other.values_[q++];
      } else if (pi < qi) {
        ++p;
      } else {
        ++q;
      }
    }
    return acc;
  }
  // Mixed: stream the sparse side against the dense side.
  const FeatureMatrix& sp = sparse_ ? *this : other;
  const FeatureMatrix& de = sparse_ ? other : *this;
  const int si = sparse_ ? i : j;
  const int di = sparse_ ? j : i;
  const double* row = de.values_.data() + static_cast<std::size_t>(di) * de.d_;
  double acc = 0.0;
  for (std::int64_t p = sp.indptr_[si]; p < sp.indptr_[si + 1]; ++p) {
    acc += sp.values_[p] * row[sp.indices_[p]];
  }
  return acc;
}

void FeatureMatrix::copy_row(int i, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  if (!sparse_) {
    const double* row = values_.data() + static_cast<std::size_t>(i) * d_;
    std::copy(row, row + d_, out.begin());
    return;
  }
  for (std::int64_t p = indptr_[i]; p < indptr_[i + 1]; ++p) {
    out[indices_[p]] = values_[p];
  }
}

const std::vector<double>& FeatureMatrix::dense_values() const {
  if (sparse_) {
    throw std::logic_error("FeatureMatrix::dense_values on sparse matrix");
  }
  return values_;
}

// ---------------------------------------------------------------------------
// LibSVM / CSV ingestion
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void data_fail(const std::string& path, std::size_t line,
                            const std::string& what) {
  throw DataError(path + ":" + std::to_string(line) + ": " + what);
}

std::int64_t parse_label_token(const std::string& tok, const std::string& path,
                               std::size_t line) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    data_fail(path, line, "cannot parse label '" + tok + "'");
  }
  if (pos != tok.size()) {
    data_fail(path, line, "trailing characters in label '" + tok + "'");
  }
  if (!std::isfinite(v) || v != std::floor(v) || std::abs(v) > 1e15) {
    data_fail(path, line, "label '" + tok + "' is not an integer");
  }
  return static_cast<std::int64_t>(v);
}

struct RawExample {
  std::vector<std::int64_t> ext_labels;
  std::vector<std::pair<int, double>> feats;  // 0-based index, value
};

Dataset assemble(std::vector<RawExample> rows, int d, bool multilabel,
                 const std::string& path) {
  if (rows.empty()) {
    throw DataError(path + ": no examples");
  }
  std::vector<std::int64_t> classes;
  for (const RawExample& r : rows) {
    for (std::int64_t v : r.ext_labels) classes.push_back(v);
  }
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  std::map<std::int64_t, int> to_id;
  for (std::size_t i = 0; i < classes.size(); ++i) {
    to_id[classes[i]] = static_cast<int>(i);
  }

  const int n = static_cast<int>(rows.size());
  std::vector<std::int64_t> indptr(1, 0);
  std::vector<int> indices;
  std::vector<double> values;
  std::vector<std::vector<int>> labels(n);
  for (int i = 0; i < n; ++i) {
    RawExample& r = rows[i];
    std::sort(r.feats.begin(), r.feats.end());
    for (const auto& [idx, val] : r.feats) {
      indices.push_back(idx);
      values.push_back(val);
    }
    indptr.push_back(static_cast<std::int64_t>(indices.size()));
    labels[i].reserve(r.ext_labels.size());
    for (std::int64_t v : r.ext_labels) labels[i].push_back(to_id.at(v));
    std::sort(labels[i].begin(), labels[i].end());
    labels[i].erase(std::unique(labels[i].begin(), labels[i].end()),
                    labels[i].end());
  }

  Dataset data{FeatureMatrix::sparse(n, d, std::move(indptr),
                                     std::move(indices), std::move(values)),
               std::move(labels), std::move(classes), multilabel};
  return data;
}

}  // namespace

Dataset read_libsvm(const std::string& path, bool multilabel) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open");

  std::vector<RawExample> rows;
  int d = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank line
    if (tok[0] == '#') continue;

    RawExample r;
    // Label field: one value, or comma-separated values in multilabel mode.
    if (multilabel) {
      std::stringstream fs(tok);
      std::string part;
      while (std::getline(fs, part, ',')) {
        if (part.empty()) data_fail(path, lineno, "empty label in list");
        r.ext_labels.push_back(parse_label_token(part, path, lineno));
      }
      if (r.ext_labels.empty()) data_fail(path, lineno, "no labels");
    } else {
      if (tok.find(',') != std::string::npos) {
        data_fail(path, lineno,
                  "comma-separated labels in a single-label file (use the "
                  "multilabel flag)");
      }
      r.ext_labels.push_back(parse_label_token(tok, path, lineno));
    }

    while (ls >> tok) {
      const std::size_t colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 ||
          colon + 1 >= tok.size()) {
        data_fail(path, lineno, "malformed feature '" + tok + "'");
      }
      int idx = 0;
      double val = 0.0;
      try {
        std::size_t pos = 0;
        idx = std::stoi(tok.substr(0, colon), &pos);
        if (pos != colon) throw std::invalid_argument("");
        val = std::stod(tok.substr(colon + 1), &pos);
        if (pos != tok.size() - colon - 1) throw std::invalid_argument("");
      } catch (const std::exception&) {
        data_fail(path, lineno, "malformed feature '" + tok + "'");
      }
      if (idx < 1) data_fail(path, lineno, "feature index must be >= 1");
      if (!std::isfinite(val)) data_fail(path, lineno, "non-finite feature");
      for (const auto& [prev, unused] : r.feats) {
        if (prev == idx - 1) {
          data_fail(path, lineno,
                    "duplicate feature index " + std::to_string(idx));
        }
      }
      r.feats.emplace_back(idx - 1, val);
      d = std::max(d, idx);
    }
    rows.push_back(std::move(r));
  }
  return assemble(std::move(rows), d, multilabel, path);
}

void write_libsvm(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  char buf[64];
  std::vector<double> row(data.num_features());
  for (int i = 0; i < data.num_examples(); ++i) {
    const auto& labs = data.labels[i];
    for (std::size_t t = 0; t < labs.size(); ++t) {
      if (t) out << ',';
      out << data.class_values[labs[t]];
    }
    data.features.copy_row(i, row);
    for (int j = 0; j < data.num_features(); ++j) {
      if (row[j] == 0.0) continue;
      std::snprintf(buf, sizeof(buf), "%.17g", row[j]);
      out << ' ' << (j + 1) << ':' << buf;
    }
    out << '\n';
  }
  if (!out) throw DataError(path + ": write failed");
}

Dataset read_csv(const std::string& path, bool multilabel) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open");

  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  std::vector<std::string> header;
  {
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  int label_col = -1;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == "label") {
      if (label_col >= 0) throw DataError(path + ": duplicate label column");
      label_col = static_cast<int>(j);
    }
  }
  if (label_col < 0) throw DataError(path + ": no 'label' column in header");
  const int d = static_cast<int>(header.size()) - 1;

  std::vector<RawExample> rows;
  std::vector<double> dense;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size()) {
      data_fail(path, lineno, "expected " + std::to_string(header.size()) +
                                  " cells, found " +
                                  std::to_string(cells.size()));
    }
    RawExample r;
    {
      std::stringstream fs(cells[label_col]);
      std::string part;
      while (std::getline(fs, part, ';')) {
        if (part.empty()) data_fail(path, lineno, "empty label in list");
        r.ext_labels.push_back(parse_label_token(part, path, lineno));
      }
      if (r.ext_labels.empty()) data_fail(path, lineno, "no labels");
      if (!multilabel && r.ext_labels.size() != 1) {
        data_fail(path, lineno,
                  "multiple labels in a single-label file (use the "
                  "multilabel flag)");
      }
    }
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (static_cast<int>(j) == label_col) continue;
      double v = 0.0;
      try {
        std::size_t pos = 0;
        v = std::stod(cells[j], &pos);
        if (pos != cells[j].size()) throw std::invalid_argument("");
      } catch (const std::exception&) {
        data_fail(path, lineno, "cannot parse value '" + cells[j] + "'");
      }
      if (!std::isfinite(v)) data_fail(path, lineno, "non-finite feature");
      dense.push_back(v);
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw DataError(path + ": no examples");

  Dataset sparse_shell =
      assemble(std::move(rows), d, multilabel, path);  // labels + class map
  Dataset data{FeatureMatrix::dense(sparse_shell.num_examples(), d,
                                    std::move(dense)),
               std::move(sparse_shell.labels),
               std::move(sparse_shell.class_values), multilabel};
  return data;
}

// ---------------------------------------------------------------------------
// Circle benchmark
// ---------------------------------------------------------------------------

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void validate_circle(const CircleSpec& spec) {
  for (double len : spec.segment_lengths) {
    if (!(len > 0.0)) throw std::invalid_argument("circle: segment length <= 0");
  }
  for (const auto& w : spec.class_weights) {
    double total = 0.0;
    for (double v : w) {
      if (v < 0.0) throw std::invalid_argument("circle: negative weight");
      total += v;
    }
    if (!(total > 0.0)) {
      throw std::invalid_argument("circle: class weights all zero");
    }
  }
  for (int s = 0; s < 5; ++s) {
    double col = 0.0;
    for (int c = 0; c < 3; ++c) col += spec.class_weights[c][s];
    if (!(col > 0.0)) {
      throw std::invalid_argument("circle: segment has no class weight");
    }
  }
}

Dataset circle_split(const CircleSpec& spec, int n, std::uint64_t seed) {
  std::array<double, 5> starts{};
  double total_len = 0.0;
  for (int s = 0; s < 5; ++s) {
    starts[s] = total_len;
    total_len += spec.segment_lengths[s];
  }

  Rng rng(seed);
  std::vector<double> dense;
  dense.reserve(static_cast<std::size_t>(n) * 2);
  std::vector<std::vector<int>> labels;
  labels.reserve(n);

  for (int t = 0; t < n; ++t) {
    const int seg = static_cast<int>(rng.next_below(5));
    const double pos =
        rng.next_uniform(starts[seg], starts[seg] + spec.segment_lengths[seg]);
    double col = 0.0;
    for (int c = 0; c < 3; ++c) col += spec.class_weights[c][seg];
    const double u = rng.next_unit() * col;
    int label = 2;
    double acc = 0.0;
    for (int c = 0; c < 3; ++c) {
      acc += spec.class_weights[c][seg];
      if (u < acc) {
        label = c;
        break;
      }
    }
    const double v = pos / total_len;
    dense.push_back(std::cos(kTwoPi * v));
    dense.push_back(std::sin(kTwoPi * v));
    labels.push_back({label});
  }
  return Dataset{FeatureMatrix::dense(n, 2, std::move(dense)),
                 std::move(labels),
                 {1, 2, 3},
                 false};
}

}  // namespace

CircleData gen_circle(const CircleSpec& spec) {
  validate_circle(spec);
  if (spec.n_train < 3 || spec.n_val < 3 || spec.n_test < 3) {
    throw std::invalid_argument("circle: each split needs at least 3 samples");
  }
  return CircleData{circle_split(spec, spec.n_train, derive_seed(spec.seed, 0)),
                    circle_split(spec, spec.n_val, derive_seed(spec.seed, 1)),
                    circle_split(spec, spec.n_test, derive_seed(spec.seed, 2))};
}

CirclePosteriors circle_segment_posteriors(const CircleSpec& spec) {
  validate_circle(spec);
  CirclePosteriors out{};
  for (int s = 0; s < 5; ++s) {
    out.segment_prob[s] = 1.0 / 5.0;
    double col = 0.0;
    for (int c = 0; c < 3; ++c) col += spec.class_weights[c][s];
    for (int c = 0; c < 3; ++c) {
      out.class_posterior[s][c] = spec.class_weights[c][s] / col;
    }
  }
  return out;
}

double circle_bayes_topk_error(int k, const CircleSpec& spec) {
  if (k < 1 || k > 3) throw std::invalid_argument("circle: k must be in [1,3]");
  const CirclePosteriors cp = circle_segment_posteriors(spec);
  double err = 0.0;
  for (int s = 0; s < 5; ++s) {
    std::array<double, 3> p = cp.class_posterior[s];
    std::sort(p.begin(), p.end(), std::greater<>());
    // Sum the tail the prediction can never cover; summing the small entries
    // directly keeps the result exact when the tail is empty or zero.
    double missed = 0.0;
    for (int j = k; j < 3; ++j) missed += p[j];
    err += cp.segment_prob[s] * missed;
  }
  return err;
}

// ---------------------------------------------------------------------------
// Gram matrices
// ---------------------------------------------------------------------------

std::vector<double> rbf_gram(const FeatureMatrix& x, double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw std::invalid_argument("rbf_gram: theta must be > 0");
  }
  const int n = x.rows();
  std::vector<double> sq(n);
  for (int i = 0; i < n; ++i) sq[i] = x.row_sq_norm(i);
  std::vector<double> k(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    k[static_cast<std::size_t>(i) * n + i] = 1.0;
    for (int j = i + 1; j < n; ++j) {
      const double dist2 =
          std::max(0.0, sq[i] + sq[j] - 2.0 * x.row_dot(i, x, j));
      const double v = std::exp(-theta * dist2);
      k[static_cast<std::size_t>(i) * n + j] = v;
      k[static_cast<std::size_t>(j) * n + i] = v;
    }
  }
  return k;
}

std::vector<double> linear_gram(const FeatureMatrix& x) {
  const int n = x.rows();
  std::vector<double> k(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double v = x.row_dot(i, x, j);
      k[static_cast<std::size_t>(i) * n + j] = v;
      k[static_cast<std::size_t>(j) * n + i] = v;
    }
  }
  return k;
}

namespace {

std::uint64_t fnv1a(const unsigned char* bytes, std::size_t len) {
  std::uint64_t h = 14695981039346656037ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

void write_gram(const std::string& path, int n, std::span<const double> k) {
  if (n < 1 || k.size() != static_cast<std::size_t>(n) * n) {
    throw std::invalid_argument("write_gram: size mismatch");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(path + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(k.data()),
            static_cast<std::streamsize>(k.size() * sizeof(double)));
  if (!out) throw DataError(path + ": write failed");
  out.close();

  const std::uint64_t h =
      fnv1a(reinterpret_cast<const unsigned char*>(k.data()),
            k.size() * sizeof(double));
  std::ofstream meta(path + ".meta");
  if (!meta) throw DataError(path + ".meta: cannot open for writing");
  char hex[32];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(h));
  meta << "n " << n << "\nchecksum " << hex << "\n";
  if (!meta) throw DataError(path + ".meta: write failed");
}

std::pair<int, std::vector<double>> read_gram(const std::string& path) {
  std::ifstream meta(path + ".meta");
  if (!meta) throw DataError(path + ".meta: cannot open");
  std::string key;
  int n = 0;
  std::string checksum;
  while (meta >> key) {
    if (key == "n") {
      if (!(meta >> n)) throw DataError(path + ".meta: bad n");
    } else if (key == "checksum") {
      if (!(meta >> checksum)) throw DataError(path + ".meta: bad checksum");
    } else {
      throw DataError(path + ".meta: unknown key '" + key + "'");
    }
  }
  if (n < 1) throw DataError(path + ".meta: missing or invalid n");
  if (checksum.empty()) throw DataError(path + ".meta: missing checksum");

  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path + ": cannot open");
  std::vector<double> k(static_cast<std::size_t>(n) * n);
  in.read(reinterpret_cast<char*>(k.data()),
          static_cast<std::streamsize>(k.size() * sizeof(double)));
  if (in.gcount() !=
      static_cast<std::streamsize>(k.size() * sizeof(double))) {
    throw DataError(path + ": truncated payload for n = " + std::to_string(n));
  }
  char extra;
  if (in.read(&extra, 1)) {
    throw DataError(path + ": payload larger than n*n doubles");
  }

  const std::uint64_t h =
      fnv1a(reinterpret_cast<const unsigned char*>(k.data()),
            k.size() * sizeof(double));
  char hex[32];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(h));
  if (checksum != hex) {
    throw DataError(path + ": checksum mismatch (expected " + checksum +
                    ", computed " + hex + ")");
  }
  for (double v : k) {
    if (!std::isfinite(v)) throw DataError(path + ": non-finite entry");
  }
  return {n, std::move(k)};
}

// ---------------------------------------------------------------------------
// Folds and the largest-label filter
// ---------------------------------------------------------------------------

FoldAssignment make_folds(const Dataset& data, int folds, std::uint64_t seed) {
  const int n = data.num_examples();
  if (folds < 2) throw std::invalid_argument("make_folds: folds must be >= 2");
  if (folds > n) throw std::invalid_argument("make_folds: folds exceed examples");

  FoldAssignment out;
  out.fold.assign(n, 0);

  bool can_stratify = !data.multilabel;
  if (can_stratify) {
    std::vector<int> counts(data.num_classes(), 0);
    for (const auto& labs : data.labels) ++counts[labs[0]];
    for (int c : counts) {
      if (c > 0 && c < folds) {
        can_stratify = false;
        break;
      }
    }
  }

  if (!can_stratify) {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(derive_seed(seed, 0));
    rng.shuffle(idx);
    for (int t = 0; t < n; ++t) out.fold[idx[t]] = t % folds;
    out.stratified = false;
    return out;
  }

  int cursor = 0;
  for (int c = 0; c < data.num_classes(); ++c) {
    std::vector<int> members;
    for (int i = 0; i < n; ++i) {
      if (data.labels[i][0] == c) members.push_back(i);
    }
    if (members.empty()) continue;
    Rng rng(derive_seed(seed, 1000 + static_cast<std::uint64_t>(c)));
    rng.shuffle(members);
    for (int i : members) {
      out.fold[i] = cursor % folds;
      ++cursor;
    }
  }
  out.stratified = true;
  return out;
}

Dataset largest_label_filter(const Dataset& data,
                             const std::vector<std::vector<double>>& sizes) {
  if (!data.multilabel) {
    throw std::invalid_argument("largest_label_filter: dataset is multiclass");
  }
  if (sizes.size() != static_cast<std::size_t>(data.num_examples())) {
    throw std::invalid_argument("largest_label_filter: size list mismatch");
  }
  std::vector<std::vector<int>> labels(data.num_examples());
  for (int i = 0; i < data.num_examples(); ++i) {
    const auto& labs = data.labels[i];
    if (sizes[i].size() != labs.size()) {
      throw std::invalid_argument(
          "largest_label_filter: example " + std::to_string(i) +
          " has " + std::to_string(labs.size()) + " labels but " +
          std::to_string(sizes[i].size()) + " sizes");
    }
    int best = 0;
    for (std::size_t t = 1; t < labs.size(); ++t) {
      if (sizes[i][t] > sizes[i][best]) best = static_cast<int>(t);
    }
    labels[i] = {labs[best]};
  }
  return Dataset{data.features, std::move(labels), data.class_values, false};
}

Dataset subset_rows(const Dataset& data, std::span<const int> rows) {
  const int n = data.num_examples();
  const int d = data.num_features();
  for (int r : rows) {
    if (r < 0 || r >= n) {
      throw std::invalid_argument("subset_rows: row index out of range");
    }
  }
  std::vector<std::vector<int>> labels;
  labels.reserve(rows.size());
  for (int r : rows) labels.push_back(data.labels[r]);

  FeatureMatrix features;
  if (data.features.is_sparse()) {
    std::vector<std::int64_t> indptr{0};
    std::vector<int> indices;
    std::vector<double> values;
    for (int r : rows) {
      data.features.for_each(r, [&](int j, double v) {
        indices.push_back(j);
        values.push_back(v);
      });
      indptr.push_back(static_cast<std::int64_t>(indices.size()));
    }
    features = FeatureMatrix::sparse(static_cast<int>(rows.size()), d,
                                     std::move(indptr), std::move(indices),
                                     std::move(values));
  } else {
    std::vector<double> values;
    values.reserve(rows.size() * static_cast<std::size_t>(d));
    for (int r : rows) {
      const double* src = data.features.dense_values().data() +
                          static_cast<std::size_t>(r) * d;
      values.insert(values.end(), src, src + d);
    }
    features = FeatureMatrix::dense(static_cast<int>(rows.size()), d,
                                    std::move(values));
  }
  return Dataset{std::move(features), std::move(labels), data.class_values,
                 data.multilabel};
}

}  // namespace sdca
