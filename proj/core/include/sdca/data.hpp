#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sdca {

// Row-oriented feature matrix, dense (row-major) or sparse (CSR). All solver
// access goes through the row kernels below so both storages share one code
// path.
class FeatureMatrix {
 public:
  static FeatureMatrix dense(int n, int d, std::vector<double> values);
  static FeatureMatrix sparse(int n, int d, std::vector<std::int64_t> indptr,
                              std::vector<int> indices,
                              std::vector<double> values);

  int rows() const { return n_; }
  int cols() const { return d_; }
  bool is_sparse() const { return sparse_; }

  // <x_i, w>, w of length cols().
  double dot_row(int i, std::span<const double> w) const;
  // acc += coef * x_i, acc of length cols().
  void axpy_row(int i, double coef, std::span<double> acc) const;
  double row_sq_norm(int i) const;
  // <x_i, other.x_j>; used to build Gram matrices.
  double row_dot(int i, const FeatureMatrix& other, int j) const;
  // Densifies one row into out (length cols()).
  void copy_row(int i, std::span<double> out) const;

  // Visits the row's entries as f(column, value); dense rows visit every
  // column including zeros.
  template <class F>
  void for_each(int i, F&& f) const {
    if (!sparse_) {
      const double* row = values_.data() + static_cast<std::size_t>(i) * d_;
      for (int j = 0; j < d_; ++j) f(j, row[j]);
    } else {
      for (std::int64_t p = indptr_[i]; p < indptr_[i + 1]; ++p) {
        f(indices_[p], values_[p]);
      }
    }
  }

  const std::vector<double>& dense_values() const;

 private:
  bool sparse_ = false;
  int n_ = 0, d_ = 0;
  std::vector<double> values_;
  std::vector<std::int64_t> indptr_;
  std::vector<int> indices_;
};

struct Dataset {
  FeatureMatrix features;
  // Sorted internal class ids per example; exactly one entry per example for
  // multiclass data.
  std::vector<std::vector<int>> labels;
  // Internal id -> external label value (dense, ascending).
  std::vector<std::int64_t> class_values;
  bool multilabel = false;

  int num_examples() const { return features.rows(); }
  int num_features() const { return features.cols(); }
  int num_classes() const { return static_cast<int>(class_values.size()); }
};

// LibSVM text format: `label[,label...] index:value ...` with 1-based feature
// indexes. Labels are remapped to dense internal ids by ascending external
// value. Malformed content raises DataError with the line number.
Dataset read_libsvm(const std::string& path, bool multilabel);
void write_libsvm(const Dataset& data, const std::string& path);

// Dense CSV with a header row; the column named "label" carries the class
// (multilabel sets separated by ';'), all other columns are features.
Dataset read_csv(const std::string& path, bool multilabel);

// Synthetic three-class benchmark on the unit circle. Each point picks one
// of the five segments covering [0, 7] with equal probability, a position
// uniform within that segment (rescaled to [0, 1] and mapped to
// (cos 2*pi*v, sin 2*pi*v)), and a class from the segment's distribution:
// class_weights[c][s], read column-wise, is the (unnormalized) probability
// of class c within segment s. The long middle segment is therefore sparser
// per unit of arc, and the classes overlap inside the mixed segments.
// External labels are 1, 2, 3.
struct CircleSpec {
  int n_train = 200;
  int n_val = 200;
  int n_test = 200000;
  std::uint64_t seed = 1;
  std::array<double, 5> segment_lengths{1.0, 1.0, 1.0, 3.0, 1.0};
  std::array<std::array<double, 5>, 3> class_weights{{
      {0.0, 1.0, 0.4, 0.3, 0.0},
      {1.0, 0.0, 0.1, 0.7, 0.0},
      {0.0, 0.0, 0.5, 0.0, 1.0},
  }};
};

struct CircleData {
  Dataset train, val, test;
};

CircleData gen_circle(const CircleSpec& spec);

// The generating distribution implied by a CircleSpec: each segment has a
// marginal probability (uniform across segments) and a conditional class
// distribution (its normalized weight column).
struct CirclePosteriors {
  std::array<double, 5> segment_prob;
  std::array<std::array<double, 3>, 5> class_posterior;
};

CirclePosteriors circle_segment_posteriors(const CircleSpec& spec = {});
// Exact Bayes top-k error of the circle distribution.
double circle_bayes_topk_error(int k, const CircleSpec& spec = {});

// Gram matrices (row-major n x n). rbf_gram uses K_ij = exp(-theta
// ||x_i - x_j||^2) with an exactly unit diagonal.
std::vector<double> rbf_gram(const FeatureMatrix& x, double theta);
std::vector<double> linear_gram(const FeatureMatrix& x);

// Raw row-major float64 Gram file with a text sidecar (path + ".meta")
// holding the dimension and an FNV-1a checksum of the payload bytes.
void write_gram(const std::string& path, int n, std::span<const double> k);
std::pair<int, std::vector<double>> read_gram(const std::string& path);

// Fold assignment for cross-validation, stratified by class for multiclass
// data when every class has at least `folds` members; otherwise (or for
// multilabel data) a plain shuffled deal, with `stratified` reporting which
// path was taken.
struct FoldAssignment {
  std::vector<int> fold;  // per example, in [0, folds)
  bool stratified = false;
};

FoldAssignment make_folds(const Dataset& data, int folds, std::uint64_t seed);

// Collapses a multilabel dataset to multiclass by keeping, per example, the
// label with the largest size annotation (ties toward the smaller class id).
// `sizes[i]` is parallel to `data.labels[i]`.
Dataset largest_label_filter(const Dataset& data,
                             const std::vector<std::vector<double>>& sizes);

// A dataset holding the given rows (in order); the class map is unchanged.
Dataset subset_rows(const Dataset& data, std::span<const int> rows);

}  // namespace sdca
