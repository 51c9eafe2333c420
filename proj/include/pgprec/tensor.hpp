#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace pgprec {

// Dense row-major matrix of doubles. Vectors are 1xN or Nx1 tensors.
// All kernels reject non-finite inputs and guarantee finite outputs.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int rows, int cols);  // zero-filled
  Tensor(int rows, int cols, std::vector<double> values);

  static Tensor zeros(int rows, int cols) { return Tensor(rows, cols); }
  static Tensor full(int rows, int cols, double value);
  static Tensor row_vector(std::vector<double> values);
  static Tensor identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& at(int r, int c) { return values_[static_cast<std::size_t>(r) * cols_ + c]; }
  double at(int r, int c) const { return values_[static_cast<std::size_t>(r) * cols_ + c]; }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::span<double> row(int r) { return {data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)}; }
  std::span<const double> row(int r) const { return {data() + static_cast<std::size_t>(r) * cols_, static_cast<std::size_t>(cols_)}; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  bool same_shape(const Tensor& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }
  bool all_finite() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> values_;
};

// Throws NumericError naming `what` when t has a NaN/Inf entry.
void require_finite(const Tensor& t, const char* what);

// C = op(A) * op(B) with optional transposes.
Tensor matmul(const Tensor& a, const Tensor& b, bool trans_a = false, bool trans_b = false);
Tensor add(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
// Softmax of every row, computed with max subtraction.
Tensor row_softmax(const Tensor& a);
Tensor map_sigmoid(const Tensor& a);
Tensor map_log(const Tensor& a);
Tensor map_exp(const Tensor& a);
// Flattened inner product; shapes must match element count.
double dot(const Tensor& a, const Tensor& b);
double sum_all(const Tensor& a);
Tensor transpose(const Tensor& a);
// Vertical stack; parts must agree on column count (zero-row parts allowed).
Tensor concat_rows(std::span<const Tensor* const> parts);
Tensor gather_rows(const Tensor& m, std::span<const int> row_ids);

double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace pgprec
