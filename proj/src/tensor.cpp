#include "pgprec/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pgprec/errors.hpp"

namespace pgprec {

Tensor::Tensor(int rows, int cols)
    : rows_(rows), cols_(cols), values_(static_cast<std::size_t>(rows) * cols, 0.0) {
  if (rows < 0 || cols < 0) {
    throw ShapeError("tensor dimensions must be non-negative");
  }
}

Tensor::Tensor(int rows, int cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows < 0 || cols < 0 ||
      values_.size() != static_cast<std::size_t>(rows) * cols) {
    throw ShapeError("tensor value count does not match shape");
  }
}

Tensor Tensor::full(int rows, int cols, double value) {
  Tensor t(rows, cols);
  std::fill(t.values_.begin(), t.values_.end(), value);
  return t;
}

Tensor Tensor::row_vector(std::vector<double> values) {
  const int n = static_cast<int>(values.size());
  return Tensor(1, n, std::move(values));
}

Tensor Tensor::identity(int n) {
  Tensor t(n, n);
  for (int i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

bool Tensor::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void require_finite(const Tensor& t, const char* what) {
  if (!t.all_finite()) {
    throw NumericError(std::string("non-finite values in ") + what);
  }
}

Tensor matmul(const Tensor& a, const Tensor& b, bool trans_a, bool trans_b) {
  require_finite(a, "matmul lhs");
  require_finite(b, "matmul rhs");
  const int m = trans_a ? a.cols() : a.rows();
  const int ka = trans_a ? a.rows() : a.cols();
  const int kb = trans_b ? b.cols() : b.rows();
  const int n = trans_b ? b.rows() : b.cols();
  if (ka != kb) {
    throw ShapeError("matmul inner dimensions mismatch: " + std::to_string(ka) +
                     " vs " + std::to_string(kb));
  }
  Tensor c(m, n);
  for (int i = 0; i < m; ++i) {
    for (int k = 0; k < ka; ++k) {
      const double aik = trans_a ? a.at(k, i) : a.at(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        const double bkj = trans_b ? b.at(j, k) : b.at(k, j);
        c.at(i, j) += aik * bkj;
      }
    }
  }
  require_finite(c, "matmul result");
  return c;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_finite(a, "add lhs");
  require_finite(b, "add rhs");
  if (!a.same_shape(b)) throw ShapeError("add shape mismatch");
  Tensor c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c.values()[i] += b.values()[i];
  return c;
}

Tensor scale(const Tensor& a, double c) {
  require_finite(a, "scale input");
  if (!std::isfinite(c)) throw NumericError("non-finite scale factor");
  Tensor out = a;
  for (double& v : out.values()) v *= c;
  return out;
}

Tensor row_softmax(const Tensor& a) {
  require_finite(a, "softmax input");
  if (a.cols() == 0) throw ShapeError("softmax of empty row");
  Tensor out(a.rows(), a.cols());
  for (int r = 0; r < a.rows(); ++r) {
    double mx = a.at(r, 0);
    for (int c = 1; c < a.cols(); ++c) mx = std::max(mx, a.at(r, c));
    double z = 0.0;
    for (int c = 0; c < a.cols(); ++c) {
      const double e = std::exp(a.at(r, c) - mx);
      out.at(r, c) = e;
      z += e;
    }
    for (int c = 0; c < a.cols(); ++c) out.at(r, c) /= z;
  }
  return out;
}

Tensor map_sigmoid(const Tensor& a) {
  require_finite(a, "sigmoid input");
  Tensor out = a;
  for (double& v : out.values()) {
    v = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                 : std::exp(v) / (1.0 + std::exp(v));
  }
  return out;
}

Tensor map_log(const Tensor& a) {
  require_finite(a, "log input");
  Tensor out = a;
  for (double& v : out.values()) v = std::log(v);
  require_finite(out, "log result");
  return out;
}

Tensor map_exp(const Tensor& a) {
  require_finite(a, "exp input");
  Tensor out = a;
  for (double& v : out.values()) v = std::exp(v);
  require_finite(out, "exp result");
  return out;
}

double dot(const Tensor& a, const Tensor& b) {
  require_finite(a, "dot lhs");
  require_finite(b, "dot rhs");
  if (a.size() != b.size()) throw ShapeError("dot element count mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.values()[i] * b.values()[i];
  return s;
}

double sum_all(const Tensor& a) {
  require_finite(a, "sum input");
  double s = 0.0;
  for (double v : a.values()) s += v;
  return s;
}

Tensor transpose(const Tensor& a) {
  Tensor out(a.cols(), a.rows());
  for (int r = 0; r < a.rows(); ++r) {
    for (int c = 0; c < a.cols(); ++c) out.at(c, r) = a.at(r, c);
  }
  return out;
}

Tensor concat_rows(std::span<const Tensor* const> parts) {
  if (parts.empty()) throw ShapeError("concat of zero parts");
  int cols = -1;
  int rows = 0;
  for (const Tensor* p : parts) {
    if (p->rows() == 0) continue;
    if (cols == -1) cols = p->cols();
    if (p->cols() != cols) throw ShapeError("concat column mismatch");
    rows += p->rows();
  }
  if (cols == -1) cols = parts.front()->cols();
  Tensor out(rows, cols);
  int r = 0;
  for (const Tensor* p : parts) {
    require_finite(*p, "concat input");
    for (int i = 0; i < p->rows(); ++i, ++r) {
      std::copy(p->row(i).begin(), p->row(i).end(), out.row(r).begin());
    }
  }
  return out;
}

Tensor gather_rows(const Tensor& m, std::span<const int> row_ids) {
  require_finite(m, "gather input");
  Tensor out(static_cast<int>(row_ids.size()), m.cols());
  for (std::size_t i = 0; i < row_ids.size(); ++i) {
    const int r = row_ids[i];
    if (r < 0 || r >= m.rows()) {
      throw ShapeError("gather row index out of range: " + std::to_string(r));
    }
    std::copy(m.row(r).begin(), m.row(r).end(), out.row(static_cast<int>(i)).begin());
  }
  return out;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw ShapeError("max_abs_diff shape mismatch");
  double mx = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    mx = std::max(mx, std::abs(a.values()[i] - b.values()[i]));
  }
  return mx;
}

}  // namespace pgprec
