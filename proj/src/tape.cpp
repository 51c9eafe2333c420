#include "pgprec/tape.hpp"

#include <cmath>
#include <utility>

#include "pgprec/errors.hpp"

namespace pgprec {

int GradTape::push(Node node) {
  nodes_.push_back(std::move(node));
  return static_cast<int>(nodes_.size()) - 1;
}

const GradTape::Node& GradTape::node(ValueId id) const {
  if (!id.valid() || id.index >= static_cast<int>(nodes_.size())) {
    throw ContractError("invalid tape value id");
  }
  return nodes_[id.index];
}

ValueId GradTape::leaf(Tensor value, bool trainable) {
  require_finite(value, "tape leaf");
  Node n;
  n.op = Op::kLeaf;
  n.value = std::move(value);
  n.requires_grad = trainable;
  return {push(std::move(n))};
}

ValueId GradTape::matmul(ValueId a, ValueId b, bool trans_a, bool trans_b) {
  Node n;
  n.op = Op::kMatMul;
  n.value = pgprec::matmul(node(a).value, node(b).value, trans_a, trans_b);
  n.inputs = {a.index, b.index};
  n.requires_grad = node(a).requires_grad || node(b).requires_grad;
  n.trans_a = trans_a;
  n.trans_b = trans_b;
  return {push(std::move(n))};
}

ValueId GradTape::add(ValueId a, ValueId b) {
  Node n;
  n.op = Op::kAdd;
  n.value = pgprec::add(node(a).value, node(b).value);
  n.inputs = {a.index, b.index};
  n.requires_grad = node(a).requires_grad || node(b).requires_grad;
  return {push(std::move(n))};
}

ValueId GradTape::scale(ValueId a, double factor) {
  Node n;
  n.op = Op::kScale;
  n.value = pgprec::scale(node(a).value, factor);
  n.inputs = {a.index};
  n.requires_grad = node(a).requires_grad;
  n.scalar = factor;
  return {push(std::move(n))};
}

ValueId GradTape::row_softmax(ValueId a) {
  Node n;
  n.op = Op::kRowSoftmax;
  n.value = pgprec::row_softmax(node(a).value);
  n.inputs = {a.index};
  n.requires_grad = node(a).requires_grad;
  return {push(std::move(n))};
}

ValueId GradTape::sigmoid(ValueId a) {
  Node n;
  n.op = Op::kSigmoid;
  n.value = pgprec::map_sigmoid(node(a).value);
  n.inputs = {a.index};
  n.requires_grad = node(a).requires_grad;
  return {push(std::move(n))};
}

ValueId GradTape::log(ValueId a) {
  Node n;
  n.op = Op::kLog;
  n.value = pgprec::map_log(node(a).value);
  n.inputs = {a.index};
  n.requires_grad = node(a).requires_grad;
  return {push(std::move(n))};
}

ValueId GradTape::dot(ValueId a, ValueId b) {
  Node n;
  n.op = Op::kDot;
  n.value = Tensor(1, 1, {pgprec::dot(node(a).value, node(b).value)});
  n.inputs = {a.index, b.index};
  n.requires_grad = node(a).requires_grad || node(b).requires_grad;
  return {push(std::move(n))};
}

ValueId GradTape::sum(ValueId a) {
  Node n;
  n.op = Op::kSum;
  n.value = Tensor(1, 1, {pgprec::sum_all(node(a).value)});
  n.inputs = {a.index};
  n.requires_grad = node(a).requires_grad;
  return {push(std::move(n))};
}

ValueId GradTape::concat_rows(std::span<const ValueId> parts) {
  if (parts.empty()) throw ShapeError("concat of zero parts");
  std::vector<const Tensor*> ptrs;
  ptrs.reserve(parts.size());
  Node n;
  n.op = Op::kConcatRows;
  for (ValueId p : parts) {
    ptrs.push_back(&node(p).value);
    n.inputs.push_back(p.index);
    n.requires_grad = n.requires_grad || node(p).requires_grad;
    n.row_ids.push_back(node(p).value.rows());
  }
  n.value = pgprec::concat_rows(ptrs);
  return {push(std::move(n))};
}

ValueId GradTape::gather_rows(ValueId m, std::vector<int> row_ids) {
  Node n;
  n.op = Op::kGatherRows;
  n.value = pgprec::gather_rows(node(m).value, row_ids);
  n.inputs = {m.index};
  n.requires_grad = node(m).requires_grad;
  n.row_ids = std::move(row_ids);
  return {push(std::move(n))};
}

ValueId GradTape::exp(ValueId a) {
  Node n;
  n.op = Op::kExp;
  n.value = pgprec::map_exp(node(a).value);
  n.inputs = {a.index};
  n.requires_grad = node(a).requires_grad;
  return {push(std::move(n))};
}

const Tensor& GradTape::value(ValueId id) const { return node(id).value; }

bool GradTape::requires_grad(ValueId id) const { return node(id).requires_grad; }

void GradTape::accumulate(int index, const Tensor& g) {
  if (!nodes_[index].requires_grad) return;
  if (grads_[index].empty() && grads_[index].rows() == 0) {
    grads_[index] = g;
  } else {
    grads_[index] = pgprec::add(grads_[index], g);
  }
}

Tensor GradTape::grad(ValueId id) const {
  const Node& n = node(id);
  if (id.index < static_cast<int>(grads_.size()) && !grads_[id.index].empty()) {
    return grads_[id.index];
  }
  return Tensor(n.value.rows(), n.value.cols());
}

void GradTape::backward(ValueId loss) {
  const Node& ln = node(loss);
  if (ln.value.rows() != 1 || ln.value.cols() != 1) {
    throw ContractError("backward requires a scalar loss node");
  }
  grads_.assign(nodes_.size(), Tensor());
  if (!ln.requires_grad) return;  // loss does not touch any trainable leaf
  grads_[loss.index] = Tensor(1, 1, {1.0});

  for (int i = loss.index; i >= 0; --i) {
    const Node& n = nodes_[i];
    if (!n.requires_grad || grads_[i].empty()) continue;
    const Tensor& g = grads_[i];
    switch (n.op) {
      case Op::kLeaf:
        break;
      case Op::kMatMul: {
        const Tensor& a = nodes_[n.inputs[0]].value;
        const Tensor& b = nodes_[n.inputs[1]].value;
        if (nodes_[n.inputs[0]].requires_grad) {
          Tensor da = pgprec::matmul(g, b, false, !n.trans_b);
          if (n.trans_a) da = transpose(da);
          accumulate(n.inputs[0], da);
        }
        if (nodes_[n.inputs[1]].requires_grad) {
          Tensor db = pgprec::matmul(a, g, !n.trans_a, false);
          if (n.trans_b) db = transpose(db);
          accumulate(n.inputs[1], db);
        }
        break;
      }
      case Op::kAdd:
        accumulate(n.inputs[0], g);
        accumulate(n.inputs[1], g);
        break;
      case Op::kScale:
        accumulate(n.inputs[0], pgprec::scale(g, n.scalar));
        break;
      case Op::kRowSoftmax: {
        const Tensor& y = n.value;
        Tensor dx(y.rows(), y.cols());
        for (int r = 0; r < y.rows(); ++r) {
          double inner = 0.0;
          for (int c = 0; c < y.cols(); ++c) inner += g.at(r, c) * y.at(r, c);
          for (int c = 0; c < y.cols(); ++c) {
            dx.at(r, c) = y.at(r, c) * (g.at(r, c) - inner);
          }
        }
        accumulate(n.inputs[0], dx);
        break;
      }
      case Op::kSigmoid: {
        const Tensor& y = n.value;
        Tensor dx = g;
        for (std::size_t k = 0; k < dx.size(); ++k) {
          const double s = y.values()[k];
          dx.values()[k] *= s * (1.0 - s);
        }
        accumulate(n.inputs[0], dx);
        break;
      }
      case Op::kLog: {
        const Tensor& x = nodes_[n.inputs[0]].value;
        Tensor dx = g;
        for (std::size_t k = 0; k < dx.size(); ++k) dx.values()[k] /= x.values()[k];
        accumulate(n.inputs[0], dx);
        break;
      }
      case Op::kExp: {
        Tensor dx = g;
        for (std::size_t k = 0; k < dx.size(); ++k) dx.values()[k] *= n.value.values()[k];
        accumulate(n.inputs[0], dx);
        break;
      }
      case Op::kDot: {
        const double s = g.at(0, 0);
        const Tensor& a = nodes_[n.inputs[0]].value;
        const Tensor& b = nodes_[n.inputs[1]].value;
        if (nodes_[n.inputs[0]].requires_grad) {
          Tensor da(a.rows(), a.cols(), b.values());
          accumulate(n.inputs[0], pgprec::scale(da, s));
        }
        if (nodes_[n.inputs[1]].requires_grad) {
          Tensor db(b.rows(), b.cols(), a.values());
          accumulate(n.inputs[1], pgprec::scale(db, s));
        }
        break;
      }
      case Op::kSum: {
        const Tensor& a = nodes_[n.inputs[0]].value;
        accumulate(n.inputs[0], Tensor::full(a.rows(), a.cols(), g.at(0, 0)));
        break;
      }
      case Op::kConcatRows: {
        int row = 0;
        for (std::size_t p = 0; p < n.inputs.size(); ++p) {
          const int part_rows = n.row_ids[p];
          if (part_rows > 0 && nodes_[n.inputs[p]].requires_grad) {
            Tensor dp(part_rows, g.cols());
            for (int r = 0; r < part_rows; ++r) {
              std::copy(g.row(row + r).begin(), g.row(row + r).end(), dp.row(r).begin());
            }
            accumulate(n.inputs[p], dp);
          }
          row += part_rows;
        }
        break;
      }
      case Op::kGatherRows: {
        const Tensor& m = nodes_[n.inputs[0]].value;
        Tensor dm(m.rows(), m.cols());
        for (std::size_t r = 0; r < n.row_ids.size(); ++r) {
          const int src = n.row_ids[r];
          for (int c = 0; c < g.cols(); ++c) {
            dm.at(src, c) += g.at(static_cast<int>(r), c);
          }
        }
        accumulate(n.inputs[0], dm);
        break;
      }
    }
  }
}

}  // namespace pgprec
