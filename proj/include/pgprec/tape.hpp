#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pgprec/tensor.hpp"

namespace pgprec {

// Handle into a GradTape node list.
struct ValueId {
  int index = -1;
  bool valid() const { return index >= 0; }
};

// Reverse-mode tape over a fixed primitive set: matmul (with transpose
// flags), add, scale, row softmax, sigmoid, log, dot, sum, row
// concatenation / row gather, and elementwise exp. Anything the encoder or
// the losses need must be phrased in these primitives, which keeps the
// backward pass small enough to audit by hand.
//
// Nodes only ever reference earlier nodes, so tape order is a topological
// order and backward() is a single reverse sweep that visits each node once.
// Gradients are only propagated along paths that reach a trainable leaf;
// frozen subgraphs cost nothing on the way back.
class GradTape {
 public:
  ValueId leaf(Tensor value, bool trainable = false);
  ValueId constant(Tensor value) { return leaf(std::move(value), false); }

  ValueId matmul(ValueId a, ValueId b, bool trans_a = false, bool trans_b = false);
  ValueId add(ValueId a, ValueId b);
  ValueId scale(ValueId a, double factor);
  ValueId row_softmax(ValueId a);
  ValueId sigmoid(ValueId a);
  ValueId log(ValueId a);
  ValueId dot(ValueId a, ValueId b);  // 1x1 result over flattened inputs
  ValueId sum(ValueId a);             // 1x1 result
  ValueId concat_rows(std::span<const ValueId> parts);
  ValueId gather_rows(ValueId m, std::vector<int> row_ids);
  ValueId exp(ValueId a);

  const Tensor& value(ValueId id) const;
  bool requires_grad(ValueId id) const;
  std::size_t node_count() const { return nodes_.size(); }

  // Seeds d(loss)/d(loss) = 1 and sweeps the tape once in reverse.
  // `loss` must be a 1x1 node.
  void backward(ValueId loss);

  // Gradient accumulated for `id` by the last backward(); zeros if the node
  // was not reached (or does not require gradients).
  Tensor grad(ValueId id) const;

 private:
  enum class Op {
    kLeaf,
    kMatMul,
    kAdd,
    kScale,
    kRowSoftmax,
    kSigmoid,
    kLog,
    kDot,
    kSum,
    kConcatRows,
    kGatherRows,
    kExp,
  };

  struct Node {
    Op op = Op::kLeaf;
    Tensor value;
    std::vector<int> inputs;
    bool requires_grad = false;
    bool trans_a = false;
    bool trans_b = false;
    double scalar = 0.0;
    std::vector<int> row_ids;  // gather indices / concat part row counts
  };

  int push(Node node);
  const Node& node(ValueId id) const;
  void accumulate(int index, const Tensor& g);

  std::vector<Node> nodes_;
  std::vector<Tensor> grads_;  // parallel to nodes_, empty = zero
};

}  // namespace pgprec
