#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cqg/errors.hpp"

namespace cqg {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& s);
std::string shape_str(const Shape& s);

class Tape;

/// Dense float64 tensor with row-major data and value semantics.
///
/// A Tensor is either detached (a plain value) or recorded on a Tape, in
/// which case it carries the id of the node that produced it. Primitives
/// applied to at least one recorded input are recorded; applied to detached
/// inputs only, they evaluate eagerly and return a detached result.
class Tensor {
public:
  Tensor() : data_(std::make_shared<std::vector<double>>()) {}
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double v);
  static Tensor zeros(const Shape& shape);
  static Tensor full(const Shape& shape, double v);

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_->size(); }
  const std::vector<double>& data() const { return *data_; }
  double at(std::size_t i) const { return (*data_)[i]; }
  /// Value of a one-element tensor.
  double value() const;

  bool recorded() const { return tape_ != nullptr; }
  Tape* tape() const { return tape_; }
  int node() const { return node_; }

private:
  friend class Tape;
  Shape shape_{};
  std::shared_ptr<const std::vector<double>> data_;
  Tape* tape_ = nullptr;
  int node_ = -1;
};

/// Primitive kernel kinds. Together with masked_softmax and reshape these
/// cover every expression the models build.
enum class OpKind {
  Matmul,
  Affine,
  Concat,
  Add,
  Hadamard,
  Tanh,
  Sigmoid,
  ReduceSum,
  EmbeddingLookup,
  NegLogPick,
  MaskedSoftmax,
  Reshape,
  Leaf,
};

/// Extra, non-tensor arguments for kinds that need them.
struct PrimitiveAux {
  std::size_t index = 0;        // EmbeddingLookup row / NegLogPick position
  std::vector<bool> mask;       // MaskedSoftmax
  Shape shape;                  // Reshape target
};

/// Append-only record of primitive applications for reverse-mode
/// differentiation. Nodes are stored in topological order by construction;
/// backward() visits each node exactly once, in reverse order.
class Tape {
public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Record an input tensor as a differentiable leaf. Leaves with the same
  /// non-empty key share one node (so reusing a parameter accumulates
  /// gradient in one slot).
  Tensor leaf(const Tensor& value, const std::string& key = "");

  /// Run reverse-mode accumulation from a scalar loss. Gradient slots are
  /// reset on each call.
  void backward(const Tensor& loss);

  /// Gradient of the last backward() w.r.t. a recorded tensor; zeros if the
  /// tensor was not on any path to the loss.
  Tensor grad(const Tensor& t) const;
  bool has_key(const std::string& key) const;
  Tensor grad_by_key(const std::string& key) const;

  std::size_t node_count() const { return nodes_.size(); }

private:
  friend Tensor apply_primitive(OpKind, std::span<const Tensor>, const PrimitiveAux&);

  struct Input {
    int node = -1;  // -1: constant baked into the record
    Shape shape;
    std::shared_ptr<const std::vector<double>> values;
  };
  struct Node {
    OpKind kind;
    std::vector<Input> inputs;
    Shape shape;
    std::shared_ptr<const std::vector<double>> values;
    PrimitiveAux aux;
  };

  Tensor record(OpKind kind, std::span<const Tensor> inputs, Shape out_shape,
                std::vector<double> out_values, PrimitiveAux aux);
  void accumulate(int node, const std::vector<double>& g);

  std::vector<Node> nodes_;
  std::vector<std::vector<double>> grads_;
  std::vector<std::pair<std::string, int>> keyed_;
};

// Primitive kernels. Shape errors raise ShapeError; bad indices raise
// IndexError. Add/Hadamard broadcast a one-element operand against any shape.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor affine(const Tensor& w, const Tensor& x, const Tensor& b);
Tensor concat(std::span<const Tensor> parts);
Tensor concat(std::initializer_list<Tensor> parts);
Tensor add(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor reduce_sum(const Tensor& x);
Tensor embedding_lookup(const Tensor& table, std::size_t row);
Tensor neg_log_pick(const Tensor& probs, std::size_t index);

/// Softmax over the positions where mask is true; exact zeros elsewhere.
/// At least one mask entry must be true (MaskError otherwise).
Tensor masked_softmax(const Tensor& logits, const std::vector<bool>& mask);

/// Identity view with a new shape (same element count, same data).
Tensor reshape(const Tensor& x, Shape shape);

/// Dispatch front-end over the primitive kinds.
Tensor apply_primitive(OpKind kind, std::span<const Tensor> inputs,
                       const PrimitiveAux& aux = {});

// Composites built from the primitives above.
Tensor one_minus(const Tensor& x);
/// Elementwise min via data-dependent constant selector masks; the gradient
/// is the usual subgradient of min.
Tensor emin(const Tensor& a, const Tensor& b);
/// One element of a vector as a [1] tensor (differentiable).
Tensor pick(const Tensor& vec, std::size_t i);
/// Stack equal-length vectors into a [rows, n] matrix.
Tensor stack_rows(std::span<const Tensor> rows);
/// weights [n] against rows [n, d] -> [d].
Tensor weighted_sum_rows(const Tensor& weights, const Tensor& rows);

/// Floor applied inside neg_log_pick before the log.
inline constexpr double kProbFloor = 1e-12;

}  // namespace cqg
