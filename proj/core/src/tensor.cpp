#include "cqg/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace cqg {

std::size_t shape_size(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t d : s) n *= d;
  return n;
}

std::string shape_str(const Shape& s) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << "]";
  return os.str();
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)),
      data_(std::make_shared<std::vector<double>>(std::move(data))) {
  for (std::size_t d : shape_) {
    if (d == 0) throw ShapeError("zero dimension in shape " + shape_str(shape_));
  }
  if (shape_size(shape_) != data_->size()) {
    throw ShapeError("shape " + shape_str(shape_) + " does not match " +
                     std::to_string(data_->size()) + " values");
  }
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::zeros(const Shape& shape) {
  return Tensor(shape, std::vector<double>(shape_size(shape), 0.0));
}

Tensor Tensor::full(const Shape& shape, double v) {
  return Tensor(shape, std::vector<double>(shape_size(shape), v));
}

double Tensor::value() const {
  if (size() != 1) throw ShapeError("value() on a tensor of size " + std::to_string(size()));
  return (*data_)[0];
}

// ---------------------------------------------------------------------------
// Forward kernels (shared by eager and recorded paths).

namespace {

struct Evaluated {
  Shape shape;
  std::vector<double> values;
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw ShapeError(msg);
}

Evaluated eval_matmul(const Tensor& a, const Tensor& b) {
  require(a.shape().size() == 2 && b.shape().size() == 2,
          "matmul expects rank-2 operands, got " + shape_str(a.shape()) + " x " +
              shape_str(b.shape()));
  const std::size_t m = a.shape()[0], k = a.shape()[1], k2 = b.shape()[0], n = b.shape()[1];
  require(k == k2, "matmul inner dims differ: " + shape_str(a.shape()) + " x " +
                       shape_str(b.shape()));
  std::vector<double> out(m * n, 0.0);
  const auto& av = a.data();
  const auto& bv = b.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = av[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = bv.data() + p * n;
      double* orow = out.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  return {{m, n}, std::move(out)};
}

Evaluated eval_affine(const Tensor& w, const Tensor& x, const Tensor& b) {
  require(w.shape().size() == 2 && x.shape().size() == 1 && b.shape().size() == 1,
          "affine expects W[m,n], x[n], b[m]");
  const std::size_t m = w.shape()[0], n = w.shape()[1];
  require(x.shape()[0] == n && b.shape()[0] == m,
          "affine dims: W" + shape_str(w.shape()) + " x" + shape_str(x.shape()) +
              " b" + shape_str(b.shape()));
  std::vector<double> out(b.data());
  const auto& wv = w.data();
  const auto& xv = x.data();
  for (std::size_t i = 0; i < m; ++i) {
    double acc = 0.0;
    const double* wrow = wv.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) acc += wrow[j] * xv[j];
    out[i] += acc;
  }
  return {{m}, std::move(out)};
}

Evaluated eval_concat(std::span<const Tensor> parts) {
  require(!parts.empty(), "concat of zero tensors");
  std::size_t total = 0;
  for (const Tensor& t : parts) {
    require(t.shape().size() == 1, "concat expects rank-1 parts");
    total += t.size();
  }
  std::vector<double> out;
  out.reserve(total);
  for (const Tensor& t : parts) out.insert(out.end(), t.data().begin(), t.data().end());
  return {{total}, std::move(out)};
}

bool broadcast_compatible(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() || a.size() == 1 || b.size() == 1;
}

Evaluated eval_add(const Tensor& a, const Tensor& b) {
  require(broadcast_compatible(a, b),
          "add shapes " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  const Tensor& big = a.size() >= b.size() ? a : b;
  const Tensor& small = a.size() >= b.size() ? b : a;
  std::vector<double> out(big.data());
  if (small.size() == 1 && big.size() != 1) {
    const double s = small.at(0);
    for (double& v : out) v += s;
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += small.at(i);
  }
  return {big.shape(), std::move(out)};
}

Evaluated eval_hadamard(const Tensor& a, const Tensor& b) {
  require(broadcast_compatible(a, b),
          "hadamard shapes " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  const Tensor& big = a.size() >= b.size() ? a : b;
  const Tensor& small = a.size() >= b.size() ? b : a;
  std::vector<double> out(big.data());
  if (small.size() == 1 && big.size() != 1) {
    const double s = small.at(0);
    for (double& v : out) v *= s;
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= small.at(i);
  }
  return {big.shape(), std::move(out)};
}

Evaluated eval_tanh(const Tensor& x) {
  std::vector<double> out(x.data());
  for (double& v : out) v = std::tanh(v);
  return {x.shape(), std::move(out)};
}

Evaluated eval_sigmoid(const Tensor& x) {
  std::vector<double> out(x.data());
  for (double& v : out) v = 1.0 / (1.0 + std::exp(-v));
  return {x.shape(), std::move(out)};
}

Evaluated eval_reduce_sum(const Tensor& x) {
  double acc = 0.0;
  for (double v : x.data()) acc += v;
  return {{1}, {acc}};
}

Evaluated eval_lookup(const Tensor& table, std::size_t row) {
  require(table.shape().size() == 2, "embedding_lookup expects a rank-2 table");
  const std::size_t rows = table.shape()[0], cols = table.shape()[1];
  if (row >= rows) {
    throw IndexError("lookup row " + std::to_string(row) + " out of range " +
                     std::to_string(rows));
  }
  std::vector<double> out(table.data().begin() + row * cols,
                          table.data().begin() + (row + 1) * cols);
  return {{cols}, std::move(out)};
}

Evaluated eval_neg_log_pick(const Tensor& p, std::size_t index) {
  require(p.shape().size() == 1, "neg_log_pick expects a rank-1 distribution");
  if (index >= p.size()) {
    throw IndexError("pick index " + std::to_string(index) + " out of range " +
                     std::to_string(p.size()));
  }
  return {{1}, {-std::log(std::max(p.at(index), kProbFloor))}};
}

Evaluated eval_masked_softmax(const Tensor& logits, const std::vector<bool>& mask) {
  require(logits.shape().size() == 1, "masked_softmax expects rank-1 logits");
  if (mask.size() != logits.size()) {
    throw ShapeError("mask length " + std::to_string(mask.size()) +
                     " vs logits length " + std::to_string(logits.size()));
  }
  double mx = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) {
      any = true;
      mx = std::max(mx, logits.at(i));
    }
  }
  if (!any) throw MaskError("masked_softmax over an all-false mask");
  std::vector<double> out(logits.size(), 0.0);
  double z = 0.0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) {
      out[i] = std::exp(logits.at(i) - mx);
      z += out[i];
    }
  }
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out[i] /= z;
  }
  return {logits.shape(), std::move(out)};
}

Evaluated eval(OpKind kind, std::span<const Tensor> in, const PrimitiveAux& aux) {
  switch (kind) {
    case OpKind::Matmul: return eval_matmul(in[0], in[1]);
    case OpKind::Affine: return eval_affine(in[0], in[1], in[2]);
    case OpKind::Concat: return eval_concat(in);
    case OpKind::Add: return eval_add(in[0], in[1]);
    case OpKind::Hadamard: return eval_hadamard(in[0], in[1]);
    case OpKind::Tanh: return eval_tanh(in[0]);
    case OpKind::Sigmoid: return eval_sigmoid(in[0]);
    case OpKind::ReduceSum: return eval_reduce_sum(in[0]);
    case OpKind::EmbeddingLookup: return eval_lookup(in[0], aux.index);
    case OpKind::NegLogPick: return eval_neg_log_pick(in[0], aux.index);
    case OpKind::MaskedSoftmax: return eval_masked_softmax(in[0], aux.mask);
    case OpKind::Reshape: {
      if (shape_size(aux.shape) != in[0].size()) {
        throw ShapeError("reshape to " + shape_str(aux.shape) + " from " +
                         shape_str(in[0].shape()));
      }
      return {aux.shape, in[0].data()};
    }
    case OpKind::Leaf: break;
  }
  throw ShapeError("apply_primitive: not an applicable kind");
}

std::size_t arity_check(OpKind kind, std::size_t n) {
  switch (kind) {
    case OpKind::Matmul:
    case OpKind::Add:
    case OpKind::Hadamard:
      return 2;
    case OpKind::Affine:
      return 3;
    case OpKind::Concat:
      return n >= 1 ? n : 1;
    default:
      return 1;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Tape

Tensor Tape::record(OpKind kind, std::span<const Tensor> inputs, Shape out_shape,
                    std::vector<double> out_values, PrimitiveAux aux) {
  Node node;
  node.kind = kind;
  node.inputs.reserve(inputs.size());
  for (const Tensor& t : inputs) {
    if (t.recorded() && t.tape() != this) {
      throw ShapeError("inputs recorded on different tapes");
    }
    node.inputs.push_back({t.recorded() ? t.node() : -1, t.shape(), t.data_});
  }
  node.shape = std::move(out_shape);
  node.values = std::make_shared<const std::vector<double>>(std::move(out_values));
  node.aux = std::move(aux);
  nodes_.push_back(std::move(node));

  Tensor out;
  out.shape_ = nodes_.back().shape;
  out.data_ = nodes_.back().values;
  out.tape_ = this;
  out.node_ = static_cast<int>(nodes_.size()) - 1;
  return out;
}

Tensor Tape::leaf(const Tensor& value, const std::string& key) {
  if (!key.empty()) {
    for (const auto& [k, id] : keyed_) {
      if (k == key) {
        Tensor out;
        out.shape_ = nodes_[id].shape;
        out.data_ = nodes_[id].values;
        out.tape_ = this;
        out.node_ = id;
        return out;
      }
    }
  }
  Tensor out = record(OpKind::Leaf, {}, value.shape(), value.data(), {});
  if (!key.empty()) keyed_.emplace_back(key, out.node());
  return out;
}

void Tape::accumulate(int node, const std::vector<double>& g) {
  auto& slot = grads_[node];
  if (slot.empty()) slot.assign(shape_size(nodes_[node].shape), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) slot[i] += g[i];
}

void Tape::backward(const Tensor& loss) {
  if (!loss.recorded() || loss.tape() != this) {
    throw ShapeError("backward: loss is not recorded on this tape");
  }
  if (loss.size() != 1) {
    throw ShapeError("backward: loss must be scalar, got " + shape_str(loss.shape()));
  }
  grads_.assign(nodes_.size(), {});
  grads_[loss.node()] = {1.0};

  for (int id = loss.node(); id >= 0; --id) {
    const Node& nd = nodes_[id];
    const auto& g = grads_[id];
    if (g.empty()) continue;
    const auto& out = *nd.values;

    auto in_vals = [&](std::size_t i) -> const std::vector<double>& {
      return *nd.inputs[i].values;
    };
    auto push = [&](std::size_t i, const std::vector<double>& gi) {
      if (nd.inputs[i].node >= 0) accumulate(nd.inputs[i].node, gi);
    };
    auto reduce_to = [&](std::size_t i, const std::vector<double>& gfull) {
      // Gradient of a broadcast one-element operand is the sum over the output.
      if (shape_size(nd.inputs[i].shape) == 1 && gfull.size() != 1) {
        double s = 0.0;
        for (double v : gfull) s += v;
        push(i, {s});
      } else {
        push(i, gfull);
      }
    };

    switch (nd.kind) {
      case OpKind::Leaf:
        break;
      case OpKind::Matmul: {
        const std::size_t m = nd.inputs[0].shape[0], k = nd.inputs[0].shape[1],
                          n = nd.inputs[1].shape[1];
        const auto& av = in_vals(0);
        const auto& bv = in_vals(1);
        if (nd.inputs[0].node >= 0) {
          std::vector<double> ga(m * k, 0.0);
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) {
              const double gij = g[i * n + j];
              if (gij == 0.0) continue;
              for (std::size_t p = 0; p < k; ++p) ga[i * k + p] += gij * bv[p * n + j];
            }
          push(0, ga);
        }
        if (nd.inputs[1].node >= 0) {
          std::vector<double> gb(k * n, 0.0);
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < k; ++p) {
              const double aip = av[i * k + p];
              if (aip == 0.0) continue;
              for (std::size_t j = 0; j < n; ++j) gb[p * n + j] += aip * g[i * n + j];
            }
          push(1, gb);
        }
        break;
      }
      case OpKind::Affine: {
        const std::size_t m = nd.inputs[0].shape[0], n = nd.inputs[0].shape[1];
        const auto& wv = in_vals(0);
        const auto& xv = in_vals(1);
        if (nd.inputs[0].node >= 0) {
          std::vector<double> gw(m * n, 0.0);
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) gw[i * n + j] = g[i] * xv[j];
          push(0, gw);
        }
        if (nd.inputs[1].node >= 0) {
          std::vector<double> gx(n, 0.0);
          for (std::size_t i = 0; i < m; ++i) {
            const double gi = g[i];
            if (gi == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) gx[j] += wv[i * n + j] * gi;
          }
          push(1, gx);
        }
        push(2, g);
        break;
      }
      case OpKind::Concat: {
        std::size_t off = 0;
        for (std::size_t i = 0; i < nd.inputs.size(); ++i) {
          const std::size_t len = shape_size(nd.inputs[i].shape);
          if (nd.inputs[i].node >= 0) {
            push(i, std::vector<double>(g.begin() + off, g.begin() + off + len));
          }
          off += len;
        }
        break;
      }
      case OpKind::Add: {
        reduce_to(0, g);
        reduce_to(1, g);
        break;
      }
      case OpKind::Hadamard: {
        auto side = [&](std::size_t i, std::size_t other) {
          if (nd.inputs[i].node < 0) return;
          const auto& ov = in_vals(other);
          std::vector<double> gi(g.size());
          if (ov.size() == 1) {
            for (std::size_t t = 0; t < g.size(); ++t) gi[t] = g[t] * ov[0];
          } else if (g.size() == 1 && shape_size(nd.inputs[i].shape) == 1) {
            // both scalar
            gi[0] = g[0] * ov[0];
          } else {
            for (std::size_t t = 0; t < g.size(); ++t) gi[t] = g[t] * ov[t];
          }
          reduce_to(i, gi);
        };
        side(0, 1);
        side(1, 0);
        break;
      }
      case OpKind::Tanh: {
        std::vector<double> gx(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] = g[i] * (1.0 - out[i] * out[i]);
        push(0, gx);
        break;
      }
      case OpKind::Sigmoid: {
        std::vector<double> gx(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] = g[i] * out[i] * (1.0 - out[i]);
        push(0, gx);
        break;
      }
      case OpKind::ReduceSum: {
        if (nd.inputs[0].node >= 0) {
          push(0, std::vector<double>(shape_size(nd.inputs[0].shape), g[0]));
        }
        break;
      }
      case OpKind::EmbeddingLookup: {
        if (nd.inputs[0].node >= 0) {
          const std::size_t cols = nd.inputs[0].shape[1];
          std::vector<double> gt(shape_size(nd.inputs[0].shape), 0.0);
          for (std::size_t j = 0; j < cols; ++j) gt[nd.aux.index * cols + j] = g[j];
          push(0, gt);
        }
        break;
      }
      case OpKind::NegLogPick: {
        if (nd.inputs[0].node >= 0) {
          const auto& pv = in_vals(0);
          std::vector<double> gp(pv.size(), 0.0);
          if (pv[nd.aux.index] > kProbFloor) {
            gp[nd.aux.index] = -g[0] / pv[nd.aux.index];
          }
          push(0, gp);
        }
        break;
      }
      case OpKind::MaskedSoftmax: {
        if (nd.inputs[0].node >= 0) {
          double dot = 0.0;
          for (std::size_t i = 0; i < out.size(); ++i) {
            if (nd.aux.mask[i]) dot += g[i] * out[i];
          }
          std::vector<double> gl(out.size(), 0.0);
          for (std::size_t i = 0; i < out.size(); ++i) {
            if (nd.aux.mask[i]) gl[i] = out[i] * (g[i] - dot);
          }
          push(0, gl);
        }
        break;
      }
      case OpKind::Reshape:
        push(0, g);
        break;
    }
  }
}

Tensor Tape::grad(const Tensor& t) const {
  if (!t.recorded() || t.tape() != this) {
    throw ShapeError("grad: tensor is not recorded on this tape");
  }
  if (grads_.empty()) throw ShapeError("grad: backward() has not run");
  const auto& slot = grads_[t.node()];
  if (slot.empty()) return Tensor::zeros(t.shape());
  return Tensor(t.shape(), slot);
}

bool Tape::has_key(const std::string& key) const {
  for (const auto& [k, id] : keyed_) {
    if (k == key) return true;
  }
  return false;
}

Tensor Tape::grad_by_key(const std::string& key) const {
  for (const auto& [k, id] : keyed_) {
    if (k == key) {
      if (grads_.empty()) throw ShapeError("grad: backward() has not run");
      const auto& slot = grads_[id];
      if (slot.empty()) return Tensor::zeros(nodes_[id].shape);
      return Tensor(nodes_[id].shape, slot);
    }
  }
  throw IndexError("no leaf recorded under key '" + key + "'");
}

// ---------------------------------------------------------------------------
// Primitive entry points

Tensor apply_primitive(OpKind kind, std::span<const Tensor> inputs,
                       const PrimitiveAux& aux) {
  if (kind == OpKind::Leaf) throw ShapeError("apply_primitive: Leaf is not applicable");
  if (kind != OpKind::Concat && inputs.size() != arity_check(kind, inputs.size())) {
    throw ShapeError("wrong number of inputs for primitive");
  }
  Evaluated ev = eval(kind, inputs, aux);
  Tape* tape = nullptr;
  for (const Tensor& t : inputs) {
    if (t.recorded()) {
      if (tape && t.tape() != tape) throw ShapeError("inputs recorded on different tapes");
      tape = t.tape();
    }
  }
  if (!tape) return Tensor(std::move(ev.shape), std::move(ev.values));
  return tape->record(kind, inputs, std::move(ev.shape), std::move(ev.values), aux);
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  const Tensor in[] = {a, b};
  return apply_primitive(OpKind::Matmul, in);
}
Tensor affine(const Tensor& w, const Tensor& x, const Tensor& b) {
  const Tensor in[] = {w, x, b};
  return apply_primitive(OpKind::Affine, in);
}
Tensor concat(std::span<const Tensor> parts) {
  return apply_primitive(OpKind::Concat, parts);
}
Tensor concat(std::initializer_list<Tensor> parts) {
  return concat(std::span<const Tensor>(parts.begin(), parts.size()));
}
Tensor add(const Tensor& a, const Tensor& b) {
  const Tensor in[] = {a, b};
  return apply_primitive(OpKind::Add, in);
}
Tensor hadamard(const Tensor& a, const Tensor& b) {
  const Tensor in[] = {a, b};
  return apply_primitive(OpKind::Hadamard, in);
}
Tensor tanh(const Tensor& x) {
  const Tensor in[] = {x};
  return apply_primitive(OpKind::Tanh, in);
}
Tensor sigmoid(const Tensor& x) {
  const Tensor in[] = {x};
  return apply_primitive(OpKind::Sigmoid, in);
}
Tensor reduce_sum(const Tensor& x) {
  const Tensor in[] = {x};
  return apply_primitive(OpKind::ReduceSum, in);
}
Tensor embedding_lookup(const Tensor& table, std::size_t row) {
  const Tensor in[] = {table};
  PrimitiveAux aux;
  aux.index = row;
  return apply_primitive(OpKind::EmbeddingLookup, in, aux);
}
Tensor neg_log_pick(const Tensor& probs, std::size_t index) {
  const Tensor in[] = {probs};
  PrimitiveAux aux;
  aux.index = index;
  return apply_primitive(OpKind::NegLogPick, in, aux);
}
Tensor masked_softmax(const Tensor& logits, const std::vector<bool>& mask) {
  const Tensor in[] = {logits};
  PrimitiveAux aux;
  aux.mask = mask;
  return apply_primitive(OpKind::MaskedSoftmax, in, aux);
}
Tensor reshape(const Tensor& x, Shape shape) {
  const Tensor in[] = {x};
  PrimitiveAux aux;
  aux.shape = std::move(shape);
  return apply_primitive(OpKind::Reshape, in, aux);
}

Tensor one_minus(const Tensor& x) {
  return add(Tensor::full(x.shape(), 1.0), hadamard(Tensor::scalar(-1.0), x));
}

Tensor emin(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw ShapeError("emin shapes " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  std::vector<double> pick_a(a.size()), pick_b(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool aless = a.at(i) < b.at(i);
    pick_a[i] = aless ? 1.0 : 0.0;
    pick_b[i] = aless ? 0.0 : 1.0;
  }
  return add(hadamard(a, Tensor(a.shape(), pick_a)), hadamard(b, Tensor(b.shape(), pick_b)));
}

Tensor pick(const Tensor& vec, std::size_t i) {
  if (vec.shape().size() != 1) throw ShapeError("pick expects a rank-1 tensor");
  return embedding_lookup(reshape(vec, {vec.size(), 1}), i);
}

Tensor stack_rows(std::span<const Tensor> rows) {
  if (rows.empty()) throw ShapeError("stack_rows of zero tensors");
  const std::size_t n = rows[0].size();
  for (const Tensor& r : rows) {
    if (r.shape().size() != 1 || r.size() != n) {
      throw ShapeError("stack_rows expects equal-length vectors");
    }
  }
  return reshape(concat(rows), {rows.size(), n});
}

Tensor weighted_sum_rows(const Tensor& weights, const Tensor& rows) {
  if (weights.shape().size() != 1 || rows.shape().size() != 2 ||
      weights.size() != rows.shape()[0]) {
    throw ShapeError("weighted_sum_rows: weights " + shape_str(weights.shape()) +
                     " rows " + shape_str(rows.shape()));
  }
  return reshape(matmul(reshape(weights, {1, weights.size()}), rows), {rows.shape()[1]});
}

}  // namespace cqg
