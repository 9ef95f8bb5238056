#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "errors.hpp"
#include "tensor.hpp"

namespace cspan {

// Node handle into a Graph tape.
struct NodeId {
  int v = -1;
  bool valid() const { return v >= 0; }
};

enum class Op {
  kConst,
  kLeaf,
  kMatmul,
  kAdd,
  kAddBias,    // matrix + row vector, broadcast over rows
  kAddScalar,  // tensor + scalar node, broadcast
  kSub,
  kNeg,
  kMul,       // elementwise
  kScale,     // multiply by compile-time constant
  kAddConst,  // add compile-time constant
  kTanh,
  kSigmoid,
  kRelu,
  kLog,
  kClampMin,
  kSoftmax,  // vector
  kSum,      // full reduction to scalar
  kConcat,   // vectors -> vector
  kConcatCols,
  kStackRows,
  kSlice,  // vector range
  kRow,
  kGather,      // vector elements by index
  kGatherRows,  // matrix rows by index
  kColMax,      // per-column max over rows
};

// Dynamic tape: ops evaluate eagerly on creation, so the node order is a
// topological order by construction. backward() walks it in reverse.
// Reductions (matmul, sum, bias backward, softmax normalization) accumulate
// in double regardless of the storage type T.
template <typename T>
class Graph {
 public:
  using Ten = TensorT<T>;

  struct Node {
    Op op;
    std::vector<int> in;
    Ten val;
    Ten grad;
    bool needs_grad = false;
    std::vector<int> iaux;
    double faux = 0.0;
  };

  NodeId constant(Ten v) { return push(Op::kConst, {}, std::move(v), false); }

  NodeId leaf(Ten v) { return push(Op::kLeaf, {}, std::move(v), true); }

  NodeId matmul(NodeId a, NodeId b) {
    const Ten& A = val(a);
    const Ten& B = val(b);
    int m, k, k2, n;
    mm_dims(A, B, m, k, k2, n);
    if (k != k2)
      throw DataError("matmul inner dimension mismatch: " + A.shape_str() + " vs " + B.shape_str());
    Ten out;
    if (A.rank() == 1 && B.rank() == 1)
      out = Ten::scalar(T(0));
    else if (A.rank() == 1)
      out = Ten::zeros({n});
    else if (B.rank() == 1)
      out = Ten::zeros({m});
    else
      out = Ten::zeros({m, n});
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int t = 0; t < k; ++t)
          acc += static_cast<double>(A.data[static_cast<std::size_t>(i) * k + t]) *
                 static_cast<double>(B.data[static_cast<std::size_t>(t) * n + j]);
        out.data[static_cast<std::size_t>(i) * n + j] = static_cast<T>(acc);
      }
    return push(Op::kMatmul, {a.v, b.v}, std::move(out));
  }

  NodeId add(NodeId a, NodeId b) {
    const Ten& A = val(a);
    const Ten& B = val(b);
    if (!A.same_shape(B))
      throw DataError("add shape mismatch: " + A.shape_str() + " vs " + B.shape_str());
    Ten out = A;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += B.data[i];
    return push(Op::kAdd, {a.v, b.v}, std::move(out));
  }

  NodeId add_bias(NodeId m, NodeId bias) {
    const Ten& A = val(m);
    const Ten& B = val(bias);
    if (A.rank() != 2 || B.rank() != 1 || A.cols() != B.dim(0))
      throw DataError("add_bias expects (r x c) + (c): " + A.shape_str() + " vs " + B.shape_str());
    Ten out = A;
    for (int r = 0; r < A.rows(); ++r)
      for (int c = 0; c < A.cols(); ++c) out.at(r, c) += B.at(c);
    return push(Op::kAddBias, {m.v, bias.v}, std::move(out));
  }

  NodeId add_scalar(NodeId a, NodeId s) {
    const Ten& A = val(a);
    const Ten& S = val(s);
    if (S.rank() != 0) throw DataError("add_scalar expects a scalar second operand");
    Ten out = A;
    for (auto& v : out.data) v += S.data[0];
    return push(Op::kAddScalar, {a.v, s.v}, std::move(out));
  }

  NodeId sub(NodeId a, NodeId b) {
    const Ten& A = val(a);
    const Ten& B = val(b);
    if (!A.same_shape(B))
      throw DataError("sub shape mismatch: " + A.shape_str() + " vs " + B.shape_str());
    Ten out = A;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= B.data[i];
    return push(Op::kSub, {a.v, b.v}, std::move(out));
  }

  NodeId neg(NodeId a) {
    Ten out = val(a);
    for (auto& v : out.data) v = -v;
    return push(Op::kNeg, {a.v}, std::move(out));
  }

  NodeId mul(NodeId a, NodeId b) {
    const Ten& A = val(a);
    const Ten& B = val(b);
    if (!A.same_shape(B))
      throw DataError("mul shape mismatch: " + A.shape_str() + " vs " + B.shape_str());
    Ten out = A;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= B.data[i];
    return push(Op::kMul, {a.v, b.v}, std::move(out));
  }

  NodeId scale(NodeId a, double c) {
    Ten out = val(a);
    for (auto& v : out.data) v = static_cast<T>(static_cast<double>(v) * c);
    NodeId id = push(Op::kScale, {a.v}, std::move(out));
    node(id).faux = c;
    return id;
  }

  NodeId add_const(NodeId a, double c) {
    Ten out = val(a);
    for (auto& v : out.data) v = static_cast<T>(static_cast<double>(v) + c);
    NodeId id = push(Op::kAddConst, {a.v}, std::move(out));
    node(id).faux = c;
    return id;
  }

  NodeId tanh(NodeId a) {
    Ten out = val(a);
    for (auto& v : out.data) v = static_cast<T>(std::tanh(static_cast<double>(v)));
    return push(Op::kTanh, {a.v}, std::move(out));
  }

  NodeId sigmoid(NodeId a) {
    Ten out = val(a);
    for (auto& v : out.data) v = static_cast<T>(sigmoid_d(static_cast<double>(v)));
    return push(Op::kSigmoid, {a.v}, std::move(out));
  }

  NodeId relu(NodeId a) {
    Ten out = val(a);
    for (auto& v : out.data) v = v > T(0) ? v : T(0);
    return push(Op::kRelu, {a.v}, std::move(out));
  }

  NodeId log(NodeId a) {
    Ten out = val(a);
    for (auto& v : out.data) {
      double x = static_cast<double>(v);
      if (!(x > 0.0)) throw NumericError("log of non-positive value");
      v = static_cast<T>(std::log(x));
    }
    return push(Op::kLog, {a.v}, std::move(out));
  }

  NodeId clamp_min(NodeId a, double floor) {
    Ten out = val(a);
    for (auto& v : out.data)
      if (static_cast<double>(v) < floor) v = static_cast<T>(floor);
    NodeId id = push(Op::kClampMin, {a.v}, std::move(out));
    node(id).faux = floor;
    return id;
  }

  NodeId softmax(NodeId a) {
    const Ten& A = val(a);
    if (A.rank() != 1 || A.size() == 0) throw DataError("softmax expects a non-empty vector");
    for (T v : A.data)
      if (!std::isfinite(static_cast<double>(v))) throw NumericError("softmax input not finite");
    Ten out = A;
    double mx = -std::numeric_limits<double>::infinity();
    for (T v : A.data) mx = std::max(mx, static_cast<double>(v));
    double denom = 0.0;
    std::vector<double> ex(A.size());
    for (std::size_t i = 0; i < A.size(); ++i) {
      ex[i] = std::exp(static_cast<double>(A.data[i]) - mx);
      denom += ex[i];
    }
    for (std::size_t i = 0; i < A.size(); ++i) out.data[i] = static_cast<T>(ex[i] / denom);
    return push(Op::kSoftmax, {a.v}, std::move(out));
  }

  NodeId sum(NodeId a) {
    const Ten& A = val(a);
    double acc = 0.0;
    for (T v : A.data) acc += static_cast<double>(v);
    return push(Op::kSum, {a.v}, Ten::scalar(static_cast<T>(acc)));
  }

  NodeId concat(std::span<const NodeId> parts) {
    if (parts.empty()) throw DataError("concat of zero vectors");
    Ten out;
    std::vector<int> in;
    std::size_t total = 0;
    for (NodeId p : parts) {
      const Ten& v = val(p);
      if (v.rank() != 1) throw DataError("concat expects vectors, got " + v.shape_str());
      total += v.size();
      in.push_back(p.v);
    }
    out.shape = {static_cast<int>(total)};
    out.data.reserve(total);
    for (NodeId p : parts)
      out.data.insert(out.data.end(), val(p).data.begin(), val(p).data.end());
    return push(Op::kConcat, std::move(in), std::move(out));
  }

  NodeId concat(std::initializer_list<NodeId> parts) {
    std::vector<NodeId> v(parts);
    return concat(std::span<const NodeId>(v));
  }

  NodeId concat_cols(std::span<const NodeId> parts) {
    if (parts.empty()) throw DataError("concat_cols of zero matrices");
    int rows = val(parts[0]).rows();
    int cols = 0;
    std::vector<int> in;
    for (NodeId p : parts) {
      const Ten& m = val(p);
      if (m.rank() != 2 || m.rows() != rows)
        throw DataError("concat_cols row mismatch: " + m.shape_str());
      cols += m.cols();
      in.push_back(p.v);
    }
    Ten out = Ten::zeros({rows, cols});
    int off = 0;
    for (NodeId p : parts) {
      const Ten& m = val(p);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < m.cols(); ++c) out.at(r, off + c) = m.at(r, c);
      off += m.cols();
    }
    return push(Op::kConcatCols, std::move(in), std::move(out));
  }

  NodeId concat_cols(std::initializer_list<NodeId> parts) {
    std::vector<NodeId> v(parts);
    return concat_cols(std::span<const NodeId>(v));
  }

  NodeId stack_rows(std::span<const NodeId> rows) {
    if (rows.empty()) throw DataError("stack_rows of zero vectors");
    int width = val(rows[0]).dim(0);
    std::vector<int> in;
    for (NodeId r : rows) {
      const Ten& v = val(r);
      if (v.rank() != 1 || v.dim(0) != width)
        throw DataError("stack_rows width mismatch: " + v.shape_str());
      in.push_back(r.v);
    }
    Ten out = Ten::zeros({static_cast<int>(rows.size()), width});
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (int c = 0; c < width; ++c) out.at(static_cast<int>(r), c) = val(rows[r]).at(c);
    return push(Op::kStackRows, std::move(in), std::move(out));
  }

  // [begin, end) range of a vector.
  NodeId slice(NodeId a, int begin, int end) {
    const Ten& A = val(a);
    if (A.rank() != 1) throw DataError("slice expects a vector");
    if (begin < 0 || end > A.dim(0) || begin >= end) throw DataError("slice range out of bounds");
    Ten out = Ten::zeros({end - begin});
    for (int i = begin; i < end; ++i) out.at(i - begin) = A.at(i);
    NodeId id = push(Op::kSlice, {a.v}, std::move(out));
    node(id).iaux = {begin, end};
    return id;
  }

  NodeId row(NodeId m, int r) {
    const Ten& M = val(m);
    if (M.rank() != 2 || r < 0 || r >= M.rows()) throw DataError("row index out of range");
    Ten out = Ten::zeros({M.cols()});
    for (int c = 0; c < M.cols(); ++c) out.at(c) = M.at(r, c);
    NodeId id = push(Op::kRow, {m.v}, std::move(out));
    node(id).iaux = {r};
    return id;
  }

  NodeId gather(NodeId v, std::vector<int> idx) {
    const Ten& V = val(v);
    if (V.rank() != 1) throw DataError("gather expects a vector");
    Ten out = Ten::zeros({static_cast<int>(idx.size())});
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] < 0 || idx[i] >= V.dim(0)) throw DataError("gather index out of range");
      out.at(static_cast<int>(i)) = V.at(idx[i]);
    }
    NodeId id = push(Op::kGather, {v.v}, std::move(out));
    node(id).iaux = std::move(idx);
    return id;
  }

  NodeId gather_rows(NodeId m, std::vector<int> idx) {
    const Ten& M = val(m);
    if (M.rank() != 2) throw DataError("gather_rows expects a matrix");
    Ten out = Ten::zeros({static_cast<int>(idx.size()), M.cols()});
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (idx[i] < 0 || idx[i] >= M.rows()) throw DataError("gather_rows index out of range");
      for (int c = 0; c < M.cols(); ++c) out.at(static_cast<int>(i), c) = M.at(idx[i], c);
    }
    NodeId id = push(Op::kGatherRows, {m.v}, std::move(out));
    node(id).iaux = std::move(idx);
    return id;
  }

  NodeId col_max(NodeId m) {
    const Ten& M = val(m);
    if (M.rank() != 2) throw DataError("col_max expects a matrix");
    Ten out = Ten::zeros({M.cols()});
    std::vector<int> argmax(static_cast<std::size_t>(M.cols()), 0);
    for (int c = 0; c < M.cols(); ++c) {
      T best = M.at(0, c);
      for (int r = 1; r < M.rows(); ++r)
        if (M.at(r, c) > best) {
          best = M.at(r, c);
          argmax[static_cast<std::size_t>(c)] = r;
        }
      out.at(c) = best;
    }
    NodeId id = push(Op::kColMax, {m.v}, std::move(out));
    node(id).iaux = std::move(argmax);
    return id;
  }

  const Ten& val(NodeId id) const { return nodes_[static_cast<std::size_t>(id.v)].val; }
  const Ten& grad(NodeId id) const { return nodes_[static_cast<std::size_t>(id.v)].grad; }
  bool has_grad(NodeId id) const { return !nodes_[static_cast<std::size_t>(id.v)].grad.data.empty(); }
  std::size_t size() const { return nodes_.size(); }

  // Reverse pass from a scalar root. Gradients accumulate into every node
  // reachable from a leaf; call once per graph.
  void backward(NodeId root) {
    Node& r = node(root);
    if (r.val.size() != 1) throw DataError("backward root must be a scalar");
    r.grad = Ten::zeros(r.val.shape);
    r.grad.data[0] = T(1);
    for (int i = root.v; i >= 0; --i) {
      Node& n = nodes_[static_cast<std::size_t>(i)];
      if (!n.needs_grad || n.grad.data.empty()) continue;
      propagate(n);
    }
  }

  // Gradient of a node after backward(); zeros if the node was not reached.
  Ten grad_or_zero(NodeId id) const {
    const Node& n = nodes_[static_cast<std::size_t>(id.v)];
    if (n.grad.data.empty()) return Ten::zeros(n.val.shape);
    return n.grad;
  }

 private:
  std::vector<Node> nodes_;

  Node& node(NodeId id) { return nodes_[static_cast<std::size_t>(id.v)]; }

  NodeId push(Op op, std::vector<int> in, Ten v, bool needs = false) {
    Node n;
    n.op = op;
    n.in = std::move(in);
    n.val = std::move(v);
    n.needs_grad = needs;
    for (int i : n.in)
      if (nodes_[static_cast<std::size_t>(i)].needs_grad) n.needs_grad = true;
    nodes_.push_back(std::move(n));
    return NodeId{static_cast<int>(nodes_.size()) - 1};
  }

  static double sigmoid_d(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
  }

  static void mm_dims(const Ten& A, const Ten& B, int& m, int& k, int& k2, int& n) {
    if (A.rank() == 1) {
      m = 1;
      k = A.dim(0);
    } else if (A.rank() == 2) {
      m = A.rows();
      k = A.cols();
    } else {
      throw DataError("matmul operand rank must be 1 or 2");
    }
    if (B.rank() == 1) {
      k2 = B.dim(0);
      n = 1;
    } else if (B.rank() == 2) {
      k2 = B.rows();
      n = B.cols();
    } else {
      throw DataError("matmul operand rank must be 1 or 2");
    }
  }

  Ten* grad_buf(int idx) {
    Node& n = nodes_[static_cast<std::size_t>(idx)];
    if (!n.needs_grad) return nullptr;
    if (n.grad.data.empty()) n.grad = Ten::zeros(n.val.shape);
    return &n.grad;
  }

  void propagate(Node& n) {
    switch (n.op) {
      case Op::kConst:
      case Op::kLeaf:
        return;
      case Op::kMatmul: {
        const Ten& A = nodes_[static_cast<std::size_t>(n.in[0])].val;
        const Ten& B = nodes_[static_cast<std::size_t>(n.in[1])].val;
        int m, k, k2, nn;
        mm_dims(A, B, m, k, k2, nn);
        Ten* dA = grad_buf(n.in[0]);
        Ten* dB = grad_buf(n.in[1]);
        const auto& dC = n.grad.data;
        if (dA) {
          for (int i = 0; i < m; ++i)
            for (int t = 0; t < k; ++t) {
              double acc = 0.0;
              for (int j = 0; j < nn; ++j)
                acc += static_cast<double>(dC[static_cast<std::size_t>(i) * nn + j]) *
                       static_cast<double>(B.data[static_cast<std::size_t>(t) * nn + j]);
              dA->data[static_cast<std::size_t>(i) * k + t] += static_cast<T>(acc);
            }
        }
        if (dB) {
          for (int t = 0; t < k; ++t)
            for (int j = 0; j < nn; ++j) {
              double acc = 0.0;
              for (int i = 0; i < m; ++i)
                acc += static_cast<double>(A.data[static_cast<std::size_t>(i) * k + t]) *
                       static_cast<double>(dC[static_cast<std::size_t>(i) * nn + j]);
              dB->data[static_cast<std::size_t>(t) * nn + j] += static_cast<T>(acc);
            }
        }
        return;
      }
      case Op::kAdd: {
        for (int which = 0; which < 2; ++which)
          if (Ten* d = grad_buf(n.in[static_cast<std::size_t>(which)]))
            for (std::size_t i = 0; i < d->data.size(); ++i) d->data[i] += n.grad.data[i];
        return;
      }
      case Op::kAddBias: {
        if (Ten* dM = grad_buf(n.in[0]))
          for (std::size_t i = 0; i < dM->data.size(); ++i) dM->data[i] += n.grad.data[i];
        if (Ten* dV = grad_buf(n.in[1])) {
          int rows = n.val.rows(), cols = n.val.cols();
          for (int c = 0; c < cols; ++c) {
            double acc = 0.0;
            for (int r = 0; r < rows; ++r)
              acc += static_cast<double>(n.grad.at(r, c));
            dV->at(c) += static_cast<T>(acc);
          }
        }
        return;
      }
      case Op::kAddScalar: {
        if (Ten* dA = grad_buf(n.in[0]))
          for (std::size_t i = 0; i < dA->data.size(); ++i) dA->data[i] += n.grad.data[i];
        if (Ten* dS = grad_buf(n.in[1])) {
          double acc = 0.0;
          for (T g : n.grad.data) acc += static_cast<double>(g);
          dS->data[0] += static_cast<T>(acc);
        }
        return;
      }
      case Op::kSub: {
        if (Ten* dA = grad_buf(n.in[0]))
          for (std::size_t i = 0; i < dA->data.size(); ++i) dA->data[i] += n.grad.data[i];
        if (Ten* dB = grad_buf(n.in[1]))
          for (std::size_t i = 0; i < dB->data.size(); ++i) dB->data[i] -= n.grad.data[i];
        return;
      }
      case Op::kNeg: {
        if (Ten* dA = grad_buf(n.in[0]))
          for (std::size_t i = 0; i < dA->data.size(); ++i) dA->data[i] -= n.grad.data[i];
        return;
      }
      case Op::kMul: {
        const Ten& A = nodes_[static_cast<std::size_t>(n.in[0])].val;
        const Ten& B = nodes_[static_cast<std::size_t>(n.in[1])].val;
        if (Ten* dA = grad_buf(n.in[0]))
          for (std::size_t i = 0; i < dA->data.size(); ++i) dA->data[i] += n.grad.data[i] * B.data[i];
        if (Ten* dB = grad_buf(n.in[1]))
          for (std::size_t i = 0; i < dB->data.size(); ++i) dB->data[i] += n.grad.data[i] * A.data[i];
        return;
      }
      case Op::kScale: {
        if (Ten* dA = grad_buf(n.in[0]))
          for (std::size_t i = 0; i < dA->data.size(); ++i)
            dA->data[i] += static_cast<T>(static_cast<double>(n.grad.data[i]) * n.faux);
        return;
      }
      case Op::kAddConst: {
        if (Ten* dA = grad_buf(n.in[0]))
          for (std::size_t i = 0; i < dA->data.size(); ++i) dA->data[i] += n.grad.data[i];
        return;
      }
      case Op::kTanh: {
        if (Ten* dA = grad_buf(n.in[0]))
          for (std::size_t i = 0; i < dA->data.size(); ++i) {
            double y = static_cast<double>(n.val.data[i]);
            dA->data[i] += static_cast<T>(static_cast<double>(n.grad.data[i]) * (1.0 - y * y));
          }
        return;
      }
      case Op::kSigmoid: {
        if (Ten* dA = grad_buf(n.in[0]))
          for (std::size_t i = 0; i < dA->data.size(); ++i) {
            double y = static_cast<double>(n.val.data[i]);
            dA->data[i] += static_cast<T>(static_cast<double>(n.grad.data[i]) * y * (1.0 - y));
          }
        return;
      }
      case Op::kRelu: {
        const Ten& A = nodes_[static_cast<std::size_t>(n.in[0])].val;
        if (Ten* dA = grad_buf(n.in[0]))
          for (std::size_t i = 0; i < dA->data.size(); ++i)
            if (A.data[i] > T(0)) dA->data[i] += n.grad.data[i];
        return;
      }
      case Op::kLog: {
        const Ten& A = nodes_[static_cast<std::size_t>(n.in[0])].val;
        if (Ten* dA = grad_buf(n.in[0]))
          for (std::size_t i = 0; i < dA->data.size(); ++i)
            dA->data[i] += static_cast<T>(static_cast<double>(n.grad.data[i]) /
                                          static_cast<double>(A.data[i]));
        return;
      }
      case Op::kClampMin: {
        const Ten& A = nodes_[static_cast<std::size_t>(n.in[0])].val;
        if (Ten* dA = grad_buf(n.in[0]))
          for (std::size_t i = 0; i < dA->data.size(); ++i)
            if (static_cast<double>(A.data[i]) > n.faux) dA->data[i] += n.grad.data[i];
        return;
      }
      case Op::kSoftmax: {
        if (Ten* dA = grad_buf(n.in[0])) {
          double dot = 0.0;
          for (std::size_t i = 0; i < n.val.data.size(); ++i)
            dot += static_cast<double>(n.grad.data[i]) * static_cast<double>(n.val.data[i]);
          for (std::size_t i = 0; i < n.val.data.size(); ++i)
            dA->data[i] += static_cast<T>(static_cast<double>(n.val.data[i]) *
                                          (static_cast<double>(n.grad.data[i]) - dot));
        }
        return;
      }
      case Op::kSum: {
        if (Ten* dA = grad_buf(n.in[0]))
          for (auto& g : dA->data) g += n.grad.data[0];
        return;
      }
      case Op::kConcat: {
        std::size_t off = 0;
        for (int src : n.in) {
          Node& s = nodes_[static_cast<std::size_t>(src)];
          if (Ten* dS = grad_buf(src))
            for (std::size_t i = 0; i < s.val.data.size(); ++i) dS->data[i] += n.grad.data[off + i];
          off += s.val.data.size();
        }
        return;
      }
      case Op::kConcatCols: {
        int rows = n.val.rows();
        int off = 0;
        for (int src : n.in) {
          Node& s = nodes_[static_cast<std::size_t>(src)];
          int c0 = s.val.cols();
          if (Ten* dS = grad_buf(src))
            for (int r = 0; r < rows; ++r)
              for (int c = 0; c < c0; ++c) dS->at(r, c) += n.grad.at(r, off + c);
          off += c0;
        }
        return;
      }
      case Op::kStackRows: {
        int width = n.val.cols();
        for (std::size_t r = 0; r < n.in.size(); ++r)
          if (Ten* dS = grad_buf(n.in[r]))
            for (int c = 0; c < width; ++c) dS->at(c) += n.grad.at(static_cast<int>(r), c);
        return;
      }
      case Op::kSlice: {
        if (Ten* dA = grad_buf(n.in[0])) {
          int begin = n.iaux[0];
          for (std::size_t i = 0; i < n.val.data.size(); ++i)
            dA->at(begin + static_cast<int>(i)) += n.grad.data[i];
        }
        return;
      }
      case Op::kRow: {
        if (Ten* dM = grad_buf(n.in[0])) {
          int r = n.iaux[0];
          for (int c = 0; c < n.val.dim(0); ++c) dM->at(r, c) += n.grad.at(c);
        }
        return;
      }
      case Op::kGather: {
        if (Ten* dV = grad_buf(n.in[0]))
          for (std::size_t i = 0; i < n.iaux.size(); ++i)
            dV->at(n.iaux[i]) += n.grad.data[i];
        return;
      }
      case Op::kGatherRows: {
        if (Ten* dM = grad_buf(n.in[0])) {
          int cols = n.val.cols();
          for (std::size_t i = 0; i < n.iaux.size(); ++i)
            for (int c = 0; c < cols; ++c)
              dM->at(n.iaux[i], c) += n.grad.at(static_cast<int>(i), c);
        }
        return;
      }
      case Op::kColMax: {
        if (Ten* dM = grad_buf(n.in[0]))
          for (int c = 0; c < n.val.dim(0); ++c)
            dM->at(n.iaux[static_cast<std::size_t>(c)], c) += n.grad.at(c);
        return;
      }
    }
  }
};

}  // namespace cspan
