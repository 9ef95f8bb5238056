#pragma once

#include <utility>
#include <vector>

#include "graph.hpp"
#include "rng.hpp"

namespace cspan {

// Packed LSTM parameters. Gate order inside the 4H axis is [i, f, g, o].
template <typename T>
struct LstmNodes {
  NodeId w_input;   // (4H x X)
  NodeId w_hidden;  // (4H x H)
  NodeId bias;      // (4H)
};

// One step of a standard LSTM cell:
//   gates = W x + U h + b
//   c' = sigmoid(f) * c + sigmoid(i) * tanh(g)
//   h' = sigmoid(o) * tanh(c')
template <typename T>
std::pair<NodeId, NodeId> lstm_cell(Graph<T>& g, const LstmNodes<T>& p, NodeId x, NodeId h,
                                    NodeId c, int hidden) {
  const auto& wi = g.val(p.w_input);
  const auto& wh = g.val(p.w_hidden);
  if (wi.rank() != 2 || wh.rank() != 2 || wi.rows() != 4 * hidden || wh.rows() != 4 * hidden ||
      wh.cols() != hidden || wi.cols() != g.val(x).dim(0) || g.val(h).dim(0) != hidden ||
      g.val(c).dim(0) != hidden)
    throw DataError("lstm_cell parameter dimensions inconsistent");
  NodeId gates = g.add(g.add(g.matmul(p.w_input, x), g.matmul(p.w_hidden, h)), p.bias);
  NodeId in_g = g.sigmoid(g.slice(gates, 0, hidden));
  NodeId forget_g = g.sigmoid(g.slice(gates, hidden, 2 * hidden));
  NodeId cand = g.tanh(g.slice(gates, 2 * hidden, 3 * hidden));
  NodeId out_g = g.sigmoid(g.slice(gates, 3 * hidden, 4 * hidden));
  NodeId c_next = g.add(g.mul(forget_g, c), g.mul(in_g, cand));
  NodeId h_next = g.mul(out_g, g.tanh(c_next));
  return {h_next, c_next};
}

// Feed-forward scorer: hidden layers with ReLU, then a final linear row.
// Input may be a single vector or a (batch x in) matrix; the result is a
// scalar or a per-row score vector accordingly.
template <typename T>
NodeId ffnn_score(Graph<T>& g, NodeId x, std::span<const NodeId> weights,
                  std::span<const NodeId> biases, NodeId out_row) {
  NodeId h = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    NodeId z = g.matmul(h, weights[l]);
    if (g.val(z).rank() == 2)
      z = g.add_bias(z, biases[l]);
    else
      z = g.add(z, biases[l]);
    h = g.relu(z);
  }
  return g.matmul(h, out_row);
}

// Uniform Glorot init: [-s, s] with s = sqrt(6 / (fan_in + fan_out)).
inline Tensor glorot_matrix(int rows, int cols, int fan_in, int fan_out, Rng& rng) {
  Tensor t = Tensor::zeros({rows, cols});
  double s = std::sqrt(6.0 / (fan_in + fan_out));
  for (auto& v : t.data) v = static_cast<float>(rng.uniform(-s, s));
  return t;
}

inline Tensor glorot_vector(int n, int fan_in, int fan_out, Rng& rng) {
  Tensor t = Tensor::zeros({n});
  double s = std::sqrt(6.0 / (fan_in + fan_out));
  for (auto& v : t.data) v = static_cast<float>(rng.uniform(-s, s));
  return t;
}

}  // namespace cspan
