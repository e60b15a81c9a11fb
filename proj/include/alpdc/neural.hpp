#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "alpdc/error.hpp"
#include "alpdc/matrix.hpp"

namespace alpdc::nn {

/// Max-subtracted softmax.
inline std::vector<double> softmax(std::span<const double> v) {
  if (v.empty()) throw Error(ErrorCode::DimensionMismatch, "softmax of an empty vector");
  const double m = *std::max_element(v.begin(), v.end());
  std::vector<double> out(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) sum += out[i] = std::exp(v[i] - m);
  for (auto& x : out) x /= sum;
  return out;
}

inline Matrix softmax_rows(const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto s = softmax(m.row(i));
    std::copy(s.begin(), s.end(), out.row(i).begin());
  }
  return out;
}

/// softmax(Q K^T / sqrt(d_k)) with d_k = K.cols.
inline Matrix attention_weights(const Matrix& q, const Matrix& k) {
  if (q.cols() != k.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "attention: Q is " + q.shape() + ", K is " + k.shape());
  }
  if (k.rows() == 0) throw Error(ErrorCode::DimensionMismatch, "attention needs at least one key");
  Matrix scores = matmul_bt(q, k);
  const double scale = 1.0 / std::sqrt(static_cast<double>(k.cols()));
  for (auto& s : scores.values()) s *= scale;
  return softmax_rows(scores);
}

/// Scaled dot-product attention; each output row is a convex combination of V's rows.
inline Matrix attention(const Matrix& q, const Matrix& k, const Matrix& v) {
  if (k.rows() != v.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "attention: K is " + k.shape() + ", V is " + v.shape());
  }
  return matmul(attention_weights(q, k), v);
}

/// Indices of the k largest values, ties to the lower index, in ascending index order.
inline std::vector<std::size_t> top_k_indices(std::span<const double> logits, std::size_t k) {
  if (k < 1 || k > logits.size()) {
    throw Error(ErrorCode::BadK, "top_k must satisfy 1 <= k <= " + std::to_string(logits.size()) +
                                     ", got " + std::to_string(k));
  }
  std::vector<std::size_t> idx(logits.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return logits[a] > logits[b]; });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// Softmax over the k largest logits, exactly zero elsewhere.
inline std::vector<double> sparse_softmax(std::span<const double> logits, std::size_t k) {
  const auto active = top_k_indices(logits, k);
  std::vector<double> selected;
  for (auto i : active) selected.push_back(logits[i]);
  const auto w = softmax(selected);
  std::vector<double> out(logits.size(), 0.0);
  for (std::size_t j = 0; j < active.size(); ++j) out[active[j]] = w[j];
  return out;
}

/// Sparse gate: logits = x * W_gate (W_gate is model_dim x E).
inline std::vector<double> moe_gate(std::span<const double> x, const Matrix& gate_weights, std::size_t k) {
  if (x.size() != gate_weights.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "moe_gate: input width " + std::to_string(x.size()) +
                                                  " vs gate " + gate_weights.shape());
  }
  const auto logits = matmul(Matrix::row_vector(x), gate_weights);
  return sparse_softmax(logits.row(0), k);
}

/// Two-layer feed-forward expert: relu(x W1 + b1) W2 + b2.
struct FeedForward {
  Matrix w1;  // model_dim x hidden_dim
  Matrix b1;  // 1 x hidden_dim
  Matrix w2;  // hidden_dim x model_dim
  Matrix b2;  // 1 x model_dim

  std::size_t model_dim() const noexcept { return w1.rows(); }

  Matrix operator()(const Matrix& x) const {
    if (x.cols() != w1.rows() || b1.cols() != w1.cols() || w2.rows() != w1.cols() || b2.cols() != w2.cols()) {
      throw Error(ErrorCode::DimensionMismatch, "feed-forward shapes are inconsistent");
    }
    Matrix h = matmul(x, w1);
    for (std::size_t i = 0; i < h.rows(); ++i) {
      auto r = h.row(i);
      for (std::size_t j = 0; j < r.size(); ++j) r[j] = std::max(0.0, r[j] + b1(0, j));
    }
    Matrix y = matmul(h, w2);
    for (std::size_t i = 0; i < y.rows(); ++i) {
      auto r = y.row(i);
      for (std::size_t j = 0; j < r.size(); ++j) r[j] += b2(0, j);
    }
    return y;
  }
};

/// Per-row sparse mixture: each row is gated independently and only its k
/// active experts are evaluated on it.
inline Matrix moe_forward(const Matrix& x, std::span<const FeedForward> experts, const Matrix& gate_weights,
                          std::size_t k) {
  if (experts.empty() || gate_weights.cols() != experts.size()) {
    throw Error(ErrorCode::DimensionMismatch, "moe_forward: gate has " + std::to_string(gate_weights.cols()) +
                                                  " outputs for " + std::to_string(experts.size()) + " experts");
  }
  if (x.cols() != gate_weights.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "moe_forward: input " + x.shape() + " vs gate " + gate_weights.shape());
  }
  Matrix out(x.rows(), x.cols());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const auto gates = moe_gate(x.row(i), gate_weights, k);
    const Matrix row = Matrix::row_vector(x.row(i));
    for (std::size_t e = 0; e < experts.size(); ++e) {
      if (gates[e] == 0.0) continue;
      const Matrix y = experts[e](row);
      if (y.cols() != x.cols()) throw Error(ErrorCode::DimensionMismatch, "expert output width differs from input");
      for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) += gates[e] * y(0, j);
    }
  }
  return out;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Standard LSTM cell. Gate columns are laid out [input | forget | output | candidate].
struct LstmCell {
  Matrix wx;  // input_dim x 4H
  Matrix wh;  // H x 4H
  Matrix b;   // 1 x 4H

  std::size_t hidden_dim() const noexcept { return wh.rows(); }
};

struct LstmState {
  Matrix h;  // 1 x H
  Matrix c;  // 1 x H
};

inline LstmState lstm_step(const LstmCell& cell, const Matrix& x, const LstmState& state) {
  const std::size_t hd = cell.hidden_dim();
  if (cell.wx.cols() != 4 * hd || cell.wh.cols() != 4 * hd || cell.b.cols() != 4 * hd || x.cols() != cell.wx.rows() ||
      state.h.cols() != hd || state.c.cols() != hd || x.rows() != 1) {
    throw Error(ErrorCode::DimensionMismatch, "lstm_step shapes are inconsistent");
  }
  Matrix z = matmul(x, cell.wx);
  z += matmul(state.h, cell.wh);
  z += cell.b;
  LstmState next{Matrix(1, hd), Matrix(1, hd)};
  for (std::size_t j = 0; j < hd; ++j) {
    const double i = sigmoid(z(0, j));
    const double f = sigmoid(z(0, hd + j));
    const double o = sigmoid(z(0, 2 * hd + j));
    const double g = std::tanh(z(0, 3 * hd + j));
    next.c(0, j) = f * state.c(0, j) + i * g;
    next.h(0, j) = o * std::tanh(next.c(0, j));
  }
  return next;
}

}  // namespace alpdc::nn
