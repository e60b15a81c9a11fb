#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <unordered_set>
#include <utility>
#include <vector>

#include "alpdc/error.hpp"
#include "alpdc/matrix.hpp"
#include "alpdc/neural.hpp"

namespace alpdc::ad {

struct Node {
  Matrix value;
  Matrix grad;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;
  bool trainable = false;

  void ensure_grad() {
    if (!grad.same_shape(value)) grad = Matrix(value.rows(), value.cols());
  }
};

/// Handle to a node in a dynamically built expression graph. Parameters are
/// long-lived leaves; every op allocates a fresh node that keeps its inputs alive.
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node> n) : node_(std::move(n)) {}

  const Matrix& value() const { return node_->value; }
  Matrix& mutable_value() { return node_->value; }
  const Matrix& grad() const { return node_->grad; }
  Matrix& mutable_grad() {
    node_->ensure_grad();
    return node_->grad;
  }
  std::size_t rows() const { return node_->value.rows(); }
  std::size_t cols() const { return node_->value.cols(); }
  Node* node() const { return node_.get(); }
  const std::shared_ptr<Node>& ptr() const { return node_; }

  void zero_grad() {
    node_->ensure_grad();
    node_->grad.fill(0.0);
  }

 private:
  std::shared_ptr<Node> node_;
};

inline Var parameter(Matrix value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->trainable = true;
  n->ensure_grad();
  return Var(std::move(n));
}

inline Var constant(Matrix value) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  return Var(std::move(n));
}

namespace detail {

inline Var make(Matrix value, std::vector<Var> inputs, std::function<void(Node&)> backward) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  for (auto& v : inputs) n->parents.push_back(v.ptr());
  n->backward = std::move(backward);
  return Var(std::move(n));
}

inline Matrix& grad_of(const std::shared_ptr<Node>& n) {
  n->ensure_grad();
  return n->grad;
}

}  // namespace detail

/// Accumulates d(root)/d(node) into every reachable node's grad. The root must be 1x1.
inline void backward(const Var& root) {
  if (root.value().size() != 1) throw Error(ErrorCode::DimensionMismatch, "backward needs a scalar root");
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{root.node(), 0}};
  seen.insert(root.node());
  while (!stack.empty()) {
    auto& [n, next] = stack.back();
    if (next < n->parents.size()) {
      Node* p = n->parents[next++].get();
      if (seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }
  for (Node* n : order) {
    if (!n->trainable) {
      n->ensure_grad();
      n->grad.fill(0.0);
    }
  }
  root.node()->grad(0, 0) += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward) (*it)->backward(**it);
  }
}

inline Var matmul(const Var& a, const Var& b) {
  return detail::make(alpdc::matmul(a.value(), b.value()), {a, b}, [](Node& n) {
    auto& pa = n.parents[0];
    auto& pb = n.parents[1];
    detail::grad_of(pa) += matmul_bt(n.grad, pb->value);
    detail::grad_of(pb) += matmul_at(pa->value, n.grad);
  });
}

/// a * b^T
inline Var matmul_bt(const Var& a, const Var& b) {
  return detail::make(alpdc::matmul_bt(a.value(), b.value()), {a, b}, [](Node& n) {
    auto& pa = n.parents[0];
    auto& pb = n.parents[1];
    detail::grad_of(pa) += alpdc::matmul(n.grad, pb->value);
    detail::grad_of(pb) += matmul_at(n.grad, pa->value);
  });
}

inline Var add(const Var& a, const Var& b) {
  Matrix out = a.value();
  out += b.value();
  return detail::make(std::move(out), {a, b}, [](Node& n) {
    detail::grad_of(n.parents[0]) += n.grad;
    detail::grad_of(n.parents[1]) += n.grad;
  });
}

/// x + bias, with a 1 x cols bias broadcast over rows.
inline Var add_bias(const Var& x, const Var& bias) {
  if (bias.rows() != 1 || bias.cols() != x.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "add_bias: " + x.value().shape() + " + " + bias.value().shape());
  }
  Matrix out = x.value();
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) += bias.value()(0, j);
  return detail::make(std::move(out), {x, bias}, [](Node& n) {
    detail::grad_of(n.parents[0]) += n.grad;
    auto& gb = detail::grad_of(n.parents[1]);
    for (std::size_t i = 0; i < n.grad.rows(); ++i)
      for (std::size_t j = 0; j < n.grad.cols(); ++j) gb(0, j) += n.grad(i, j);
  });
}

inline Var scale(const Var& x, double s) {
  Matrix out = x.value();
  for (auto& v : out.values()) v *= s;
  return detail::make(std::move(out), {x}, [s](Node& n) {
    auto& g = detail::grad_of(n.parents[0]);
    for (std::size_t i = 0; i < g.size(); ++i) g.values()[i] += s * n.grad.values()[i];
  });
}

inline Var hadamard(const Var& a, const Var& b) {
  a.value().require_same_shape(b.value(), "hadamard");
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] *= b.value().values()[i];
  return detail::make(std::move(out), {a, b}, [](Node& n) {
    auto& pa = n.parents[0];
    auto& pb = n.parents[1];
    auto& ga = detail::grad_of(pa);
    auto& gb = detail::grad_of(pb);
    for (std::size_t i = 0; i < n.grad.size(); ++i) {
      ga.values()[i] += n.grad.values()[i] * pb->value.values()[i];
      gb.values()[i] += n.grad.values()[i] * pa->value.values()[i];
    }
  });
}

namespace detail {

template <typename F, typename D>
Var elementwise(const Var& x, F f, D derivative_from_output) {
  Matrix out = x.value();
  for (auto& v : out.values()) v = f(v);
  return make(std::move(out), {x}, [derivative_from_output](Node& n) {
    auto& g = grad_of(n.parents[0]);
    const auto& in = n.parents[0]->value.values();
    for (std::size_t i = 0; i < g.size(); ++i) {
      g.values()[i] += n.grad.values()[i] * derivative_from_output(in[i], n.value.values()[i]);
    }
  });
}

}  // namespace detail

inline Var relu(const Var& x) {
  return detail::elementwise(
      x, [](double v) { return v > 0.0 ? v : 0.0; }, [](double in, double) { return in > 0.0 ? 1.0 : 0.0; });
}

inline Var sigmoid(const Var& x) {
  return detail::elementwise(
      x, [](double v) { return nn::sigmoid(v); }, [](double, double y) { return y * (1.0 - y); });
}

inline Var tanh(const Var& x) {
  return detail::elementwise(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

/// Row-wise softmax. With `causal`, row i only sees columns 0..i.
inline Var softmax_rows(const Var& x, bool causal = false) {
  const Matrix& in = x.value();
  Matrix out(in.rows(), in.cols());
  for (std::size_t i = 0; i < in.rows(); ++i) {
    const std::size_t width = causal ? std::min(i + 1, in.cols()) : in.cols();
    auto s = nn::softmax(in.row(i).subspan(0, width));
    std::copy(s.begin(), s.end(), out.row(i).begin());
  }
  return detail::make(std::move(out), {x}, [](Node& n) {
    auto& g = detail::grad_of(n.parents[0]);
    for (std::size_t i = 0; i < n.value.rows(); ++i) {
      auto y = n.value.row(i);
      auto gy = n.grad.row(i);
      double dot = 0.0;
      for (std::size_t j = 0; j < y.size(); ++j) dot += y[j] * gy[j];
      for (std::size_t j = 0; j < y.size(); ++j) g(i, j) += y[j] * (gy[j] - dot);
    }
  });
}

/// Per-row normalization to zero mean and unit variance, then gain and bias (both 1 x cols).
inline Var layer_norm(const Var& x, const Var& gain, const Var& bias, double eps = 1e-5) {
  const Matrix& in = x.value();
  const std::size_t d = in.cols();
  Matrix normalized(in.rows(), d);
  std::vector<double> inv_std(in.rows());
  Matrix out(in.rows(), d);
  for (std::size_t i = 0; i < in.rows(); ++i) {
    auto r = in.row(i);
    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (double v : r) var += (v - mean) * (v - mean);
    var /= static_cast<double>(d);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      normalized(i, j) = (r[j] - mean) * inv_std[i];
      out(i, j) = normalized(i, j) * gain.value()(0, j) + bias.value()(0, j);
    }
  }
  return detail::make(std::move(out), {x, gain, bias},
                      [normalized = std::move(normalized), inv_std = std::move(inv_std)](Node& n) {
                        auto& gx = detail::grad_of(n.parents[0]);
                        auto& gg = detail::grad_of(n.parents[1]);
                        auto& gb = detail::grad_of(n.parents[2]);
                        const auto& gain_v = n.parents[1]->value;
                        const std::size_t d = n.value.cols();
                        std::vector<double> gxhat(d);
                        for (std::size_t i = 0; i < n.value.rows(); ++i) {
                          double sum = 0.0, sum_xhat = 0.0;
                          for (std::size_t j = 0; j < d; ++j) {
                            const double go = n.grad(i, j);
                            gg(0, j) += go * normalized(i, j);
                            gb(0, j) += go;
                            gxhat[j] = go * gain_v(0, j);
                            sum += gxhat[j];
                            sum_xhat += gxhat[j] * normalized(i, j);
                          }
                          const double dd = static_cast<double>(d);
                          for (std::size_t j = 0; j < d; ++j) {
                            gx(i, j) += inv_std[i] * (gxhat[j] - sum / dd - normalized(i, j) * sum_xhat / dd);
                          }
                        }
                      });
}

/// Rows `ids` of `table`.
inline Var gather_rows(const Var& table, std::vector<std::size_t> ids) {
  Matrix out(ids.size(), table.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] >= table.rows()) throw Error(ErrorCode::DimensionMismatch, "gather_rows: index out of range");
    auto src = table.value().row(ids[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return detail::make(std::move(out), {table}, [ids = std::move(ids)](Node& n) {
    auto& g = detail::grad_of(n.parents[0]);
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = 0; j < n.grad.cols(); ++j) g(ids[i], j) += n.grad(i, j);
  });
}

inline Var slice_cols(const Var& x, std::size_t begin, std::size_t count) {
  if (begin + count > x.cols()) throw Error(ErrorCode::DimensionMismatch, "slice_cols out of range");
  Matrix out(x.rows(), count);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < count; ++j) out(i, j) = x.value()(i, begin + j);
  return detail::make(std::move(out), {x}, [begin](Node& n) {
    auto& g = detail::grad_of(n.parents[0]);
    for (std::size_t i = 0; i < n.grad.rows(); ++i)
      for (std::size_t j = 0; j < n.grad.cols(); ++j) g(i, begin + j) += n.grad(i, j);
  });
}

/// Stacks 1-row or multi-row blocks vertically.
inline Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw Error(ErrorCode::DimensionMismatch, "concat_rows of nothing");
  const std::size_t cols = parts.front().cols();
  std::size_t rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) throw Error(ErrorCode::DimensionMismatch, "concat_rows: column counts differ");
    rows += p.rows();
  }
  Matrix out(rows, cols);
  std::size_t r = 0;
  for (const auto& p : parts)
    for (std::size_t i = 0; i < p.rows(); ++i, ++r) std::copy(p.value().row(i).begin(), p.value().row(i).end(), out.row(r).begin());
  return detail::make(std::move(out), parts, [](Node& n) {
    std::size_t r = 0;
    for (auto& p : n.parents) {
      auto& g = detail::grad_of(p);
      for (std::size_t i = 0; i < p->value.rows(); ++i, ++r)
        for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) += n.grad(r, j);
    }
  });
}

/// Row-wise top-k sparse softmax over gate logits (rows x E). Zero entries
/// receive no gradient; the selection itself is piecewise constant.
inline Var top_k_gate(const Var& logits, std::size_t k) {
  const Matrix& in = logits.value();
  Matrix out(in.rows(), in.cols());
  for (std::size_t i = 0; i < in.rows(); ++i) {
    auto g = nn::sparse_softmax(in.row(i), k);
    std::copy(g.begin(), g.end(), out.row(i).begin());
  }
  return detail::make(std::move(out), {logits}, [](Node& n) {
    auto& g = detail::grad_of(n.parents[0]);
    for (std::size_t i = 0; i < n.value.rows(); ++i) {
      auto y = n.value.row(i);
      auto gy = n.grad.row(i);
      double dot = 0.0;
      for (std::size_t j = 0; j < y.size(); ++j) dot += y[j] * gy[j];
      for (std::size_t j = 0; j < y.size(); ++j) {
        if (y[j] != 0.0) g(i, j) += y[j] * (gy[j] - dot);
      }
    }
  });
}

/// out[i, :] = x[i, :] * weights[i, column]
inline Var scale_rows_by_column(const Var& x, const Var& weights, std::size_t column) {
  if (weights.rows() != x.rows() || column >= weights.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "scale_rows_by_column shapes are inconsistent");
  }
  Matrix out = x.value();
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) *= weights.value()(i, column);
  return detail::make(std::move(out), {x, weights}, [column](Node& n) {
    auto& px = n.parents[0];
    auto& pw = n.parents[1];
    auto& gx = detail::grad_of(px);
    auto& gw = detail::grad_of(pw);
    for (std::size_t i = 0; i < n.grad.rows(); ++i) {
      const double w = pw->value(i, column);
      double s = 0.0;
      for (std::size_t j = 0; j < n.grad.cols(); ++j) {
        gx(i, j) += n.grad(i, j) * w;
        s += n.grad(i, j) * px->value(i, j);
      }
      gw(i, column) += s;
    }
  });
}

/// Mean token-level cross-entropy of row-wise softmax(logits) against target ids.
inline Var cross_entropy(const Var& logits, std::vector<std::size_t> targets) {
  const Matrix& in = logits.value();
  if (targets.size() != in.rows()) throw Error(ErrorCode::DimensionMismatch, "cross_entropy: target count");
  Matrix probs(in.rows(), in.cols());
  double loss = 0.0;
  for (std::size_t i = 0; i < in.rows(); ++i) {
    if (targets[i] >= in.cols()) throw Error(ErrorCode::DimensionMismatch, "cross_entropy: target out of range");
    auto row = in.row(i);
    const double m = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double v : row) sum += std::exp(v - m);
    const double log_z = m + std::log(sum);
    for (std::size_t j = 0; j < row.size(); ++j) probs(i, j) = std::exp(row[j] - log_z);
    loss += log_z - row[targets[i]];
  }
  const double count = static_cast<double>(in.rows());
  return detail::make(Matrix(1, 1, loss / count), {logits},
                      [probs = std::move(probs), targets = std::move(targets), count](Node& n) {
                        auto& g = detail::grad_of(n.parents[0]);
                        const double up = n.grad(0, 0) / count;
                        for (std::size_t i = 0; i < probs.rows(); ++i) {
                          for (std::size_t j = 0; j < probs.cols(); ++j) {
                            g(i, j) += up * (probs(i, j) - (j == targets[i] ? 1.0 : 0.0));
                          }
                        }
                      });
}

}  // namespace alpdc::ad
