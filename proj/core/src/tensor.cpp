#include "gps/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace gps {

namespace {

thread_local Tape* g_active_tape = nullptr;
thread_local double g_relu_margin = std::numeric_limits<double>::infinity();
thread_local double g_cosine_norm_margin = std::numeric_limits<double>::infinity();

using NodePtr = std::shared_ptr<detail::TensorNode>;

NodePtr new_node(int rows, int cols, std::vector<double> data) {
  auto n = std::make_shared<detail::TensorNode>();
  n->rows = rows;
  n->cols = cols;
  n->data = std::move(data);
  return n;
}

void check_finite(const std::vector<double>& v, const char* op) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw NumericError(std::string(op) + ": non-finite value in output");
    }
  }
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw DimensionError(msg);
}

void require_defined(const Tensor& t, const char* op) {
  if (!t.defined()) throw StateError(std::string(op) + ": undefined tensor");
}

bool grad_wanted(std::initializer_list<const Tensor*> inputs) {
  if (g_active_tape == nullptr) return false;
  for (const Tensor* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

// Marks `out` as a tape-produced node with a zeroed gradient buffer.
void attach_to_tape(const Tensor& out) {
  NodePtr n = out.node();
  n->requires_grad = true;
  n->grad.assign(n->data.size(), 0.0);
  n->origin = g_active_tape;
}

void accumulate(const NodePtr& n, std::size_t i, double v) {
  if (n->requires_grad) n->grad[i] += v;
}

}  // namespace

namespace detail {
Tensor wrap_node(std::shared_ptr<TensorNode> node) { return Tensor(std::move(node)); }
}  // namespace detail

// ---- Tensor ---------------------------------------------------------------

Tensor Tensor::zeros(int rows, int cols) { return full(rows, cols, 0.0); }

Tensor Tensor::ones(int rows, int cols) { return full(rows, cols, 1.0); }

Tensor Tensor::full(int rows, int cols, double value) {
  require(rows >= 1 && cols >= 1, "Tensor: dimensions must be positive");
  return detail::wrap_node(
      new_node(rows, cols, std::vector<double>(static_cast<std::size_t>(rows) * cols, value)));
}

Tensor Tensor::scalar(double value) { return full(1, 1, value); }

Tensor Tensor::from_data(int rows, int cols, std::vector<double> data) {
  require(rows >= 1 && cols >= 1, "Tensor: dimensions must be positive");
  require(data.size() == static_cast<std::size_t>(rows) * cols,
          "Tensor: data length must equal rows*cols");
  return detail::wrap_node(new_node(rows, cols, std::move(data)));
}

Tensor Tensor::param(int rows, int cols, std::vector<double> data) {
  Tensor t = from_data(rows, cols, std::move(data));
  t.set_requires_grad(true);
  return t;
}

Tensor Tensor::uniform(int rows, int cols, double lo, double hi, Rng& rng, bool requires_grad) {
  std::vector<double> data(static_cast<std::size_t>(rows) * cols);
  for (double& x : data) x = rng.uniform(lo, hi);
  Tensor t = from_data(rows, cols, std::move(data));
  if (requires_grad) t.set_requires_grad(true);
  return t;
}

double Tensor::at(int r, int c) const {
  require(r >= 0 && r < rows() && c >= 0 && c < cols(), "Tensor::at: index out of range");
  return node_->data[static_cast<std::size_t>(r) * cols() + c];
}

double& Tensor::at(int r, int c) {
  require(r >= 0 && r < rows() && c >= 0 && c < cols(), "Tensor::at: index out of range");
  return node_->data[static_cast<std::size_t>(r) * cols() + c];
}

const std::vector<double>& Tensor::grad() const {
  if (!requires_grad()) throw StateError("Tensor::grad: no gradient buffer");
  return node_->grad;
}

double Tensor::item() const {
  require(rows() == 1 && cols() == 1, "Tensor::item: tensor is not 1x1");
  return node_->data[0];
}

void Tensor::zero_grad() {
  if (requires_grad()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

void Tensor::set_requires_grad(bool on) {
  if (node_->origin != nullptr) {
    throw StateError("set_requires_grad: tensor was produced on a tape");
  }
  node_->requires_grad = on;
  if (on) {
    node_->grad.assign(node_->data.size(), 0.0);
  } else {
    node_->grad.clear();
  }
}

Tensor Tensor::clone() const {
  auto n = new_node(rows(), cols(), node_->data);
  n->requires_grad = node_->requires_grad;
  if (n->requires_grad) n->grad.assign(n->data.size(), 0.0);
  return detail::wrap_node(std::move(n));
}

// ---- Tape -----------------------------------------------------------------

Tape* Tape::active() { return g_active_tape; }

void Tape::record(std::function<void()> backward_fn, std::shared_ptr<detail::TensorNode> out) {
  ops_.push_back(Op{std::move(backward_fn), std::move(out)});
}

void Tape::backward(const Tensor& loss) {
  if (consumed_) throw StateError("Tape::backward: called twice without rewind/reset");
  if (!loss.defined()) throw StateError("Tape::backward: undefined loss");
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw DimensionError("Tape::backward: loss must be a 1x1 scalar");
  }
  if (ops_.empty()) throw StateError("Tape::backward: tape is empty");
  if (loss.node()->origin != this) {
    throw StateError("Tape::backward: loss was not produced on this tape");
  }
  consumed_ = true;
  loss.node()->grad[0] = 1.0;
  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
    it->backward();
  }
}

void Tape::rewind() {
  for (Op& op : ops_) {
    std::fill(op.out->grad.begin(), op.out->grad.end(), 0.0);
  }
  consumed_ = false;
}

void Tape::reset() {
  ops_.clear();
  consumed_ = false;
}

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }

TapeScope::~TapeScope() { g_active_tape = previous_; }

// ---- Operations -----------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
  require_defined(a, "add");
  require_defined(b, "add");
  require(a.rows() == b.rows() && a.cols() == b.cols(), "add: shape mismatch");
  std::vector<double> data(a.values());
  const auto& bv = b.values();
  for (std::size_t i = 0; i < data.size(); ++i) data[i] += bv[i];
  check_finite(data, "add");
  Tensor out = detail::wrap_node(new_node(a.rows(), a.cols(), std::move(data)));
  if (grad_wanted({&a, &b})) {
    attach_to_tape(out);
    auto an = a.node(), bn = b.node(), on = out.node();
    g_active_tape->record(
        [an, bn, on] {
          for (std::size_t i = 0; i < on->grad.size(); ++i) {
            accumulate(an, i, on->grad[i]);
            accumulate(bn, i, on->grad[i]);
          }
        },
        on);
  }
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require_defined(a, "sub");
  require_defined(b, "sub");
  require(a.rows() == b.rows() && a.cols() == b.cols(), "sub: shape mismatch");
  std::vector<double> data(a.values());
  const auto& bv = b.values();
  for (std::size_t i = 0; i < data.size(); ++i) data[i] -= bv[i];
  check_finite(data, "sub");
  Tensor out = detail::wrap_node(new_node(a.rows(), a.cols(), std::move(data)));
  if (grad_wanted({&a, &b})) {
    attach_to_tape(out);
    auto an = a.node(), bn = b.node(), on = out.node();
    g_active_tape->record(
        [an, bn, on] {
          for (std::size_t i = 0; i < on->grad.size(); ++i) {
            accumulate(an, i, on->grad[i]);
            accumulate(bn, i, -on->grad[i]);
          }
        },
        on);
  }
  return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require_defined(a, "mul");
  require_defined(b, "mul");
  require(a.rows() == b.rows() && a.cols() == b.cols(), "mul: shape mismatch");
  std::vector<double> data(a.values());
  const auto& bv = b.values();
  for (std::size_t i = 0; i < data.size(); ++i) data[i] *= bv[i];
  check_finite(data, "mul");
  Tensor out = detail::wrap_node(new_node(a.rows(), a.cols(), std::move(data)));
  if (grad_wanted({&a, &b})) {
    attach_to_tape(out);
    auto an = a.node(), bn = b.node(), on = out.node();
    g_active_tape->record(
        [an, bn, on] {
          for (std::size_t i = 0; i < on->grad.size(); ++i) {
            accumulate(an, i, on->grad[i] * bn->data[i]);
            accumulate(bn, i, on->grad[i] * an->data[i]);
          }
        },
        on);
  }
  return out;
}

Tensor scale_rows(const Tensor& m, const Tensor& v) {
  require_defined(m, "scale_rows");
  require_defined(v, "scale_rows");
  require(v.cols() == 1 && v.rows() == m.rows(), "scale_rows: v must be rows(m) x 1");
  const int rows = m.rows(), cols = m.cols();
  std::vector<double> data(m.values());
  for (int i = 0; i < rows; ++i) {
    const double s = v.values()[static_cast<std::size_t>(i)];
    for (int j = 0; j < cols; ++j) data[static_cast<std::size_t>(i) * cols + j] *= s;
  }
  check_finite(data, "scale_rows");
  Tensor out = detail::wrap_node(new_node(rows, cols, std::move(data)));
  if (grad_wanted({&m, &v})) {
    attach_to_tape(out);
    auto mn = m.node(), vn = v.node(), on = out.node();
    g_active_tape->record(
        [mn, vn, on] {
          const int r = on->rows, c = on->cols;
          for (int i = 0; i < r; ++i) {
            double vdot = 0.0;
            for (int j = 0; j < c; ++j) {
              const std::size_t k = static_cast<std::size_t>(i) * c + j;
              accumulate(mn, k, on->grad[k] * vn->data[static_cast<std::size_t>(i)]);
              vdot += on->grad[k] * mn->data[k];
            }
            accumulate(vn, static_cast<std::size_t>(i), vdot);
          }
        },
        on);
  }
  return out;
}

Tensor add_rowvec(const Tensor& m, const Tensor& r) {
  require_defined(m, "add_rowvec");
  require_defined(r, "add_rowvec");
  require(r.rows() == 1 && r.cols() == m.cols(), "add_rowvec: r must be 1 x cols(m)");
  const int rows = m.rows(), cols = m.cols();
  std::vector<double> data(m.values());
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      data[static_cast<std::size_t>(i) * cols + j] += r.values()[static_cast<std::size_t>(j)];
    }
  }
  check_finite(data, "add_rowvec");
  Tensor out = detail::wrap_node(new_node(rows, cols, std::move(data)));
  if (grad_wanted({&m, &r})) {
    attach_to_tape(out);
    auto mn = m.node(), rn = r.node(), on = out.node();
    g_active_tape->record(
        [mn, rn, on] {
          const int rr = on->rows, c = on->cols;
          for (int j = 0; j < c; ++j) {
            double colsum = 0.0;
            for (int i = 0; i < rr; ++i) {
              const std::size_t k = static_cast<std::size_t>(i) * c + j;
              accumulate(mn, k, on->grad[k]);
              colsum += on->grad[k];
            }
            accumulate(rn, static_cast<std::size_t>(j), colsum);
          }
        },
        on);
  }
  return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_defined(a, "matmul");
  require_defined(b, "matmul");
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  const int n = a.rows(), k = a.cols(), m = b.cols();
  std::vector<double> data(static_cast<std::size_t>(n) * m, 0.0);
  const auto& av = a.values();
  const auto& bv = b.values();
  for (int i = 0; i < n; ++i) {
    for (int p = 0; p < k; ++p) {
      const double aip = av[static_cast<std::size_t>(i) * k + p];
      if (aip == 0.0) continue;
      const std::size_t brow = static_cast<std::size_t>(p) * m;
      const std::size_t orow = static_cast<std::size_t>(i) * m;
      for (int j = 0; j < m; ++j) data[orow + j] += aip * bv[brow + j];
    }
  }
  check_finite(data, "matmul");
  Tensor out = detail::wrap_node(new_node(n, m, std::move(data)));
  if (grad_wanted({&a, &b})) {
    attach_to_tape(out);
    auto an = a.node(), bn = b.node(), on = out.node();
    g_active_tape->record(
        [an, bn, on, n, k, m] {
          if (an->requires_grad) {
            for (int i = 0; i < n; ++i) {
              for (int p = 0; p < k; ++p) {
                double s = 0.0;
                for (int j = 0; j < m; ++j) {
                  s += on->grad[static_cast<std::size_t>(i) * m + j] *
                       bn->data[static_cast<std::size_t>(p) * m + j];
                }
                an->grad[static_cast<std::size_t>(i) * k + p] += s;
              }
            }
          }
          if (bn->requires_grad) {
            for (int p = 0; p < k; ++p) {
              for (int j = 0; j < m; ++j) {
                double s = 0.0;
                for (int i = 0; i < n; ++i) {
                  s += an->data[static_cast<std::size_t>(i) * k + p] *
                       on->grad[static_cast<std::size_t>(i) * m + j];
                }
                bn->grad[static_cast<std::size_t>(p) * m + j] += s;
              }
            }
          }
        },
        on);
  }
  return out;
}

Tensor transpose(const Tensor& a) {
  require_defined(a, "transpose");
  const int n = a.rows(), m = a.cols();
  std::vector<double> data(static_cast<std::size_t>(n) * m);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      data[static_cast<std::size_t>(j) * n + i] = a.values()[static_cast<std::size_t>(i) * m + j];
    }
  }
  Tensor out = detail::wrap_node(new_node(m, n, std::move(data)));
  if (grad_wanted({&a})) {
    attach_to_tape(out);
    auto an = a.node(), on = out.node();
    g_active_tape->record(
        [an, on, n, m] {
          for (int i = 0; i < n; ++i) {
            for (int j = 0; j < m; ++j) {
              an->grad[static_cast<std::size_t>(i) * m + j] +=
                  on->grad[static_cast<std::size_t>(j) * n + i];
            }
          }
        },
        on);
  }
  return out;
}

namespace {

// Shared scaffold for elementwise unary ops with backward rules that depend
// on the input and/or output values.
template <typename Fwd, typename Bwd>
Tensor unary_op(const char* name, const Tensor& a, Fwd fwd, Bwd bwd) {
  require_defined(a, name);
  std::vector<double> data(a.values().size());
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = fwd(a.values()[i]);
  check_finite(data, name);
  Tensor out = detail::wrap_node(new_node(a.rows(), a.cols(), std::move(data)));
  if (grad_wanted({&a})) {
    attach_to_tape(out);
    auto an = a.node(), on = out.node();
    g_active_tape->record(
        [an, on, bwd] {
          for (std::size_t i = 0; i < on->grad.size(); ++i) {
            an->grad[i] += on->grad[i] * bwd(an->data[i], on->data[i]);
          }
        },
        on);
  }
  return out;
}

}  // namespace

Tensor relu(const Tensor& a) {
  if (a.defined()) {
    for (double x : a.values()) g_relu_margin = std::min(g_relu_margin, std::fabs(x));
  }
  return unary_op(
      "relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor tanh_op(const Tensor& a) {
  return unary_op(
      "tanh", a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Tensor exp_op(const Tensor& a) {
  return unary_op(
      "exp", a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log_op(const Tensor& a) {
  return unary_op(
      "log", a, [](double x) { return std::log(x); },
      [](double x, double) { return 1.0 / x; });
}

Tensor reciprocal(const Tensor& a) {
  return unary_op(
      "reciprocal", a, [](double x) { return 1.0 / x; },
      [](double, double y) { return -y * y; });
}

Tensor row_softmax(const Tensor& a) {
  require_defined(a, "row_softmax");
  const int n = a.rows(), m = a.cols();
  std::vector<double> data(static_cast<std::size_t>(n) * m);
  for (int i = 0; i < n; ++i) {
    const std::size_t off = static_cast<std::size_t>(i) * m;
    double mx = a.values()[off];
    for (int j = 1; j < m; ++j) mx = std::max(mx, a.values()[off + j]);
    double sum = 0.0;
    for (int j = 0; j < m; ++j) {
      data[off + j] = std::exp(a.values()[off + j] - mx);
      sum += data[off + j];
    }
    for (int j = 0; j < m; ++j) data[off + j] /= sum;
  }
  check_finite(data, "row_softmax");
  Tensor out = detail::wrap_node(new_node(n, m, std::move(data)));
  if (grad_wanted({&a})) {
    attach_to_tape(out);
    auto an = a.node(), on = out.node();
    g_active_tape->record(
        [an, on, n, m] {
          for (int i = 0; i < n; ++i) {
            const std::size_t off = static_cast<std::size_t>(i) * m;
            double dot = 0.0;
            for (int j = 0; j < m; ++j) dot += on->grad[off + j] * on->data[off + j];
            for (int j = 0; j < m; ++j) {
              an->grad[off + j] += on->data[off + j] * (on->grad[off + j] - dot);
            }
          }
        },
        on);
  }
  return out;
}

Tensor row_sum(const Tensor& a) {
  require_defined(a, "row_sum");
  const int n = a.rows(), m = a.cols();
  std::vector<double> data(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) data[static_cast<std::size_t>(i)] += a.values()[static_cast<std::size_t>(i) * m + j];
  }
  check_finite(data, "row_sum");
  Tensor out = detail::wrap_node(new_node(n, 1, std::move(data)));
  if (grad_wanted({&a})) {
    attach_to_tape(out);
    auto an = a.node(), on = out.node();
    g_active_tape->record(
        [an, on, n, m] {
          for (int i = 0; i < n; ++i) {
            for (int j = 0; j < m; ++j) {
              an->grad[static_cast<std::size_t>(i) * m + j] += on->grad[static_cast<std::size_t>(i)];
            }
          }
        },
        on);
  }
  return out;
}

Tensor col_sum(const Tensor& a) {
  require_defined(a, "col_sum");
  const int n = a.rows(), m = a.cols();
  std::vector<double> data(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) data[static_cast<std::size_t>(j)] += a.values()[static_cast<std::size_t>(i) * m + j];
  }
  check_finite(data, "col_sum");
  Tensor out = detail::wrap_node(new_node(1, m, std::move(data)));
  if (grad_wanted({&a})) {
    attach_to_tape(out);
    auto an = a.node(), on = out.node();
    g_active_tape->record(
        [an, on, n, m] {
          for (int i = 0; i < n; ++i) {
            for (int j = 0; j < m; ++j) {
              an->grad[static_cast<std::size_t>(i) * m + j] += on->grad[static_cast<std::size_t>(j)];
            }
          }
        },
        on);
  }
  return out;
}

Tensor mean_all(const Tensor& a) {
  require_defined(a, "mean_all");
  double sum = 0.0;
  for (double x : a.values()) sum += x;
  const double inv = 1.0 / static_cast<double>(a.size());
  std::vector<double> data{sum * inv};
  check_finite(data, "mean_all");
  Tensor out = detail::wrap_node(new_node(1, 1, std::move(data)));
  if (grad_wanted({&a})) {
    attach_to_tape(out);
    auto an = a.node(), on = out.node();
    g_active_tape->record(
        [an, on, inv] {
          for (std::size_t i = 0; i < an->grad.size(); ++i) an->grad[i] += on->grad[0] * inv;
        },
        on);
  }
  return out;
}

Tensor l2_norm_rows(const Tensor& a) {
  require_defined(a, "l2_norm_rows");
  const int n = a.rows(), m = a.cols();
  std::vector<double> data(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < m; ++j) {
      const double x = a.values()[static_cast<std::size_t>(i) * m + j];
      s += x * x;
    }
    data[static_cast<std::size_t>(i)] = std::sqrt(s);
  }
  check_finite(data, "l2_norm_rows");
  Tensor out = detail::wrap_node(new_node(n, 1, std::move(data)));
  if (grad_wanted({&a})) {
    attach_to_tape(out);
    auto an = a.node(), on = out.node();
    g_active_tape->record(
        [an, on, n, m] {
          for (int i = 0; i < n; ++i) {
            const double norm = on->data[static_cast<std::size_t>(i)];
            if (norm == 0.0) continue;
            const double g = on->grad[static_cast<std::size_t>(i)] / norm;
            for (int j = 0; j < m; ++j) {
              const std::size_t k = static_cast<std::size_t>(i) * m + j;
              an->grad[k] += g * an->data[k];
            }
          }
        },
        on);
  }
  return out;
}

Tensor cosine_sim(const Tensor& a, const Tensor& b) {
  require_defined(a, "cosine_sim");
  require_defined(b, "cosine_sim");
  require(a.rows() == 1 && b.rows() == 1 && a.cols() == b.cols(),
          "cosine_sim: inputs must be 1 x d rows of equal width");
  const int d = a.cols();
  double dot = 0.0, na2 = 0.0, nb2 = 0.0;
  for (int j = 0; j < d; ++j) {
    const double x = a.values()[static_cast<std::size_t>(j)];
    const double y = b.values()[static_cast<std::size_t>(j)];
    dot += x * y;
    na2 += x * x;
    nb2 += y * y;
  }
  const double na = std::sqrt(na2), nb = std::sqrt(nb2);
  g_cosine_norm_margin = std::min({g_cosine_norm_margin, na, nb});
  if (na == 0.0 || nb == 0.0) throw NumericError("cosine_sim: zero-norm row");
  const double c = dot / (na * nb);
  std::vector<double> data{c};
  check_finite(data, "cosine_sim");
  Tensor out = detail::wrap_node(new_node(1, 1, std::move(data)));
  if (grad_wanted({&a, &b})) {
    attach_to_tape(out);
    auto an = a.node(), bn = b.node(), on = out.node();
    g_active_tape->record(
        [an, bn, on, d, na, nb, c] {
          const double g = on->grad[0];
          const double inv = 1.0 / (na * nb);
          for (int j = 0; j < d; ++j) {
            const std::size_t k = static_cast<std::size_t>(j);
            accumulate(an, k, g * (bn->data[k] * inv - c * an->data[k] / (na * na)));
            accumulate(bn, k, g * (an->data[k] * inv - c * bn->data[k] / (nb * nb)));
          }
        },
        on);
  }
  return out;
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  const int cols = parts.front().cols();
  int rows = 0;
  for (const Tensor& p : parts) {
    require_defined(p, "concat_rows");
    require(p.cols() == cols, "concat_rows: column counts differ");
    rows += p.rows();
  }
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(rows) * cols);
  for (const Tensor& p : parts) {
    data.insert(data.end(), p.values().begin(), p.values().end());
  }
  Tensor out = detail::wrap_node(new_node(rows, cols, std::move(data)));
  bool wants = false;
  if (g_active_tape != nullptr) {
    for (const Tensor& p : parts) wants = wants || p.requires_grad();
  }
  if (wants) {
    attach_to_tape(out);
    std::vector<NodePtr> ins;
    ins.reserve(parts.size());
    for (const Tensor& p : parts) ins.push_back(p.node());
    auto on = out.node();
    g_active_tape->record(
        [ins, on] {
          std::size_t off = 0;
          for (const NodePtr& in : ins) {
            const std::size_t len = in->data.size();
            if (in->requires_grad) {
              for (std::size_t i = 0; i < len; ++i) in->grad[i] += on->grad[off + i];
            }
            off += len;
          }
        },
        on);
  }
  return out;
}

Tensor index_rows(const Tensor& a, const std::vector<int>& idx) {
  require_defined(a, "index_rows");
  if (idx.empty()) throw DimensionError("index_rows: empty index list");
  const int n = a.rows(), m = a.cols();
  for (int i : idx) {
    require(i >= 0 && i < n, "index_rows: index out of range");
  }
  std::vector<double> data(idx.size() * static_cast<std::size_t>(m));
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const std::size_t src = static_cast<std::size_t>(idx[r]) * m;
    for (int j = 0; j < m; ++j) data[r * m + j] = a.values()[src + j];
  }
  Tensor out = detail::wrap_node(new_node(static_cast<int>(idx.size()), m, std::move(data)));
  if (grad_wanted({&a})) {
    attach_to_tape(out);
    auto an = a.node(), on = out.node();
    const std::vector<int> captured = idx;
    g_active_tape->record(
        [an, on, captured, m] {
          for (std::size_t r = 0; r < captured.size(); ++r) {
            const std::size_t dst = static_cast<std::size_t>(captured[r]) * m;
            for (int j = 0; j < m; ++j) an->grad[dst + j] += on->grad[r * m + j];
          }
        },
        on);
  }
  return out;
}

Tensor index_cols(const Tensor& a, const std::vector<int>& idx) {
  return transpose(index_rows(transpose(a), idx));
}

Tensor add_scalar(const Tensor& a, double s) {
  require_defined(a, "add_scalar");
  std::vector<double> data(a.values());
  for (double& x : data) x += s;
  check_finite(data, "add_scalar");
  Tensor out = detail::wrap_node(new_node(a.rows(), a.cols(), std::move(data)));
  if (grad_wanted({&a})) {
    attach_to_tape(out);
    auto an = a.node(), on = out.node();
    g_active_tape->record(
        [an, on] {
          for (std::size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i];
        },
        on);
  }
  return out;
}

Tensor mul_scalar(const Tensor& a, double s) {
  require_defined(a, "mul_scalar");
  std::vector<double> data(a.values());
  for (double& x : data) x *= s;
  check_finite(data, "mul_scalar");
  Tensor out = detail::wrap_node(new_node(a.rows(), a.cols(), std::move(data)));
  if (grad_wanted({&a})) {
    attach_to_tape(out);
    auto an = a.node(), on = out.node();
    g_active_tape->record(
        [an, on, s] {
          for (std::size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += s * on->grad[i];
        },
        on);
  }
  return out;
}

Tensor row(const Tensor& a, int i) { return index_rows(a, {i}); }

namespace debug {

void reset_margins() {
  g_relu_margin = std::numeric_limits<double>::infinity();
  g_cosine_norm_margin = std::numeric_limits<double>::infinity();
}

double relu_margin() { return g_relu_margin; }

double cosine_norm_margin() { return g_cosine_norm_margin; }

}  // namespace debug

}  // namespace gps
