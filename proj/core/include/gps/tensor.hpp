#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <vector>

#include "gps/error.hpp"
#include "gps/rng.hpp"

namespace gps {

class Tape;

class Tensor;

namespace detail {

struct TensorNode {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;   // row-major
  std::vector<double> grad;   // nonempty iff requires_grad
  bool requires_grad = false;
  Tape* origin = nullptr;     // tape that produced this node, null for leaves
};

Tensor wrap_node(std::shared_ptr<TensorNode> node);

}  // namespace detail

// Dense 2-D double tensor. A Tensor is a shared handle: copying it aliases
// the same storage (needed so gradients written during backward are visible
// through every handle); clone() makes a deep copy. All recorded arithmetic
// is done through the free functions below, which validate shapes, reject
// non-finite outputs and register backward rules on the active Tape.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(int rows, int cols);
  static Tensor ones(int rows, int cols);
  static Tensor full(int rows, int cols, double value);
  static Tensor scalar(double value);  // 1x1
  static Tensor from_data(int rows, int cols, std::vector<double> data);
  // Leaf with a gradient buffer.
  static Tensor param(int rows, int cols, std::vector<double> data);
  // Uniform random fill in [lo, hi).
  static Tensor uniform(int rows, int cols, double lo, double hi, Rng& rng,
                        bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  int rows() const { return node_->rows; }
  int cols() const { return node_->cols; }
  int size() const { return node_->rows * node_->cols; }
  bool requires_grad() const { return node_ && node_->requires_grad; }

  double at(int r, int c) const;
  double& at(int r, int c);  // mutable access; only meaningful on leaves
  const std::vector<double>& values() const { return node_->data; }
  std::vector<double>& values() { return node_->data; }
  const std::vector<double>& grad() const;
  double item() const;  // value of a 1x1 tensor

  void zero_grad();
  // Toggle the gradient buffer on a leaf. Error on tape-produced nodes.
  void set_requires_grad(bool on);
  // Deep copy; the result is a fresh leaf (no tape attachment).
  Tensor clone() const;

  // Identity of the underlying storage (aliasing test helper).
  bool same_storage(const Tensor& other) const { return node_ == other.node_; }

  std::shared_ptr<detail::TensorNode> node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::TensorNode> node) : node_(std::move(node)) {}
  std::shared_ptr<detail::TensorNode> node_;
  friend Tensor detail::wrap_node(std::shared_ptr<detail::TensorNode> node);
};

// Reverse-mode tape. Records one backward rule per operation, in execution
// order; backward() replays them once in reverse. A tape is single-threaded
// and must not be shared.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Seeds d(loss)/d(loss) = 1 and propagates to every reachable leaf with a
  // gradient buffer. Leaf gradients accumulate (+=); intermediate gradients
  // start from zero. Throws StateError on a second call without rewind() or
  // reset(), and if loss is not a scalar produced on this tape.
  void backward(const Tensor& loss);

  // Re-arms the tape for another backward over the same recorded ops:
  // zeroes every intermediate gradient and clears the consumed flag.
  // Leaf gradients are left to the caller.
  void rewind();

  // Drops all recorded operations.
  void reset();

  std::size_t op_count() const { return ops_.size(); }
  bool consumed() const { return consumed_; }

  // The tape new operations record onto, or nullptr (thread-local).
  static Tape* active();

  // Internal: register a backward rule for `out`.
  void record(std::function<void()> backward_fn, std::shared_ptr<detail::TensorNode> out);

 private:
  struct Op {
    std::function<void()> backward;
    std::shared_ptr<detail::TensorNode> out;
  };
  std::vector<Op> ops_;
  bool consumed_ = false;
  friend class TapeScope;
};

// RAII activation of a tape on the current thread. Scopes nest.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

// ---- The closed operation set -------------------------------------------
// Every op validates shapes (DimensionError), rejects non-finite outputs
// (NumericError), and records a backward rule when a tape is active and any
// input requires a gradient.

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
// Broadcast-mul: scales row i of m by column vector v[i] (v is n x 1).
Tensor scale_rows(const Tensor& m, const Tensor& v);
// Adds row vector r (1 x d) to every row of m (n x d).
Tensor add_rowvec(const Tensor& m, const Tensor& r);
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor relu(const Tensor& a);
Tensor tanh_op(const Tensor& a);
Tensor exp_op(const Tensor& a);
Tensor log_op(const Tensor& a);
Tensor reciprocal(const Tensor& a);
// Numerically safe softmax over each row (per-row max subtraction).
Tensor row_softmax(const Tensor& a);
Tensor row_sum(const Tensor& a);   // n x d -> n x 1
Tensor col_sum(const Tensor& a);   // n x d -> 1 x d
Tensor mean_all(const Tensor& a);  // -> 1 x 1
Tensor l2_norm_rows(const Tensor& a);  // n x d -> n x 1
// Cosine similarity of two 1 x d rows -> 1 x 1. NumericError on zero norm.
Tensor cosine_sim(const Tensor& a, const Tensor& b);
Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor index_rows(const Tensor& a, const std::vector<int>& idx);
// Column selection, composed from transpose + index_rows.
Tensor index_cols(const Tensor& a, const std::vector<int>& idx);
Tensor add_scalar(const Tensor& a, double s);
Tensor mul_scalar(const Tensor& a, double s);

// Single row i of a as a 1 x d tensor.
Tensor row(const Tensor& a, int i);

namespace debug {
// Minimum |x| seen at relu inputs and minimum row norm seen by cosine_sim
// since the last reset. Gradient-vs-finite-difference tests use these to
// reject fixtures that sit too close to a kink for the step size.
void reset_margins();
double relu_margin();
double cosine_norm_margin();
}  // namespace debug

}  // namespace gps
