#include <cmath>
#include <functional>
#include <vector>

#include <doctest.h>

#include "gps/finite_diff.hpp"
#include "gps/tensor.hpp"
#include "support.hpp"

using namespace gps;
using testsupport::max_rel_error;

TEST_CASE("matmul against identity") {
  Tensor a = Tensor::from_data(2, 2, {1, 2, 3, 4});
  Tensor eye = Tensor::from_data(2, 2, {1, 0, 0, 1});
  Tensor out = matmul(a, eye);
  CHECK(out.values() == std::vector<double>{1, 2, 3, 4});
}

TEST_CASE("row_softmax of a symmetric row is uniform") {
  Tensor x = Tensor::from_data(1, 2, {0, 0});
  Tensor s = row_softmax(x);
  CHECK(s.at(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.at(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("cosine similarity of a vector with itself is 1") {
  Rng rng(7);
  Tensor v = Tensor::uniform(1, 5, -1.0, 1.0, rng);
  CHECK(cosine_sim(v, v).item() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cosine similarity rejects zero-norm rows") {
  Tensor z = Tensor::zeros(1, 3);
  Tensor v = Tensor::from_data(1, 3, {1, 2, 3});
  CHECK_THROWS_AS(cosine_sim(z, v), NumericError);
}

TEST_CASE("shape mismatches raise dimension errors") {
  Tensor a = Tensor::zeros(2, 3);
  Tensor b = Tensor::zeros(3, 2);
  CHECK_THROWS_AS(add(a, b), DimensionError);
  CHECK_THROWS_AS(mul(a, b), DimensionError);
  CHECK_THROWS_AS(matmul(a, a), DimensionError);
  CHECK_THROWS_AS(index_rows(a, {5}), DimensionError);
}

TEST_CASE("non-finite outputs raise numeric errors") {
  Tensor big = Tensor::full(1, 1, 1e308);
  CHECK_THROWS_AS(exp_op(big), NumericError);
  Tensor neg = Tensor::full(1, 1, -1.0);
  CHECK_THROWS_AS(log_op(neg), NumericError);
  Tensor zero = Tensor::zeros(1, 1);
  CHECK_THROWS_AS(reciprocal(zero), NumericError);
}

TEST_CASE("backward of mean_all spreads gradient uniformly") {
  Tensor x = Tensor::param(2, 2, {1, 2, 3, 4});
  Tape tape;
  {
    TapeScope scope(tape);
    Tensor loss = mean_all(x);
    tape.backward(loss);
  }
  for (double g : x.grad()) CHECK(g == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("gradient of cosine at aligned inputs is orthogonal to the input") {
  Rng rng(3);
  Tensor c = Tensor::uniform(1, 4, -1.0, 1.0, rng);
  Tensor v = Tensor::param(1, 4, c.values());
  Tape tape;
  {
    TapeScope scope(tape);
    tape.backward(cosine_sim(v, c));
  }
  double dot = 0.0;
  for (int j = 0; j < 4; ++j) dot += v.grad()[static_cast<std::size_t>(j)] * v.at(0, j);
  CHECK(std::fabs(dot) < 1e-8);
}

TEST_CASE("backward twice without rewind is a state error") {
  Tensor x = Tensor::param(1, 2, {1, 2});
  Tape tape;
  TapeScope scope(tape);
  Tensor loss = mean_all(x);
  tape.backward(loss);
  CHECK_THROWS_AS(tape.backward(loss), StateError);
  tape.rewind();
  x.zero_grad();
  tape.backward(loss);
  CHECK(x.grad()[0] == doctest::Approx(0.5));
}

TEST_CASE("backward on a foreign or missing tape is a state error") {
  Tensor x = Tensor::param(1, 1, {2.0});
  Tape tape;
  CHECK_THROWS_AS(tape.backward(x), StateError);  // empty tape
  Tape other;
  {
    TapeScope scope(tape);
    Tensor loss = mean_all(x);
    CHECK_THROWS_AS(other.backward(loss), StateError);
  }
}

TEST_CASE("non-scalar loss is rejected") {
  Tensor x = Tensor::param(2, 2, {1, 2, 3, 4});
  Tape tape;
  TapeScope scope(tape);
  Tensor y = add(x, x);
  CHECK_THROWS_AS(tape.backward(y), DimensionError);
}

TEST_CASE("finite_diff_grad on sum of squares") {
  Tensor x = Tensor::from_data(1, 1, {3.0});
  auto f = [&] {
    double s = 0.0;
    for (double v : x.values()) s += v * v;
    return s;
  };
  Tensor g = finite_diff_grad(f, x, 1e-5);
  CHECK(g.item() == doctest::Approx(6.0).epsilon(1e-6));
}

TEST_CASE("finite_diff_grad matches the softmax jacobian at the origin") {
  Tensor x = Tensor::from_data(1, 2, {0.0, 0.0});
  auto f = [&] { return row_softmax(x).at(0, 0); };
  Tensor g = finite_diff_grad(f, x, 1e-5);
  // Analytic jacobian row at (0,0): s0(1-s0) = 0.25 and -s0*s1 = -0.25.
  CHECK(g.at(0, 0) == doctest::Approx(0.25).epsilon(1e-5));
  CHECK(g.at(0, 1) == doctest::Approx(-0.25).epsilon(1e-5));
}

TEST_CASE("finite_diff_grad of a constant is zero") {
  Tensor x = Tensor::from_data(2, 2, {1, 2, 3, 4});
  auto f = [&] { return 42.0; };
  Tensor g = finite_diff_grad(f, x, 1e-5);
  for (double v : g.values()) CHECK(v == 0.0);
}

namespace {

// Scalarizes an op output deterministically so every entry contributes with
// distinct weight, then checks analytic vs central-difference gradients.
double weighted_sum(const Tensor& t) {
  double s = 0.0;
  for (int i = 0; i < t.rows(); ++i) {
    for (int j = 0; j < t.cols(); ++j) {
      s += (0.3 + 0.17 * i + 0.07 * j) * t.at(i, j);
    }
  }
  return s;
}

Tensor weighted_scalar(const Tensor& t) {
  Tensor weights = Tensor::zeros(t.rows(), t.cols());
  for (int i = 0; i < t.rows(); ++i) {
    for (int j = 0; j < t.cols(); ++j) weights.at(i, j) = 0.3 + 0.17 * i + 0.07 * j;
  }
  return mul_scalar(mean_all(mul(t, weights)), static_cast<double>(t.size()));
}

void check_op_gradient(const std::function<Tensor()>& forward, std::vector<Tensor> leaves,
                       double tolerance = 1e-4) {
  Tape tape;
  {
    TapeScope scope(tape);
    tape.backward(weighted_scalar(forward()));
  }
  auto f = [&] { return weighted_sum(forward()); };
  for (Tensor& leaf : leaves) {
    Tensor fd = finite_diff_grad(f, leaf, 1e-5);
    CHECK(max_rel_error(leaf.grad(), fd.values()) < tolerance);
  }
}

}  // namespace

TEST_CASE("every op matches finite differences on random inputs") {
  Rng rng(11);
  Tensor a = Tensor::uniform(3, 4, -1.0, 1.0, rng, true);
  Tensor b = Tensor::uniform(3, 4, -1.0, 1.0, rng, true);
  Tensor v = Tensor::uniform(3, 1, -1.0, 1.0, rng, true);
  Tensor r = Tensor::uniform(1, 4, -1.0, 1.0, rng, true);
  Tensor m = Tensor::uniform(4, 2, -1.0, 1.0, rng, true);
  Tensor pos = Tensor::uniform(3, 4, 0.5, 1.5, rng, true);
  Tensor row_a = Tensor::uniform(1, 5, -1.0, 1.0, rng, true);
  Tensor row_b = Tensor::uniform(1, 5, -1.0, 1.0, rng, true);

  check_op_gradient([&] { return add(a, b); }, {a, b});
  check_op_gradient([&] { return sub(a, b); }, {a, b});
  check_op_gradient([&] { return mul(a, b); }, {a, b});
  check_op_gradient([&] { return scale_rows(a, v); }, {a, v});
  check_op_gradient([&] { return add_rowvec(a, r); }, {a, r});
  check_op_gradient([&] { return matmul(a, m); }, {a, m});
  check_op_gradient([&] { return transpose(a); }, {a});
  check_op_gradient([&] { return relu(a); }, {a});
  check_op_gradient([&] { return tanh_op(a); }, {a});
  check_op_gradient([&] { return exp_op(a); }, {a});
  check_op_gradient([&] { return log_op(pos); }, {pos});
  check_op_gradient([&] { return reciprocal(pos); }, {pos});
  check_op_gradient([&] { return row_softmax(a); }, {a});
  check_op_gradient([&] { return row_sum(a); }, {a});
  check_op_gradient([&] { return col_sum(a); }, {a});
  check_op_gradient([&] { return mean_all(a); }, {a});
  check_op_gradient([&] { return l2_norm_rows(pos); }, {pos});
  check_op_gradient([&] { return cosine_sim(row_a, row_b); }, {row_a, row_b});
  check_op_gradient([&] { return concat_rows({a, b}); }, {a, b});
  check_op_gradient([&] { return index_rows(a, {2, 0, 2}); }, {a});
  check_op_gradient([&] { return index_cols(a, {3, 1}); }, {a});
  check_op_gradient([&] { return add_scalar(a, 0.7); }, {a});
  check_op_gradient([&] { return mul_scalar(a, -1.3); }, {a});
}

TEST_CASE("row_softmax rows sum to one and are shift invariant") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor x = Tensor::uniform(4, 6, -1.0, 1.0, rng);
    Tensor s = row_softmax(x);
    for (int i = 0; i < s.rows(); ++i) {
      double sum = 0.0;
      for (int j = 0; j < s.cols(); ++j) sum += s.at(i, j);
      CHECK(std::fabs(sum - 1.0) < 1e-9);
    }
    const double shift = rng.uniform(-3.0, 3.0);
    Tensor shifted = row_softmax(add_scalar(x, shift));
    for (std::size_t i = 0; i < s.values().size(); ++i) {
      CHECK(std::fabs(s.values()[i] - shifted.values()[i]) < 1e-9);
    }
  }
}

TEST_CASE("backward of a sum of losses equals the sum of separate backwards") {
  Rng rng(13);
  const std::vector<double> init = Tensor::uniform(3, 3, -1.0, 1.0, rng).values();

  auto run = [&](bool combined) {
    Tensor x = Tensor::param(3, 3, init);
    Tape tape;
    TapeScope scope(tape);
    Tensor loss_a = mean_all(mul(x, x));
    Tensor loss_b = mean_all(tanh_op(x));
    if (combined) {
      tape.backward(add(loss_a, loss_b));
      return x.grad();
    }
    tape.backward(loss_a);
    std::vector<double> grads = x.grad();
    x.zero_grad();
    tape.rewind();
    tape.backward(loss_b);
    for (std::size_t i = 0; i < grads.size(); ++i) grads[i] += x.grad()[i];
    return grads;
  };

  const std::vector<double> combined = run(true);
  const std::vector<double> separate = run(false);
  for (std::size_t i = 0; i < combined.size(); ++i) {
    CHECK(std::fabs(combined[i] - separate[i]) < 1e-10);
  }
}

TEST_CASE("gradients accumulate across fan-out until zeroed") {
  Tensor x = Tensor::param(1, 1, {2.0});
  Tape tape;
  {
    TapeScope scope(tape);
    Tensor y = mul(x, x);  // x used twice
    tape.backward(mean_all(y));
  }
  CHECK(x.grad()[0] == doctest::Approx(4.0));
  x.zero_grad();
  CHECK(x.grad()[0] == 0.0);
}

TEST_CASE("unreachable leaves keep zero gradients") {
  Tensor x = Tensor::param(1, 1, {1.0});
  Tensor unused = Tensor::param(1, 1, {5.0});
  Tape tape;
  {
    TapeScope scope(tape);
    Tensor touched = add_scalar(unused, 1.0);  // recorded but not part of the loss
    CHECK(touched.defined());
    tape.backward(mean_all(mul(x, x)));
  }
  CHECK(unused.grad()[0] == 0.0);
  CHECK(x.grad()[0] == doctest::Approx(2.0));
}

TEST_CASE("ops outside a tape scope record nothing") {
  Tensor x = Tensor::param(2, 2, {1, 2, 3, 4});
  Tensor y = relu(x);
  CHECK_FALSE(y.requires_grad());
  Tape tape;
  CHECK(tape.op_count() == 0);
}
