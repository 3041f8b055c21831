#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "stlgru/autodiff.hpp"
#include "stlgru/matrix.hpp"
#include "stlgru/parameters.hpp"
#include "support.hpp"

using namespace stlgru;
using testing::naive_matmul;
using testing::op_gradient_error;
using testing::random_matrix;

TEST_CASE("matmul small cases") {
  std::mt19937_64 rng(1);
  const Matrix m = random_matrix(3, 3, rng);
  CHECK(matmul(Matrix::identity(3), m) == m);
  CHECK(matmul(Matrix{{1, 2}, {3, 4}}, Matrix{{0}, {1}}) == Matrix{{2}, {4}});
}

TEST_CASE("matmul agrees with the triple loop") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix a = random_matrix(7, 5, rng), b = random_matrix(5, 3, rng);
    const Matrix ref = naive_matmul(a, b);
    CHECK(max_abs_diff(matmul(a, b), ref) <= 1e-12 * std::max(1.0, max_abs(ref)));
    CHECK(max_abs_diff(matmul_nt(a, transpose(b)), ref) <= 1e-12 * std::max(1.0, max_abs(ref)));
    CHECK(max_abs_diff(matmul_tn(transpose(a), b), ref) <= 1e-12 * std::max(1.0, max_abs(ref)));
  }
}

TEST_CASE("matmul is associative") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> dim(1, 9);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t p = dim(rng), q = dim(rng), r = dim(rng), s = dim(rng);
    const Matrix a = random_matrix(p, q, rng), b = random_matrix(q, r, rng),
                 c = random_matrix(r, s, rng);
    const Matrix left = matmul(matmul(a, b), c), right = matmul(a, matmul(b, c));
    CHECK(max_abs_diff(left, right) <= 1e-9 * std::max(1.0, max_abs(left)));
  }
}

TEST_CASE("matmul rejects mismatched shapes") {
  CHECK_THROWS_AS(matmul(Matrix(2, 3), Matrix(2, 3)), ShapeError);
  CHECK_THROWS_AS(add(Matrix(2, 3), Matrix(3, 2)), ShapeError);
  CHECK_THROWS_AS(Matrix(2, 2, std::vector<double>{1, 2, 3}), ShapeError);
}

TEST_CASE("row_softmax examples") {
  const Matrix p = row_softmax(Matrix{{1, 1}, {0, std::log(3.0)}, {1000, 1000}});
  CHECK(p(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p(1, 0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(p(1, 1) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(p(2, 0) == 0.5);
  CHECK(p(2, 1) == 0.5);
}

TEST_CASE("row_softmax rows sum to one and ignore row shifts") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> shift(-500.0, 500.0);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix m = random_matrix(4, 6, rng, 10.0);
    Matrix shifted = m;
    for (std::size_t r = 0; r < m.rows(); ++r) {
      const double s = shift(rng);
      for (double& v : shifted.row(r)) v += s;
    }
    const Matrix p = row_softmax(m), q = row_softmax(shifted);
    for (std::size_t r = 0; r < p.rows(); ++r) {
      double total = 0.0;
      for (double v : p.row(r)) total += v;
      CHECK(std::abs(total - 1.0) <= 1e-9);
    }
    CHECK(max_abs_diff(p, q) <= 1e-9);
  }
}

TEST_CASE("kernels stay finite on extreme inputs") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> big(-1e3, 1e3);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix m(5, 5);
    for (double& v : m.values()) v = big(rng);
    CHECK(all_finite(sigmoid(m)));
    CHECK(all_finite(stlgru::tanh(m)));
    CHECK(all_finite(relu(m)));
    CHECK(all_finite(row_softmax(m)));
    CHECK(all_finite(matmul(m, m)));
  }
  CHECK(logistic(-1e3) >= 0.0);
  CHECK(logistic(1e3) == 1.0);
}

TEST_CASE("gradient of sum of squares") {
  ParameterStore store;
  store.add("p", Matrix{{3.0}});
  store.add("q", Matrix{{1.0, 2.0}});
  Tape t;
  Bindings b(t, store);
  const Var loss = ad::sum_squares(t, b["p"]);
  const auto g = gradient_of_scalar(t, loss, b, store);
  CHECK(g[0](0, 0) == 6.0);
  CHECK(max_abs(g[1]) == 0.0);
  CHECK(store.grad("p")(0, 0) == 6.0);
}

TEST_CASE("backward requires a scalar root") {
  Tape t;
  const Var x = t.leaf(Matrix(2, 2, 1.0));
  CHECK_THROWS_AS(t.backward(x), ContractError);
}

TEST_CASE("finite differences on simple objectives") {
  ParameterStore store;
  store.add("x", Matrix{{3.0}});
  const auto square = [](const ParameterStore& p) {
    const double x = p.value("x")(0, 0);
    return x * x;
  };
  CHECK(std::abs(finite_difference_gradient(square, store, 1e-5)[0](0, 0) - 6.0) <= 1e-8);
  const auto constant = [](const ParameterStore&) { return 4.0; };
  CHECK(max_abs(finite_difference_gradient(constant, store, 1e-5)[0]) == 0.0);
  CHECK_THROWS_AS(finite_difference_gradient(square, store, 0.0), std::invalid_argument);
  const auto bad = [](const ParameterStore&) { return std::numeric_limits<double>::quiet_NaN(); };
  CHECK_THROWS_AS(finite_difference_gradient(bad, store, 1e-5), OracleError);
}

TEST_CASE("every tape op matches finite differences") {
  std::mt19937_64 rng(6);
  const Matrix a = random_matrix(4, 3, rng), b = random_matrix(3, 5, rng),
               c = random_matrix(4, 3, rng), bias = random_matrix(1, 3, rng),
               sq = random_matrix(4, 4, rng);
  const Matrix probs = testing::uniform_matrix(4, 3, rng, 0.1, 0.9);
  const Matrix adj = testing::uniform_matrix(4, 4, rng, 0.05, 0.95);
  using V = std::vector<Var>;
  const double tol = 1e-4;

  CHECK(op_gradient_error({a, b}, [](Tape& t, const V& x) { return ad::matmul(t, x[0], x[1]); }) <= tol);
  CHECK(op_gradient_error({a, c}, [](Tape& t, const V& x) { return ad::matmul_nt(t, x[0], x[1]); }) <= tol);
  CHECK(op_gradient_error({a}, [](Tape& t, const V& x) { return ad::transpose(t, x[0]); }) <= tol);
  CHECK(op_gradient_error({a, c}, [](Tape& t, const V& x) { return ad::add(t, x[0], x[1]); }) <= tol);
  CHECK(op_gradient_error({a, c}, [](Tape& t, const V& x) { return ad::sub(t, x[0], x[1]); }) <= tol);
  CHECK(op_gradient_error({a, c}, [](Tape& t, const V& x) { return ad::hadamard(t, x[0], x[1]); }) <= tol);
  CHECK(op_gradient_error({a}, [](Tape& t, const V& x) { return ad::scale(t, x[0], -2.5); }) <= tol);
  CHECK(op_gradient_error({a}, [](Tape& t, const V& x) { return ad::one_minus(t, x[0]); }) <= tol);
  CHECK(op_gradient_error({a, bias}, [](Tape& t, const V& x) { return ad::add_row_vector(t, x[0], x[1]); }) <= tol);
  CHECK(op_gradient_error({a}, [](Tape& t, const V& x) { return ad::sigmoid(t, x[0]); }) <= tol);
  CHECK(op_gradient_error({a}, [](Tape& t, const V& x) { return ad::tanh(t, x[0]); }) <= tol);
  CHECK(op_gradient_error({a}, [](Tape& t, const V& x) { return ad::relu(t, x[0]); }) <= tol);
  CHECK(op_gradient_error({probs}, [](Tape& t, const V& x) { return ad::logit(t, x[0]); }) <= tol);
  CHECK(op_gradient_error({a}, [](Tape& t, const V& x) { return ad::row_softmax(t, x[0]); }) <= tol);
  CHECK(op_gradient_error({a}, [](Tape& t, const V& x) { return ad::block_col_softmax(t, x[0], 2); }) <= tol);
  CHECK(op_gradient_error({a, c}, [](Tape& t, const V& x) { return ad::vstack(t, x[0], x[1]); }) <= tol);
  CHECK(op_gradient_error({a}, [](Tape& t, const V& x) { return ad::row_slice(t, x[0], 1, 2); }) <= tol);
  CHECK(op_gradient_error({sq, random_matrix(8, 3, rng)},
                          [](Tape& t, const V& x) { return ad::propagate(t, x[0], x[1]); }) <= tol);
  CHECK(op_gradient_error({adj}, [](Tape& t, const V& x) { return ad::normalize_adjacency(t, x[0]); }) <= tol);
  CHECK(op_gradient_error({a, c}, [](Tape& t, const V& x) { return ad::mean_squared_error(t, x[0], x[1]); }) <= tol);
  CHECK(op_gradient_error({a}, [](Tape& t, const V& x) { return ad::sum_squares(t, x[0]); }) <= tol);
}

TEST_CASE("logit rejects values outside the unit interval") {
  Tape t;
  CHECK_THROWS_AS(ad::logit(t, t.constant(Matrix{{0.0}})), std::domain_error);
  CHECK_THROWS_AS(ad::logit(t, t.constant(Matrix{{1.0}})), std::domain_error);
}

TEST_CASE("gradients accumulate across fan-out") {
  ParameterStore store;
  store.add("x", Matrix{{2.0}});
  Tape t;
  Bindings b(t, store);
  // x·x + x  ⇒  2x + 1 = 5
  const Var y = ad::sum(t, ad::add(t, ad::hadamard(t, b["x"], b["x"]), b["x"]));
  CHECK(gradient_of_scalar(t, y, b, store)[0](0, 0) == 5.0);
}
