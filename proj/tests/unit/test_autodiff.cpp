#include <cmath>
#include <functional>

#include "doctest.h"

#include "finite_diff.hpp"
#include "hgen/binding.hpp"
#include "hgen/error.hpp"
#include "hgen/ops.hpp"
#include "hgen/optim.hpp"

using namespace hgen;
using hgen::testing::check_gradients;
using hgen::testing::GradCheckOptions;
using hgen::testing::GradCheckResult;

namespace {

Matrix random_matrix(Index rows, Index cols, Rng& rng, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

// FD harness for one op: loss = sum(weight ⊙ op(params)), where `weight` is
// a fixed random matrix so misrouted gradients cannot cancel out.
GradCheckResult check_op(
    const std::function<Tensor(TapeBinder&)>& build,
    std::vector<Matrix> param_values, std::uint64_t seed,
    GradCheckOptions opt = {}) {
  ParamStore store;
  std::vector<int> ids;
  for (auto& v : param_values) ids.push_back(store.add("p", std::move(v)));

  // probe output shape to size the weighting matrix
  TapeBinder probe(store, nullptr);
  Tensor probe_out = build(probe);
  Rng rng(seed);
  const Matrix weight = random_matrix(probe_out.rows(), probe_out.cols(), rng);

  store.zero_grads();
  Tape tape;
  TapeBinder binder(store, &tape);
  Tensor loss = sum_all(mul(build(binder), Tensor(weight)));
  tape.backward(loss);
  binder.write_back_grads();

  std::vector<Matrix*> params;
  std::vector<const Matrix*> grads;
  for (int id : ids) {
    params.push_back(&store.at(id).value);
    grads.push_back(&store.at(id).grad);
  }
  auto value_fn = [&]() {
    TapeBinder b(store, nullptr);
    Tensor out = mul(build(b), Tensor(weight));
    double s = 0.0;
    for (Index i = 0; i < out.value().size(); ++i) s += out.value().data()[i];
    return s;
  };
  return check_gradients(value_fn, params, grads, opt);
}

void expect_gradcheck_clean(const GradCheckResult& r) {
  CAPTURE(r.max_rel_err);
  CAPTURE(r.checked);
  CAPTURE(r.skipped_kinks);
  CHECK(r.checked > 0);
  CHECK(r.all_loose());
  CHECK(r.strict_fraction() >= 0.95);
}

}  // namespace

TEST_CASE("matmul by identity returns the operand") {
  Rng rng(1);
  Matrix m = random_matrix(2, 3, rng);
  Tensor out = matmul(Tensor(Matrix::identity(2)), Tensor(m));
  for (Index i = 0; i < m.size(); ++i)
    CHECK(out.value().data()[i] == m.data()[i]);
}

TEST_CASE("matmul gradients match finite differences") {
  Rng rng(2);
  expect_gradcheck_clean(check_op(
      [](TapeBinder& b) { return matmul(b.use(0), b.use(1)); },
      {random_matrix(3, 4, rng), random_matrix(4, 2, rng)}, 11));
}

TEST_CASE("broadcast add back-reduces over the broadcast axis") {
  Rng rng(3);
  // row-vector bias broadcast over rows: grad of bias = column sums of g
  ParamStore store;
  int a = store.add("a", random_matrix(4, 3, rng));
  int bias = store.add("bias", random_matrix(1, 3, rng));
  store.zero_grads();
  Tape tape;
  TapeBinder binder(store, &tape);
  Tensor loss = sum_all(add(binder.use(a), binder.use(bias)));
  tape.backward(loss);
  binder.write_back_grads();
  for (Index c = 0; c < 3; ++c)
    CHECK(store.at(bias).grad(0, c) == doctest::Approx(4.0));  // column sum of ones

  expect_gradcheck_clean(check_op(
      [](TapeBinder& b) { return add(b.use(0), b.use(1)); },
      {random_matrix(4, 3, rng), random_matrix(1, 3, rng)}, 12));
  expect_gradcheck_clean(check_op(
      [](TapeBinder& b) { return sub(b.use(0), b.use(1)); },
      {random_matrix(4, 3, rng), random_matrix(4, 1, rng)}, 13));
  expect_gradcheck_clean(check_op(
      [](TapeBinder& b) { return mul(b.use(0), b.use(1)); },
      {random_matrix(4, 3, rng), random_matrix(4, 1, rng)}, 14));
}

TEST_CASE("scale by zero zeroes values and gradients") {
  ParamStore store;
  Rng rng(4);
  int a = store.add("a", random_matrix(2, 2, rng));
  store.zero_grads();
  Tape tape;
  TapeBinder binder(store, &tape);
  Tensor out = scale(binder.use(a), 0.0);
  for (Index i = 0; i < out.value().size(); ++i)
    CHECK(out.value().data()[i] == 0.0);
  tape.backward(sum_all(out));
  binder.write_back_grads();
  for (Index i = 0; i < store.at(a).grad.size(); ++i)
    CHECK(store.at(a).grad.data()[i] == 0.0);
}

TEST_CASE("activations: values and kink conventions") {
  Tensor x(Matrix::of({{-1.0, 0.0, 2.0}}));
  Tensor r = relu(x);
  CHECK(r.value()(0, 0) == 0.0);
  CHECK(r.value()(0, 1) == 0.0);
  CHECK(r.value()(0, 2) == 2.0);

  Tensor l = leaky_relu(Tensor(Matrix::of({{-1.0}})), 0.2);
  CHECK(l.value()(0, 0) == doctest::Approx(-0.2));

  // subgradient at 0 is the negative-side slope
  ParamStore store;
  int id = store.add("x", Matrix::of({{0.0, 0.0}}));
  store.zero_grads();
  Tape tape;
  TapeBinder binder(store, &tape);
  tape.backward(sum_all(leaky_relu(binder.use(id), 0.25)));
  binder.write_back_grads();
  CHECK(store.at(id).grad(0, 0) == doctest::Approx(0.25));
}

TEST_CASE("activation gradients match finite differences away from kinks") {
  Rng rng(5);
  expect_gradcheck_clean(check_op(
      [](TapeBinder& b) { return relu(b.use(0)); },
      {random_matrix(3, 5, rng)}, 20));
  expect_gradcheck_clean(check_op(
      [](TapeBinder& b) { return leaky_relu(b.use(0), 0.2); },
      {random_matrix(3, 5, rng)}, 21));
  expect_gradcheck_clean(check_op(
      [](TapeBinder& b) { return elu(b.use(0)); },
      {random_matrix(3, 5, rng)}, 22));
}

TEST_CASE("concat_cols values and gradient block split") {
  Rng rng(6);
  Matrix a = random_matrix(2, 1, rng);
  Matrix b = random_matrix(2, 2, rng);
  Tensor one = concat_cols({Tensor(a)});
  CHECK(one.rows() == 2);
  CHECK(one.cols() == 1);
  Tensor two = concat_cols({Tensor(a), Tensor(b)});
  CHECK(two.rows() == 2);
  CHECK(two.cols() == 3);
  CHECK(two.value()(1, 2) == b(1, 1));

  expect_gradcheck_clean(check_op(
      [](TapeBinder& bd) {
        return concat_cols({bd.use(0), bd.use(1)});
      },
      {random_matrix(3, 2, rng), random_matrix(3, 4, rng)}, 23));
  expect_gradcheck_clean(check_op(
      [](TapeBinder& bd) {
        return concat_rows({bd.use(0), bd.use(1)});
      },
      {random_matrix(2, 3, rng), random_matrix(4, 3, rng)}, 24));
  expect_gradcheck_clean(check_op(
      [](TapeBinder& bd) { return transpose(bd.use(0)); },
      {random_matrix(3, 4, rng)}, 25));
  expect_gradcheck_clean(check_op(
      [](TapeBinder& bd) { return slice_cols(bd.use(0), 1, 2); },
      {random_matrix(3, 4, rng)}, 26));
}

TEST_CASE("row reductions: mean, max, tie break to lowest column") {
  Tensor m(Matrix::of({{1.0, 3.0}}));
  CHECK(row_mean(m).value()(0, 0) == doctest::Approx(2.0));
  CHECK(row_max(m).value()(0, 0) == doctest::Approx(3.0));
  CHECK(row_min(m).value()(0, 0) == doctest::Approx(1.0));

  // tie case routes gradient to column 0
  ParamStore store;
  int id = store.add("x", Matrix::of({{2.0, 2.0}}));
  store.zero_grads();
  Tape tape;
  TapeBinder binder(store, &tape);
  tape.backward(row_max(binder.use(id)));
  binder.write_back_grads();
  CHECK(store.at(id).grad(0, 0) == 1.0);
  CHECK(store.at(id).grad(0, 1) == 0.0);

  Rng rng(7);
  expect_gradcheck_clean(check_op(
      [](TapeBinder& b) { return row_mean(b.use(0)); },
      {random_matrix(4, 3, rng)}, 27));
  expect_gradcheck_clean(check_op(
      [](TapeBinder& b) { return row_min(b.use(0)); },
      {random_matrix(4, 3, rng)}, 28));
  expect_gradcheck_clean(check_op(
      [](TapeBinder& b) { return row_max(b.use(0)); },
      {random_matrix(4, 3, rng)}, 29));
}

TEST_CASE("row_minmax_normalize: degenerate rows, range, gradients") {
  // constant row (k=1 case included) maps to zeros
  Tensor degenerate(Matrix::of({{0.7}, {0.0}}));
  Tensor z = row_minmax_normalize(degenerate);
  CHECK(z.value()(0, 0) == 0.0);
  CHECK(z.value()(1, 0) == 0.0);

  Tensor row(Matrix::of({{-0.2, 0.2}}));
  Tensor nm = row_minmax_normalize(row);
  CHECK(nm.value()(0, 0) == doctest::Approx(0.0));
  CHECK(nm.value()(0, 1) == doctest::Approx(1.0));

  Rng rng(8);
  expect_gradcheck_clean(check_op(
      [](TapeBinder& b) { return row_minmax_normalize(b.use(0)); },
      {random_matrix(5, 4, rng)}, 30));
}

TEST_CASE("dropout mask: rate zero, expectation, determinism") {
  Rng rng(9);
  Tensor ones = dropout_mask(3, 3, 0.0, rng);
  for (Index i = 0; i < ones.value().size(); ++i)
    CHECK(ones.value().data()[i] == 1.0);

  Rng r1(42), r2(42);
  Tensor m1 = dropout_mask(10, 10, 0.4, r1);
  Tensor m2 = dropout_mask(10, 10, 0.4, r2);
  for (Index i = 0; i < m1.value().size(); ++i)
    CHECK(m1.value().data()[i] == m2.value().data()[i]);

  // inverted dropout keeps the expectation at 1
  Rng r3(7);
  double sum = 0.0;
  const int draws = 100000;
  Tensor big = dropout_mask(draws / 100, 100, 0.3, r3);
  for (Index i = 0; i < big.value().size(); ++i) sum += big.value().data()[i];
  CHECK(sum / draws == doctest::Approx(1.0).epsilon(0.02));

  CHECK_THROWS_AS(dropout_mask(2, 2, 1.0, rng), ValidationError);
  CHECK_THROWS_AS(dropout_mask(2, 2, -0.1, rng), ValidationError);
}

TEST_CASE("softmax cross entropy: stability, uniform value, oracle") {
  std::vector<int> labels{0};
  std::vector<Index> subset{0};
  Tensor big(Matrix::of({{1000.0, 0.0}}));
  const double loss = softmax_cross_entropy(big, labels, subset).scalar_value();
  CHECK(std::isfinite(loss));
  CHECK(loss == doctest::Approx(0.0).epsilon(1e-12));

  Tensor uniform(Matrix(3, 4, 0.25));
  std::vector<int> labels4{1, 2, 3};
  std::vector<Index> all{0, 1, 2};
  CHECK(softmax_cross_entropy(uniform, labels4, all).scalar_value() ==
        doctest::Approx(std::log(4.0)));

  // independent direct-formula oracle on a random 5x3 case
  Rng rng(10);
  Matrix z = random_matrix(5, 3, rng);
  std::vector<int> y{2, 0, 1, 1, 2};
  std::vector<Index> idx{0, 1, 2, 3, 4};
  double expected = 0.0;
  for (Index i = 0; i < 5; ++i) {
    double denom = 0.0;
    for (Index c = 0; c < 3; ++c) denom += std::exp(z(i, c));
    expected += -std::log(std::exp(z(i, y[static_cast<std::size_t>(i)])) / denom);
  }
  expected /= 5.0;
  CHECK(softmax_cross_entropy(Tensor(z), y, idx).scalar_value() ==
        doctest::Approx(expected).epsilon(1e-12));

  CHECK_THROWS_AS(softmax_cross_entropy(Tensor(z), y, {}), ValidationError);

  expect_gradcheck_clean(check_op(
      [&](TapeBinder& b) { return softmax_cross_entropy(b.use(0), y, idx); },
      {z}, 31));
}

TEST_CASE("l1 norm values and sign subgradient") {
  CHECK(l1_norm(Tensor(Matrix(3, 3, 0.0))).scalar_value() == 0.0);
  CHECK(l1_norm(Tensor(Matrix::of({{-1.0, 2.0}}))).scalar_value() ==
        doctest::Approx(3.0));

  ParamStore store;
  int id = store.add("x", Matrix::of({{-2.0, 0.0, 5.0}}));
  store.zero_grads();
  Tape tape;
  TapeBinder binder(store, &tape);
  tape.backward(l1_norm(binder.use(id)));
  binder.write_back_grads();
  CHECK(store.at(id).grad(0, 0) == -1.0);
  CHECK(store.at(id).grad(0, 1) == 0.0);  // sign(0) = 0
  CHECK(store.at(id).grad(0, 2) == 1.0);

  Rng rng(11);
  expect_gradcheck_clean(check_op(
      [](TapeBinder& b) { return l1_norm(b.use(0)); },
      {random_matrix(4, 4, rng)}, 32));
}

TEST_CASE("sparse-dense matmul against densified oracle") {
  SparseRealMatrix id2 = SparseRealMatrix::from_rows(
      2, 2, {{{0, 1.0}}, {{1, 1.0}}});
  Rng rng(12);
  Matrix d = random_matrix(2, 3, rng);
  Tensor out = sparse_dense_matmul(id2, Tensor(d));
  for (Index i = 0; i < d.size(); ++i)
    CHECK(out.value().data()[i] == d.data()[i]);

  SparseRealMatrix half = SparseRealMatrix::from_rows(
      2, 2, {{{0, 0.5}}, {{1, 0.5}}});
  Tensor halved = sparse_dense_matmul(half, Tensor(d));
  CHECK(halved.value()(1, 2) == doctest::Approx(0.5 * d(1, 2)));

  // random 6x6 vs dense multiply, exact to 1e-12
  std::vector<std::vector<std::pair<Index, double>>> rows(6);
  for (Index r = 0; r < 6; ++r)
    for (Index c = 0; c < 6; ++c)
      if (rng.uniform() < 0.4) rows[static_cast<std::size_t>(r)].emplace_back(c, rng.normal());
  SparseRealMatrix sp = SparseRealMatrix::from_rows(6, 6, rows);
  Matrix dense_in = random_matrix(6, 4, rng);
  Matrix expected = dense::matmul(sp.to_dense(), dense_in);
  Tensor got = sparse_dense_matmul(sp, Tensor(dense_in));
  for (Index i = 0; i < expected.size(); ++i)
    CHECK(got.value().data()[i] ==
          doctest::Approx(expected.data()[i]).epsilon(1e-12));

  expect_gradcheck_clean(check_op(
      [&](TapeBinder& b) { return sparse_dense_matmul(sp, b.use(0)); },
      {dense_in}, 33));
}

TEST_CASE("masked row softmax: rows sum to one over the mask") {
  SparseBoolMatrix mask = SparseBoolMatrix::from_pairs(
      3, 3, {{0, 0}, {0, 1}, {1, 1}, {2, 0}, {2, 1}, {2, 2}});
  Rng rng(13);
  Matrix scores = random_matrix(3, 3, rng);
  Tensor alpha = masked_row_softmax(Tensor(scores), mask);
  for (Index r = 0; r < 3; ++r) {
    double sum = 0.0;
    for (Index c = 0; c < 3; ++c) sum += alpha.value()(r, c);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  // masked-out entries stay exactly zero
  CHECK(alpha.value()(0, 2) == 0.0);
  CHECK(alpha.value()(1, 0) == 0.0);

  expect_gradcheck_clean(check_op(
      [&](TapeBinder& b) { return masked_row_softmax(b.use(0), mask); },
      {scores}, 34));
}

TEST_CASE("backward of sum gives all-ones gradient; misuse throws") {
  ParamStore store;
  int id = store.add("w", Matrix(3, 2, 0.5));
  store.zero_grads();
  Tape tape;
  TapeBinder binder(store, &tape);
  Tensor s = sum_all(binder.use(id));
  tape.backward(s);
  binder.write_back_grads();
  for (Index i = 0; i < store.at(id).grad.size(); ++i)
    CHECK(store.at(id).grad.data()[i] == 1.0);

  // backward requires a scalar
  Tape t2;
  TapeBinder b2(store, &t2);
  Tensor non_scalar = add(b2.use(id), b2.use(id));
  CHECK_THROWS_AS(t2.backward(non_scalar), ShapeError);

  // constants carry no gradient
  Tensor constant(Matrix(2, 2, 1.0));
  CHECK_FALSE(constant.requires_grad());
  Tape t3;
  CHECK_THROWS_AS((void)t3.grad(constant), Error);

  // a tape refuses to run backward twice
  Tape t4;
  TapeBinder b4(store, &t4);
  Tensor loss = sum_all(b4.use(id));
  t4.backward(loss);
  CHECK_THROWS_AS(t4.run_backward(), Error);
}

TEST_CASE("adam: bias-corrected first step moves by about -lr * sign(grad)") {
  Matrix param(2, 2, 0.0);
  Matrix grad = Matrix::of({{0.3, -0.7}, {2.0, -0.001}});
  AdamState state;
  AdamConfig cfg;
  cfg.lr = 0.01;
  adam_step(param, grad, state, cfg);
  for (Index i = 0; i < param.size(); ++i) {
    const double expected = -cfg.lr * (grad.data()[i] > 0 ? 1.0 : -1.0);
    CHECK(param.data()[i] == doctest::Approx(expected).epsilon(1e-3));
  }
  CHECK(state.t == 1);
}

TEST_CASE("tape replay determinism: identical seeds give bit-identical loss") {
  auto run = [] {
    ParamStore store;
    Rng init(99);
    store.add("w", random_matrix(4, 4, init));
    Rng drop(7);
    Tape tape;
    TapeBinder binder(store, &tape);
    Tensor x = mul(Tensor(random_matrix(5, 4, init)),
                   dropout_mask(5, 4, 0.25, drop));
    Tensor loss = sum_all(relu(matmul(x, binder.use(0))));
    return loss.scalar_value();
  };
  const double a = run();
  const double b = run();
  CHECK(a == b);
}
