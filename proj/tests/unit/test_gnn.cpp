#include <cmath>

#include "doctest.h"

#include "fixtures.hpp"
#include "hgen/gnn.hpp"

using namespace hgen;

namespace {

int find_param(const ParamStore& store, const std::string& name) {
  for (std::size_t i = 0; i < store.size(); ++i)
    if (store.at(static_cast<int>(i)).name == name) return static_cast<int>(i);
  REQUIRE_MESSAGE(false, "missing param ", name);
  return -1;
}

void set_param(ParamStore& store, const std::string& name, Matrix value) {
  store.at(find_param(store, name)).value = std::move(value);
}

PathOperators operators_from_pairs(
    Index n, const std::vector<std::pair<Index, Index>>& pairs) {
  MetaPathGraph mpg;
  mpg.adjacency = SparseBoolMatrix::from_pairs(n, n, pairs);
  mpg.norm_operator = normalized_operator(mpg.adjacency);
  mpg.path_name = "test";
  return PathOperators::build(std::move(mpg));
}

AlleleConfig test_config(Backbone b, int layers = 1, Index hidden = 2,
                         double dropout = 0.0, std::uint64_t seed = 1) {
  AlleleConfig cfg;
  cfg.backbone = b;
  cfg.num_layers = layers;
  cfg.hidden_dim = hidden;
  cfg.dropout = dropout;
  cfg.seed = seed;
  cfg.gat_heads = 1;
  return cfg;
}

}  // namespace

TEST_CASE("init: replica streams differ, same seed reproduces, Glorot scale") {
  ParamStore store;
  AlleleConfig cfg = test_config(Backbone::gcn, 2, 8);
  AlleleLearner a(store, cfg, 8, 0, 0);
  AlleleLearner b(store, cfg, 8, 0, 1);
  const Matrix& wa = store.at(0).value;
  const Matrix& wb = store.at(find_param(store, "allele.0.1.projection")).value;
  bool all_equal = true;
  for (Index i = 0; i < wa.size(); ++i)
    if (wa.data()[i] != wb.data()[i]) all_equal = false;
  CHECK_FALSE(all_equal);

  ParamStore store2;
  AlleleLearner a2(store2, cfg, 8, 0, 0);
  for (Index i = 0; i < wa.size(); ++i)
    CHECK(store2.at(0).value.data()[i] == wa.data()[i]);

  // sample std of U(-s, s) is s/sqrt(3) = sqrt(2/(fan_in+fan_out))
  Rng rng(9);
  Matrix big = glorot_uniform(100, 100, rng);
  double sq = 0.0;
  for (Index i = 0; i < big.size(); ++i) sq += big.data()[i] * big.data()[i];
  const double std = std::sqrt(sq / static_cast<double>(big.size()));
  const double target = std::sqrt(2.0 / 200.0);
  CHECK(std > target / 3.0);
  CHECK(std < target * 3.0);
}

TEST_CASE("project: no dropout means train equals eval; zero input stays zero") {
  ParamStore store;
  AlleleLearner allele(store, test_config(Backbone::gcn), 3, 0, 0);
  TapeBinder binder(store, nullptr);
  Rng rng(4);
  Matrix x(5, 3);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();

  Tensor train_out = allele.project(binder, Tensor(x), true);
  Tensor eval_out = allele.project(binder, Tensor(x), false);
  for (Index i = 0; i < train_out.value().size(); ++i)
    CHECK(train_out.value().data()[i] == eval_out.value().data()[i]);

  Tensor zero_out = allele.project(binder, Tensor(Matrix(5, 3, 0.0)), false);
  for (Index i = 0; i < zero_out.value().size(); ++i)
    CHECK(zero_out.value().data()[i] == 0.0);  // relu(0 * W) = 0
}

TEST_CASE("project: zeroing a feature column equals dropping it from X and W") {
  ParamStore store;
  AlleleLearner allele(store, test_config(Backbone::gcn, 1, 4), 3, 0, 0);
  Rng rng(5);
  Matrix x(6, 3);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();

  // zero column 1 of the input
  Matrix x_masked = x;
  for (Index r = 0; r < 6; ++r) x_masked(r, 1) = 0.0;
  TapeBinder binder(store, nullptr);
  Tensor via_mask = allele.project(binder, Tensor(x_masked), false);

  // drop column 1 from X and the matching row from W
  ParamStore store2;
  AlleleLearner reduced(store2, test_config(Backbone::gcn, 1, 4), 2, 0, 0);
  const Matrix& full_w = store.at(0).value;
  Matrix w_reduced(2, 4);
  for (Index c = 0; c < 4; ++c) {
    w_reduced(0, c) = full_w(0, c);
    w_reduced(1, c) = full_w(2, c);
  }
  set_param(store2, "allele.0.0.projection", w_reduced);
  Matrix x_reduced(6, 2);
  for (Index r = 0; r < 6; ++r) {
    x_reduced(r, 0) = x(r, 0);
    x_reduced(r, 1) = x(r, 2);
  }
  TapeBinder binder2(store2, nullptr);
  Tensor via_drop = reduced.project(binder2, Tensor(x_reduced), false);

  for (Index i = 0; i < via_mask.value().size(); ++i)
    CHECK(via_mask.value().data()[i] ==
          doctest::Approx(via_drop.value().data()[i]).epsilon(1e-14));
}

TEST_CASE("gcn: edgeless graph with one layer is a plain dense layer") {
  ParamStore store;
  AlleleLearner allele(store, test_config(Backbone::gcn, 1, 2), 2, 0, 0);
  set_param(store, "allele.0.0.projection", Matrix::identity(2));
  Matrix w = Matrix::of({{0.5, -1.0}, {0.25, 2.0}});
  set_param(store, "allele.0.0.layer0.weight", w);

  PathOperators ops = operators_from_pairs(3, {});
  Matrix x = Matrix::of({{1.0, 2.0}, {-1.0, 0.5}, {0.0, 0.0}});
  TapeBinder binder(store, nullptr);
  Tensor out = allele.embed(binder, ops, Tensor(x), false);

  // relu(relu(x) * w) computed directly
  Matrix h0 = x;
  for (Index i = 0; i < h0.size(); ++i) h0.data()[i] = std::max(0.0, h0.data()[i]);
  Matrix expect = dense::matmul(h0, w);
  for (Index i = 0; i < expect.size(); ++i)
    expect.data()[i] = std::max(0.0, expect.data()[i]);
  for (Index i = 0; i < expect.size(); ++i)
    CHECK(out.value().data()[i] == doctest::Approx(expect.data()[i]).epsilon(1e-14));
}

TEST_CASE("gcn: clique-constant embeddings stay constant within cliques") {
  // two disjoint 2-cliques
  ParamStore store;
  AlleleLearner allele(store, test_config(Backbone::gcn, 2, 2), 2, 0, 3);
  PathOperators ops = operators_from_pairs(4, {{0, 1}, {1, 0}, {2, 3}, {3, 2}});
  Matrix x = Matrix::of({{1.0, 2.0}, {1.0, 2.0}, {-3.0, 0.5}, {-3.0, 0.5}});
  TapeBinder binder(store, nullptr);
  Tensor out = allele.embed(binder, ops, Tensor(x), false);
  for (Index c = 0; c < 2; ++c) {
    CHECK(out.value()(0, c) == doctest::Approx(out.value()(1, c)).epsilon(1e-12));
    CHECK(out.value()(2, c) == doctest::Approx(out.value()(3, c)).epsilon(1e-12));
  }
}

TEST_CASE("sage: edgeless graph reduces to the self transform") {
  ParamStore store;
  AlleleLearner allele(store, test_config(Backbone::sage, 1, 2), 2, 0, 0);
  set_param(store, "allele.0.0.projection", Matrix::identity(2));
  Matrix w_self = Matrix::of({{1.0, 0.5}, {0.0, 1.0}});
  set_param(store, "allele.0.0.layer0.self", w_self);

  PathOperators ops = operators_from_pairs(2, {});
  Matrix x = Matrix::of({{1.0, 2.0}, {3.0, 0.25}});
  TapeBinder binder(store, nullptr);
  Tensor out = allele.embed(binder, ops, Tensor(x), false);
  Matrix expect = dense::matmul(x, w_self);
  for (Index i = 0; i < expect.size(); ++i)
    expect.data()[i] = std::max(0.0, expect.data()[i]);
  for (Index i = 0; i < expect.size(); ++i)
    CHECK(out.value().data()[i] == doctest::Approx(expect.data()[i]).epsilon(1e-14));
}

TEST_CASE("sage: complete graph with identical features sees itself as the mean") {
  ParamStore store;
  AlleleLearner allele(store, test_config(Backbone::sage, 1, 2, 0.0, 2), 2, 0, 0);
  set_param(store, "allele.0.0.projection", Matrix::identity(2));
  PathOperators ops = operators_from_pairs(
      3, {{0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}});
  Matrix x = Matrix::of({{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}});
  TapeBinder binder(store, nullptr);
  Tensor out = allele.embed(binder, ops, Tensor(x), false);

  // neighbor mean equals own features, so output = relu(x(Wself + Wnbr))
  const Matrix& ws = store.at(find_param(store, "allele.0.0.layer0.self")).value;
  const Matrix& wn = store.at(find_param(store, "allele.0.0.layer0.nbr")).value;
  Matrix combined = ws;
  combined.add_scaled(wn);
  Matrix expect = dense::matmul(x, combined);
  for (Index i = 0; i < expect.size(); ++i)
    expect.data()[i] = std::max(0.0, expect.data()[i]);
  for (Index i = 0; i < expect.size(); ++i)
    CHECK(out.value().data()[i] == doctest::Approx(expect.data()[i]).epsilon(1e-13));
}

TEST_CASE("sage: 3-node path against a hand-computed aggregation") {
  ParamStore store;
  AlleleLearner allele(store, test_config(Backbone::sage, 1, 2), 2, 0, 0);
  set_param(store, "allele.0.0.projection", Matrix::identity(2));
  Matrix w_self = Matrix::of({{1.0, 0.0}, {0.0, 1.0}});
  Matrix w_nbr = Matrix::of({{2.0, 0.0}, {0.0, 2.0}});
  set_param(store, "allele.0.0.layer0.self", w_self);
  set_param(store, "allele.0.0.layer0.nbr", w_nbr);

  PathOperators ops = operators_from_pairs(3, {{0, 1}, {1, 0}, {1, 2}, {2, 1}});
  Matrix x = Matrix::of({{1.0, 0.0}, {0.0, 1.0}, {2.0, 2.0}});
  TapeBinder binder(store, nullptr);
  Tensor out = allele.embed(binder, ops, Tensor(x), false);

  // node 0: self (1,0) + 2 * mean{(0,1)}           = (1, 2)
  // node 1: self (0,1) + 2 * mean{(1,0),(2,2)}     = (3, 3)
  // node 2: self (2,2) + 2 * mean{(0,1)}           = (2, 4)
  Matrix expect = Matrix::of({{1.0, 2.0}, {3.0, 3.0}, {2.0, 4.0}});
  for (Index i = 0; i < expect.size(); ++i)
    CHECK(out.value().data()[i] == doctest::Approx(expect.data()[i]).epsilon(1e-13));
}

TEST_CASE("gat: a single node attends to itself with weight one") {
  ParamStore store;
  AlleleLearner allele(store, test_config(Backbone::gat, 1, 2), 2, 0, 0);
  set_param(store, "allele.0.0.projection", Matrix::identity(2));
  PathOperators ops = operators_from_pairs(1, {});
  Matrix x = Matrix::of({{0.7, -0.3}});
  TapeBinder binder(store, nullptr);
  Tensor out = allele.embed(binder, ops, Tensor(x), false);
  // attention over {self} is 1, so the layer is elu(x W_head)
  const Matrix& w = store.at(find_param(store, "allele.0.0.layer0.head0.weight")).value;
  Matrix expect = dense::matmul(Matrix::of({{0.7, 0.0}}), w);  // elu(x)=x>0?x:e^x-1 on projection
  expect(0, 0) = expect(0, 0) > 0 ? expect(0, 0) : std::expm1(expect(0, 0));
  expect(0, 1) = expect(0, 1) > 0 ? expect(0, 1) : std::expm1(expect(0, 1));
  // projection activation for gat is elu as well
  Matrix proj = Matrix::of({{0.7, -0.3}});
  proj(0, 1) = std::expm1(-0.3);
  Matrix hw = dense::matmul(proj, w);
  for (Index c = 0; c < 2; ++c) {
    const double e = hw(0, c) > 0 ? hw(0, c) : std::expm1(hw(0, c));
    CHECK(out.value()(0, c) == doctest::Approx(e).epsilon(1e-13));
  }
}

TEST_CASE("gat: identical neighbor embeddings get uniform attention") {
  ParamStore store;
  AlleleLearner allele(store, test_config(Backbone::gat, 1, 2, 0.0, 5), 2, 0, 0);
  set_param(store, "allele.0.0.projection", Matrix::identity(2));
  // complete graph on 3 nodes with identical rows: softmax over equal
  // scores is uniform, so output equals elu(x W) exactly as in the
  // single-node case
  PathOperators ops = operators_from_pairs(
      3, {{0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}});
  Matrix x = Matrix::of({{0.4, 0.2}, {0.4, 0.2}, {0.4, 0.2}});
  TapeBinder binder(store, nullptr);
  Tensor out = allele.embed(binder, ops, Tensor(x), false);
  for (Index c = 0; c < 2; ++c) {
    CHECK(out.value()(0, c) == doctest::Approx(out.value()(1, c)).epsilon(1e-13));
    CHECK(out.value()(1, c) == doctest::Approx(out.value()(2, c)).epsilon(1e-13));
  }
}

TEST_CASE("gat: 3-node star against a hand-computed softmax") {
  ParamStore store;
  AlleleConfig cfg = test_config(Backbone::gat, 1, 2);
  cfg.leaky_slope = 0.2;
  cfg.activation = Activation::relu;  // keep the oracle arithmetic simple
  AlleleLearner allele(store, cfg, 2, 0, 0);
  set_param(store, "allele.0.0.projection", Matrix::identity(2));
  set_param(store, "allele.0.0.layer0.head0.weight", Matrix::identity(2));
  Matrix a_src = Matrix::of({{1.0}, {0.0}});
  Matrix a_dst = Matrix::of({{0.0}, {1.0}});
  set_param(store, "allele.0.0.layer0.head0.attn_src", a_src);
  set_param(store, "allele.0.0.layer0.head0.attn_dst", a_dst);

  // star: 0 - {1, 2}
  PathOperators ops = operators_from_pairs(3, {{0, 1}, {0, 2}, {1, 0}, {2, 0}});
  Matrix x = Matrix::of({{1.0, 0.5}, {0.0, 2.0}, {0.5, 1.0}});
  TapeBinder binder(store, nullptr);
  Tensor out = allele.embed(binder, ops, Tensor(x), false);

  // h = relu(x) = x here; scores e_uv = leaky(s_u + t_v), s = h a_src,
  // t = h a_dst
  auto leaky = [](double v) { return v > 0 ? v : 0.2 * v; };
  const double s0 = 1.0, t0 = 0.5, t1 = 2.0, t2 = 1.0;
  const double e00 = leaky(s0 + t0), e01 = leaky(s0 + t1), e02 = leaky(s0 + t2);
  const double z = std::exp(e00) + std::exp(e01) + std::exp(e02);
  const double a00 = std::exp(e00) / z, a01 = std::exp(e01) / z,
               a02 = std::exp(e02) / z;
  const double out0_col0 = a00 * 1.0 + a01 * 0.0 + a02 * 0.5;
  const double out0_col1 = a00 * 0.5 + a01 * 2.0 + a02 * 1.0;
  CHECK(out.value()(0, 0) == doctest::Approx(std::max(0.0, out0_col0)).epsilon(1e-12));
  CHECK(out.value()(0, 1) == doctest::Approx(std::max(0.0, out0_col1)).epsilon(1e-12));
}

TEST_CASE("permutation equivariance for all three backbones") {
  Rng rng(42);
  for (Backbone backbone : {Backbone::gcn, Backbone::sage, Backbone::gat}) {
    CAPTURE(to_string(backbone));
    const Index n = 8, f = 3;
    // random symmetric adjacency
    std::vector<std::pair<Index, Index>> pairs;
    for (Index r = 0; r < n; ++r)
      for (Index c = r + 1; c < n; ++c)
        if (rng.bernoulli(0.35)) {
          pairs.emplace_back(r, c);
          pairs.emplace_back(c, r);
        }
    PathOperators ops = operators_from_pairs(n, pairs);
    Matrix x(n, f);
    for (Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();

    ParamStore store;
    AlleleLearner allele(store, test_config(backbone, 2, 4, 0.0, 7), f, 0, 0);
    TapeBinder binder(store, nullptr);
    Tensor base = allele.embed(binder, ops, Tensor(x), false);

    // relabel by a rotation permutation p(i) = (i + 3) % n
    auto p = [n](Index i) { return (i + 3) % n; };
    std::vector<std::pair<Index, Index>> perm_pairs;
    for (auto [r, c] : pairs) perm_pairs.emplace_back(p(r), p(c));
    PathOperators perm_ops = operators_from_pairs(n, perm_pairs);
    Matrix px(n, f);
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < f; ++c) px(p(r), c) = x(r, c);
    Tensor permuted = allele.embed(binder, perm_ops, Tensor(px), false);

    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < 4; ++c)
        CHECK(permuted.value()(p(r), c) ==
              doctest::Approx(base.value()(r, c)).epsilon(1e-10));
  }
}

TEST_CASE("eval-mode forwards are bit-identical across repeats") {
  Rng rng(11);
  PathOperators ops = operators_from_pairs(5, {{0, 1}, {1, 0}, {2, 3}, {3, 2}});
  Matrix x(5, 3);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  for (Backbone backbone : {Backbone::gcn, Backbone::sage, Backbone::gat}) {
    ParamStore store;
    AlleleLearner allele(store, test_config(backbone, 2, 4, 0.5, 13), 3, 0, 0);
    TapeBinder binder(store, nullptr);
    Tensor a = allele.embed(binder, ops, Tensor(x), false);
    Tensor b = allele.embed(binder, ops, Tensor(x), false);
    for (Index i = 0; i < a.value().size(); ++i)
      CHECK(a.value().data()[i] == b.value().data()[i]);
  }
}
