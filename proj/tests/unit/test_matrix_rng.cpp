#include <cmath>

#include "doctest.h"

#include "hgen/matrix.hpp"
#include "hgen/rng.hpp"

using namespace hgen;

TEST_CASE("dense kernels agree with the transpose identities") {
  Rng rng(3);
  Matrix a(3, 4), b(3, 5);
  for (Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  for (Index i = 0; i < b.size(); ++i) b.data()[i] = rng.normal();

  Matrix atb = dense::matmul_at_b(a, b);
  Matrix expected = dense::matmul(a.transposed(), b);
  for (Index i = 0; i < atb.size(); ++i)
    CHECK(atb.data()[i] == doctest::Approx(expected.data()[i]).epsilon(1e-13));

  Matrix c(5, 4);
  for (Index i = 0; i < c.size(); ++i) c.data()[i] = rng.normal();
  Matrix abt = dense::matmul_a_bt(a, c);
  Matrix expected2 = dense::matmul(a, c.transposed());
  for (Index i = 0; i < abt.size(); ++i)
    CHECK(abt.data()[i] == doctest::Approx(expected2.data()[i]).epsilon(1e-13));
}

TEST_CASE("matrix shape errors") {
  CHECK_THROWS_AS(dense::matmul(Matrix(2, 3), Matrix(2, 3)), ShapeError);
  CHECK_THROWS_AS(Matrix(2, 2).add_scaled(Matrix(3, 3)), ShapeError);
}

TEST_CASE("rng streams are deterministic and serializable") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());

  const std::string state = a.serialize();
  Rng c = Rng::deserialize(state);
  for (int i = 0; i < 100; ++i) CHECK(a.normal() == c.normal());
}

TEST_CASE("uniform stays in [0,1); normal has sane moments") {
  Rng rng(5);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(sum / n == doctest::Approx(0.0).epsilon(0.02));
  CHECK(sq / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("derived seeds decorrelate component streams") {
  const auto s1 = Rng::derive(42, 1, 0, 0);
  const auto s2 = Rng::derive(42, 1, 0, 1);
  const auto s3 = Rng::derive(42, 2, 0, 0);
  CHECK(s1 != s2);
  CHECK(s1 != s3);
  CHECK(Rng::derive(42, 1, 0, 0) == s1);
}
