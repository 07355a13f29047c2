#include <doctest.h>

#include <random>

#include "lrti/models.hpp"
#include "oracles.hpp"

using namespace lrti;

TEST_CASE("potential matrices equal the numerically integrated sine products") {
  for (int n : {0, 1, 2, 3}) {
    const RealMat expect = oracle::sine_matrix(9, [n](Real x) { return std::cos(n * oracle::pi * x); });
    CHECK((cosine_potential_matrix(9, n) - expect).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("derivative coupling matrix equals its quadrature and is antisymmetric") {
  const RealMat b = derivative_coupling_matrix(10);
  CHECK((b - oracle::derivative_matrix(10)).cwiseAbs().maxCoeff() < 1e-11);
  CHECK((b + b.transpose()).norm() < 1e-14);
}

TEST_CASE("laplacian eigenvalues are (pi k)^2") {
  const RealVec e = laplacian_eigenvalues(5);
  for (int k = 1; k <= 5; ++k) CHECK(e(k - 1) == doctest::Approx(oracle::pi * oracle::pi * k * k));
}

TEST_CASE("initial data") {
  const auto u = schrodinger_initial(20);
  CHECK(u.rank() == 1);
  CHECK(u.norm() == doctest::Approx(1.0));
  const Mat<Complex> d = u.to_dense();
  CHECK(std::abs(d(0, 1) / d(0, 0) - 0.5) < 1e-14);
  const auto p = parabolic_initial(40);
  CHECK(p.rank() == 10);
  const RealMat pd = p.to_dense();
  CHECK(pd(20, 20) == doctest::Approx(1.0));
  CHECK(pd(19, 19) == doctest::Approx(0.0));
  CHECK(pd(29, 29) == doctest::Approx(1.0));
  CHECK_THROWS(parabolic_initial(20));
  const RealVec f = default_source_profile(15);
  CHECK(f(9) == 10);
  CHECK(f(10) == 0);
}

TEST_CASE("model construction checks its parameters") {
  CHECK_THROWS(build_schrodinger(1, 1, 1));
  CHECK_THROWS(build_schrodinger(8, -1, 1));
  CHECK_THROWS(build_parabolic(8, 1.0, 1.0, RealVec::Ones(8)));
  CHECK_THROWS(build_parabolic(8, 1.0, 0.5, RealVec::Ones(7)));
  CHECK_NOTHROW(build_parabolic(8, 1.0, -0.5, RealVec::Ones(8)));
  CHECK(build_schrodinger(8, 1, 1, 0).potential_rank() == 0);
}

TEST_CASE("twist and untwist are inverse unitary maps") {
  const auto model = build_schrodinger(8, 1, 2);
  std::mt19937_64 rng(11);
  const auto v = oracle::random_low_rank<Complex>(rng, 8, 8, 3);
  CHECK(frobenius_dist(untwist(model, 0.37, twist(model, 0.37, v)), v) < 1e-13 * v.norm());
  CHECK(twist(model, 0.37, v).norm() == doctest::Approx(v.norm()).epsilon(1e-13));
}

TEST_CASE("twisted right-hand side matches the dense Kronecker operator") {
  const oracle::Schrodinger dense(8, 1, 2, 0.7);
  const auto model = build_schrodinger(8, 1, 2, 0.7);
  std::mt19937_64 rng(12);
  const auto v = oracle::random_low_rank<Complex>(rng, 8, 8, 3);
  for (Real s : {0.0, 0.013, 0.1}) {
    const Mat<Complex> got = schrodinger_F(model, s, v).to_dense();
    const Mat<Complex> dv = v.to_dense();
    const oracle::CVec expect = dense.F(s) * oracle::vec<Complex>(dv);
    CHECK((oracle::vec<Complex>(got) - expect).norm() < 1e-12 * expect.norm());
  }
  CHECK(schrodinger_F(build_schrodinger(8, 1, 1, 0), 0.1, v).rank() == 0);
}

TEST_CASE("heat propagator and mixed-derivative term match dense operators") {
  RealVec f = RealVec::Zero(8);
  f(0) = 1;
  f(3) = 2;
  const oracle::Parabolic dense(8, 1.0, -0.5, f);
  const auto model = build_parabolic(8, 1.0, -0.5, f);
  std::mt19937_64 rng(13);
  const auto u = oracle::random_low_rank<Real>(rng, 8, 8, 2);
  const RealMat du = u.to_dense();
  const RealVec e = dense.decay(0.002).asDiagonal() * oracle::vec<Real>(du);
  const RealMat pd = parabolic_propagate(model, 0.002, u).to_dense();
  CHECK((oracle::vec<Real>(pd) - e).norm() < 1e-13 * e.norm());
  const RealVec g = dense.G * oracle::vec<Real>(du);
  const RealMat gd = parabolic_G(model, u).to_dense();
  CHECK((oracle::vec<Real>(gd) - g).norm() < 1e-10 * g.norm());
  CHECK_THROWS_AS(parabolic_propagate(model, -1e-3, u), std::domain_error);
  const RealMat src = model.source.to_dense();
  CHECK((oracle::vec<Real>(src) - dense.source).norm() < 1e-13);
}
