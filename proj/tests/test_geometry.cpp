#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"

#include "cusp/errors.hpp"
#include "cusp/geometry.hpp"

using namespace cusp;

namespace {

Params with_c(double c) { return Params{-1.0, c, 0.01, std::nullopt}; }

}  // namespace

TEST_CASE("critical graph regions") {
  const Params p = with_c(1.24);
  const auto f = critical_graph(p.vs(), p.vs(), p);
  CHECK(std::abs(f.det) < 1e-12);
  CHECK(f.tr == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(f.region == Region::F_s);

  const auto o = critical_graph(0, 0, p);
  CHECK(o.det == doctest::Approx(15.0));
  CHECK(o.tr == doctest::Approx(8.0));
  CHECK(o.region == Region::C_RN);

  const auto b = critical_graph(2, 2, p);
  CHECK(b.tr == doctest::Approx(-16.0));
  CHECK(b.det == doctest::Approx(63.0));
  CHECK(b.region == Region::C_AN);

  CHECK(critical_graph(1.2, 0.1, p).region == Region::C_S);
}

TEST_CASE("Dh always has real eigenvalues") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> V(-2.5, 2.5), G(-3.0, -0.1);
  for (int n = 0; n < 100; ++n) {
    Params p = with_c(1.2);
    p.g = G(rng);
    const double v1 = V(rng), v2 = V(rng);
    const auto m = critical_graph(v1, v2, p);
    const double disc = m.tr * m.tr - 4 * m.det;
    const double expect = 9 * std::pow(v1 * v1 - v2 * v2, 2) + 4 * p.g * p.g;
    REQUIRE(disc == doctest::Approx(expect).epsilon(1e-10));
    REQUIRE(disc > 0);
  }
}

TEST_CASE("fold radii") {
  const Params p = with_c(1.24);
  const auto d = fold_radii(std::numbers::pi / 4, p);
  REQUIRE(d.m_s.has_value());
  CHECK(d.m_u == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(*d.m_s == doctest::Approx(1.825742).epsilon(1e-6));
  CHECK(*d.m_s == doctest::Approx(std::sqrt(2.0) * p.vs()).epsilon(1e-12));
  CHECK(d.m_u < 1.632993);
  CHECK(*d.m_s > 1.632993);
  CHECK(!fold_radii(0.0, p).m_s.has_value());

  for (double th : {0.3, 0.7, 1.1, 2.0, 4.0}) {
    const auto r = fold_radii(th, p);
    const auto a = critical_graph(r.m_u * std::cos(th), r.m_u * std::sin(th), p);
    CHECK(std::abs(a.det) < 1e-9);
    if (r.m_s) {
      const auto b = critical_graph(*r.m_s * std::cos(th), *r.m_s * std::sin(th), p);
      CHECK(std::abs(b.det) < 1e-9);
    }
  }
}

TEST_CASE("folded singularities") {
  SUBCASE("f3 and f4 below P1") {
    const auto s = folded_singularities(with_c(0.9));
    REQUIRE(s.size() == 4);
    CHECK(s[0].kind == SingularityKind::cusped_f1);
    CHECK(s[1].kind == SingularityKind::symmetric_f2);
    const auto& f3 = s[2];
    CHECK(f3.kind == SingularityKind::nonsymmetric_f3);
    CHECK(0.5 * (f3.v[0] + f3.v[1]) == doctest::Approx(0.573248).epsilon(1e-6));
    CHECK(std::abs(f3.u) == doctest::Approx(0.544763).epsilon(1e-6));
    CHECK(std::abs(s[3].u) == doctest::Approx(0.544763).epsilon(1e-6));
    CHECK(f3.u * s[3].u < 0);
    for (const auto& r : s) {
      CHECK(std::abs(r.det) < 1e-10);
      CHECK(r.field_residual < 1e-10);
    }
  }
  SUBCASE("f3 and f4 on the saddle-type fold above P2") {
    const auto s = folded_singularities(with_c(1.2));
    REQUIRE(s.size() == 4);
    CHECK(s[2].region == Region::F_s);
    CHECK(s[3].region == Region::F_s);
  }
  SUBCASE("only f1 and f2 between P1 and P2") {
    CHECK(folded_singularities(with_c(1.01)).size() == 2);
  }
  SUBCASE("f1 location") {
    const auto s = folded_singularities(with_c(1.24));
    CHECK(s[0].v[0] == doctest::Approx(1.290994).epsilon(1e-6));
    CHECK(s[0].v[1] == doctest::Approx(1.290994).epsilon(1e-6));
  }
  SUBCASE("asymptote") {
    CHECK_THROWS_AS(folded_singularities(with_c(std::sqrt(4.0 / 3.0))), AsymptoteParameter);
  }
  CHECK(regular_equilibrium(with_c(1.24)).v[0] == 1.24);
}

TEST_CASE("eigenvalue summary") {
  const auto e = eigen_summary(with_c(1.24));
  CHECK(e.lambda1 == doctest::Approx(-0.395001).epsilon(1e-5));
  CHECK(e.lambda2 == doctest::Approx(-1.604999).epsilon(1e-5));
  CHECK(e.mu == doctest::Approx(4.0633).epsilon(1e-4));
  CHECK(!e.saddle_node_degenerate);

  const Params t = with_c(std::sqrt(5.0 / 3.0));
  const auto h = eigen_summary(t);
  CHECK(h.saddle_node_degenerate);
  CHECK(std::abs(h.nu34[0].real()) < 1e-14);
  CHECK(std::abs(std::abs(h.nu34[0].imag()) - 0.1) < 1e-14);

  const auto r = eigen_summary(with_c(1.5 / std::sqrt(5.0 / 3.0)));
  CHECK(std::abs(r.lambda1 + 1.0) < 1e-12);
  CHECK(std::abs(r.lambda2 + 1.0) < 1e-12);

  for (double c : {1.17, 1.2, 1.25, 1.28}) {
    const auto s = eigen_summary(with_c(c));
    CHECK(s.lambda2 < s.lambda1);
    CHECK(s.lambda1 < 0);
  }
}

TEST_CASE("Hopf crossing at the cusp value") {
  const Params p = with_c(1.24);
  CHECK(std::abs(hopf_crossing(p, 1.2, 1.35) - p.vs()) < 1e-10);
}

TEST_CASE("bifurcation scan") {
  const auto d = bifurcation_scan(with_c(1.24), 0.5, 1.6);
  double P1 = 0, P2 = 0, T = 0;
  for (const auto& b : d.points) {
    if (b.label == "P1") P1 = b.c;
    if (b.label == "P2") P2 = b.c;
    if (b.label == "T") T = b.c;
  }
  CHECK(std::abs(P1 - 1.0) < 1e-8);
  CHECK(std::abs(P2 - (4.0 / 3.0) / std::sqrt(5.0 / 3.0)) < 1e-8);
  CHECK(std::abs(T - std::sqrt(5.0 / 3.0)) < 1e-8);
  CHECK(!d.rows.empty());
}

TEST_CASE("cusp data") {
  const auto cd = cusp_data(with_c(1.24));
  CHECK(cd.k == doctest::Approx(14.0).epsilon(1e-12));
  CHECK(cd.Q(0.1, -0.05) == doctest::Approx(-0.00536491).epsilon(1e-6));
  CHECK(cd.a == doctest::Approx(0.614759).epsilon(1e-6));
}

TEST_CASE("Lyapunov coefficients") {
  const auto l = lyapunov_coefficients(with_c(1.24));
  CHECK(l.l1_hat == doctest::Approx(1.5));
  CHECK(l.l1 == doctest::Approx(15.0));
  for (double g : {-0.1, -1.0, -5.0}) {
    Params p = with_c(1.2);
    p.g = g;
    CHECK(lyapunov_coefficients(p).l1_hat > 0);
  }
}

TEST_CASE("classification tags") {
  CHECK(classify({cplx(-1, 0), cplx(-2, 0)}) == "stable node");
  CHECK(classify({cplx(-1, 0), cplx(2, 0)}) == "saddle");
  CHECK(classify({cplx(0.5, 1), cplx(0.5, -1)}) == "unstable focus");
}
