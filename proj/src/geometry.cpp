#include "cusp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cusp {

const char* to_string(Region r) {
  switch (r) {
    case Region::C_RN: return "C_RN";
    case Region::F_u: return "F_u";
    case Region::C_S: return "C_S";
    case Region::F_s: return "F_s";
    case Region::C_AN: return "C_AN";
  }
  return "?";
}

const char* to_string(SingularityKind k) {
  switch (k) {
    case SingularityKind::regular_q: return "q";
    case SingularityKind::cusped_f1: return "f1";
    case SingularityKind::symmetric_f2: return "f2";
    case SingularityKind::nonsymmetric_f3: return "f3";
    case SingularityKind::nonsymmetric_f4: return "f4";
  }
  return "?";
}

namespace {

double h_graph(double a, double b, double g) { return -a * a * a + 3.0 * a + g * (b - a); }

}  // namespace

ManifoldPoint critical_graph(double v1, double v2, const Params& p, double fold_band) {
  const double g = p.g;
  ManifoldPoint m;
  m.v1 = v1;
  m.v2 = v2;
  m.h1 = h_graph(v1, v2, g);
  m.h2 = h_graph(v2, v1, g);
  m.Dh = {{{-3.0 * v1 * v1 - g + 3.0, g}, {g, -3.0 * v2 * v2 - g + 3.0}}};
  m.tr = -3.0 * (v1 * v1 + v2 * v2) + 6.0 - 2.0 * g;
  m.det = 9.0 * v1 * v1 * v2 * v2 - 3.0 * (3.0 - g) * (v1 * v1 + v2 * v2) + 3.0 * (3.0 - 2.0 * g);
  // Dh is symmetric, so its eigenvalues are real.
  const double half = 0.5 * m.tr;
  const double disc = std::sqrt(std::max(0.0, half * half - m.det));
  m.eig = {half - disc, half + disc};
  if (std::abs(m.det) < fold_band)
    m.region = m.tr > 0 ? Region::F_u : Region::F_s;
  else if (m.det < 0)
    m.region = Region::C_S;
  else
    m.region = m.tr > 0 ? Region::C_RN : Region::C_AN;
  return m;
}

FoldRadii fold_radii(double theta, const Params& p) {
  p.require_repulsive();
  const double cs = std::cos(theta), sn = std::sin(theta);
  const double a = cs * cs * sn * sn;
  const double b = 1.0 - p.g / 3.0;
  const double c0 = 1.0 - 2.0 * p.g / 3.0;
  FoldRadii out;
  if (a < 1e-15) {
    out.m_u = std::sqrt(c0 / b);
    return out;
  }
  // a R^2 - b R + c0 = 0; the discriminant is at least g^2/9.
  const double sq = std::sqrt(b * b - 4.0 * a * c0);
  const double big = (b + sq) / (2.0 * a);
  const double small = c0 / (a * big);
  out.m_u = std::sqrt(small);
  out.m_s = std::sqrt(big);
  return out;
}

Mat2 desing_jacobian(const Vec2& v, const Params& p) {
  const double g = p.g;
  const double d1 = v[0] - p.c, d2 = v[1] - p.c;
  return {{{-3.0 * v[1] * v[1] - g + 3.0, -6.0 * v[1] * d1 - g},
           {-g - 6.0 * v[0] * d2, -3.0 * v[0] * v[0] - g + 3.0}}};
}

std::array<cplx, 2> eigenvalues(const Mat2& m) {
  const double half = 0.5 * (m[0][0] + m[1][1]);
  const double det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
  const cplx disc = std::sqrt(cplx(half * half - det, 0.0));
  cplx a = half - disc, b = half + disc;
  if (a.real() > b.real()) std::swap(a, b);
  return {a, b};
}

std::string classify(const std::array<cplx, 2>& eig, double zero_tol) {
  const double r0 = eig[0].real(), r1 = eig[1].real();
  if (std::abs(eig[0].imag()) > 0.0) {
    if (std::abs(r0) <= zero_tol) return "center";
    return r0 < 0 ? "stable focus" : "unstable focus";
  }
  if (std::abs(r0) <= zero_tol || std::abs(r1) <= zero_tol) return "saddle-node";
  if (r0 * r1 < 0) return "saddle";
  return r1 < 0 ? "stable node" : "unstable node";
}

namespace {

SingularityReport make_report(SingularityKind kind, const Vec2& v, const Params& p) {
  SingularityReport r;
  r.kind = kind;
  r.v = v;
  const ManifoldPoint m = critical_graph(v[0], v[1], p);
  r.u = 0.5 * (v[0] - v[1]);
  r.y = 0.5 * (m.h1 + m.h2) - p.ws();
  r.z = 0.5 * (m.h1 - m.h2);
  r.region = m.region;
  r.det = m.det;
  const Vec2 f = rhs_reduced_desing(v, p);
  r.field_residual = std::hypot(f[0], f[1]);
  r.eig = eigenvalues(desing_jacobian(v, p));
  r.classification = classify(r.eig);
  return r;
}

// Newton on the desingularized field, starting from the closed form.
Vec2 polish(Vec2 v, const Params& p) {
  for (int it = 0; it < 50; ++it) {
    const Vec2 f = rhs_reduced_desing(v, p);
    const Mat2 J = desing_jacobian(v, p);
    const double det = J[0][0] * J[1][1] - J[0][1] * J[1][0];
    if (det == 0.0) break;
    const double d0 = (J[1][1] * f[0] - J[0][1] * f[1]) / det;
    const double d1 = (-J[1][0] * f[0] + J[0][0] * f[1]) / det;
    v[0] -= d0;
    v[1] -= d1;
    const double scale = 1.0 + std::abs(v[0]) + std::abs(v[1]);
    if (std::hypot(d0, d1) < 1e-15 * scale) break;
  }
  return v;
}

}  // namespace

SingularityReport regular_equilibrium(const Params& p) {
  return make_report(SingularityKind::regular_q, {p.c, p.c}, p);
}

std::vector<SingularityReport> folded_singularities(const Params& p) {
  p.require_repulsive();
  if (!(p.c > 0.0)) throw DomainError("folded singularities need c > 0");
  const double vs = p.vs();
  std::vector<SingularityReport> out;
  out.push_back(make_report(SingularityKind::cusped_f1, {vs, vs}, p));
  out.push_back(make_report(SingularityKind::symmetric_f2, {-vs, -vs}, p));

  const double c = p.c, g = p.g;
  const double c_asym = std::sqrt(1.0 - g / 3.0);
  if (std::abs(c - c_asym) <= 4.0 * std::numeric_limits<double>::epsilon() * c_asym)
    throw AsymptoteParameter("f3/f4 are unbounded at c = sqrt(1 - g/3)");
  const double c_p2 = (1.0 - g / 3.0) / vs;
  if (c < 1.0 || c > c_p2) {
    const double x = g * c / (3.0 * c * c + g - 3.0);
    const double u_sq = (x - c) * (x - c) + 1.0 - c * c;
    if (u_sq > 0.0) {
      const double u = std::sqrt(u_sq);
      out.push_back(
          make_report(SingularityKind::nonsymmetric_f3, polish({x + u, x - u}, p), p));
      out.push_back(
          make_report(SingularityKind::nonsymmetric_f4, polish({x - u, x + u}, p), p));
    }
  }
  return out;
}

EigenSummary eigen_summary(const Params& p) {
  EigenSummary e;
  e.lambda1 = p.lambda1();
  e.lambda2 = p.lambda2();
  e.saddle_node_degenerate = e.lambda1 == 0.0;
  e.mu = e.saddle_node_degenerate ? std::numeric_limits<double>::infinity() : e.lambda2 / e.lambda1;
  auto pair = [&](double tr) -> std::array<cplx, 2> {
    const cplx d = std::sqrt(cplx(tr * tr - 4.0 * p.eps, 0.0));
    return {0.5 * (tr - d), 0.5 * (tr + d)};
  };
  const double base = 3.0 - 3.0 * p.c * p.c;
  e.nu12 = pair(base);
  e.nu34 = pair(base - 2.0 * p.g);
  return e;
}

double hopf_crossing(const Params& p, double c_lo, double c_hi, double tol) {
  auto re = [&](double c) {
    Params q = p;
    q.c = c;
    const auto e = eigen_summary(q);
    return std::max(e.nu34[0].real(), e.nu34[1].real());
  };
  double flo = re(c_lo);
  if ((flo < 0) == (re(c_hi) < 0)) throw NoRootInBracket("Re nu34 keeps its sign on the bracket");
  while (c_hi - c_lo > tol) {
    const double mid = 0.5 * (c_lo + c_hi);
    const double fm = re(mid);
    if ((fm < 0) == (flo < 0)) {
      c_lo = mid;
      flo = fm;
    } else {
      c_hi = mid;
    }
  }
  return 0.5 * (c_lo + c_hi);
}

namespace {

std::array<double, 2> branch_eigs(const Vec2& v, const Params& p) {
  const auto e = eigenvalues(desing_jacobian(v, p));
  return {e[0].real(), e[1].real()};
}

// Location of the q and f1 branches at parameter c.
Vec2 branch_location(const std::string& b, double c, const Params& p) {
  if (b == "q") return {c, c};
  const double vs = p.vs();
  return {vs, vs};
}

}  // namespace

BifurcationDiagram bifurcation_scan(const Params& p, double c_lo, double c_hi, int n) {
  p.require_repulsive();
  if (!(c_lo > 0.0 && c_hi < 2.0 && c_lo < c_hi && n >= 2))
    throw DomainError("c range must lie inside (0, 2)");
  BifurcationDiagram d;
  const double vs = p.vs();
  const double c_asym = std::sqrt(1.0 - p.g / 3.0);

  std::vector<double> grid(n);
  for (int i = 0; i < n; ++i) grid[i] = c_lo + (c_hi - c_lo) * i / (n - 1);

  for (double c : grid) {
    Params q = p;
    q.c = c;
    auto add = [&](const SingularityReport& r, const std::string& name) {
      d.rows.push_back({c, name, 0.5 * (r.v[0] + r.v[1]), r.u, r.eig[0], r.eig[1],
                        r.classification});
    };
    add(regular_equilibrium(q), "q");
    if (std::abs(c - c_asym) < 1e-12) continue;
    for (const auto& r : folded_singularities(q)) add(r, to_string(r.kind));
  }

  struct Hit {
    double c;
    std::string branch;
  };
  std::vector<Hit> hits;
  for (const std::string b : {"q", "f1"}) {
    for (int k = 0; k < 2; ++k) {
      auto eig = [&](double c) {
        Params q = p;
        q.c = c;
        return branch_eigs(branch_location(b, c, q), q)[k];
      };
      double prev = eig(grid[0]);
      for (int i = 1; i < n; ++i) {
        const double cur = eig(grid[i]);
        if ((prev < 0) != (cur < 0)) {
          double lo = grid[i - 1], hi = grid[i], flo = prev;
          for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = eig(mid);
            if ((fm < 0) == (flo < 0)) {
              lo = mid;
              flo = fm;
            } else {
              hi = mid;
            }
          }
          hits.push_back({0.5 * (lo + hi), b});
        }
        prev = cur;
      }
    }
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.c < b.c; });
  for (const auto& h : hits) {
    if (!d.points.empty() && std::abs(d.points.back().c - h.c) < 1e-8) {
      d.points.back().branch += "," + h.branch;
      continue;
    }
    // q and f1 coincide only at c = v_s: exchange of stability.
    std::string label = std::abs(h.c - vs) < 1e-8 ? "T" : (h.branch == "q" ? "P1" : "P2");
    d.points.push_back({label, h.c, h.branch});
  }
  return d;
}

CuspData cusp_data(const Params& p) {
  p.require_repulsive();
  CuspData cd;
  cd.vs = p.vs();
  cd.g = p.g;
  cd.k = 9.0 * cd.vs * cd.vs + p.g;
  cd.a = 4.0 * cd.vs * cd.vs * cd.vs / (cd.k * p.g * p.g);
  return cd;
}

Lyapunov lyapunov_coefficients(const Params& p) {
  p.require_repulsive();
  Lyapunov l;
  l.l1_hat = 3.0 * (p.g - 3.0) / (8.0 * p.g);
  l.l1 = p.eps > 0.0 ? l.l1_hat / std::sqrt(p.eps) : std::numeric_limits<double>::infinity();
  return l;
}

}  // namespace cusp
