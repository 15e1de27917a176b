#include "cusp/cycles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "cusp/integrate.hpp"
#include "cusp/parallel.hpp"

namespace cusp {

namespace {

using Vec6 = std::array<double, 6>;

double kcoef(const Params& p) { return 9.0 * p.vs() * p.vs() + p.g; }

// Lienard layer with its variational equation, Phi stored row-major.
Vec6 lienard_var(const Vec6& s, double y2, const Params& p) {
  const Vec2 f = rhs_lienard_fast({s[0], s[1]}, y2, p);
  const double a = -(1.0 / p.g) * (3.0 * p.vs() * y2 + 3.0 * kcoef(p) * s[0] * s[0]);
  // J = [[a, -1], [1, 0]]
  return {f[0], f[1], a * s[2] - s[4], a * s[3] - s[5], s[2], s[3]};
}

struct BackReturn {
  double z;
  double dz;  // derivative of the reverse-time return map
};

BackReturn back_return(double z0, double y2, const Params& p, const CycleOptions& opt,
                       double horizon) {
  IntegratorConfig cfg;
  cfg.rtol = opt.rtol;
  cfg.atol = opt.atol;
  cfg.t_max = horizon;
  cfg.direction = Direction::backward;
  EventSpec<6> section;
  section.fn = [](double, const Vec6& s) { return s[0]; };
  section.crossing = Crossing::falling;
  auto f = [&](double, const Vec6& s) { return lienard_var(s, y2, p); };
  const auto r = poincare_return<6>(f, section, Vec6{0.0, z0, 1.0, 0.0, 0.0, 1.0}, cfg);
  // On u2 = 0 the z2-velocity vanishes, so the section map derivative is Phi_zz.
  return {r.state[1], r.state[5]};
}

}  // namespace

double melnikov_radius(double y2, const Params& p) {
  return 2.0 * std::sqrt(-y2 * p.vs() / kcoef(p));
}

double melnikov_slope(const Params& p) {
  const double vs = p.vs();
  return (3.0 * vs * vs + p.g) / (2.0 * p.g * kcoef(p));
}

double g_avg_from_mean(double y2, double m, const Params& p) {
  return y2 / (2.0 * p.g) + 3.0 * p.vs() / (2.0 * p.g) * m;
}

LimitCycle find_limit_cycle(double y2, const Params& p, const CycleOptions& opt) {
  p.require_repulsive();
  if (!(y2 < 0.0)) throw DomainError("limit cycles exist only for y2 < 0");
  const double A = melnikov_radius(y2, p);
  if (A < 1e-8) throw CycleCollapsed("cycle amplitude below 1e-8");
  const double horizon = 100.0 + 20.0 * std::abs(y2);

  // Reverse-time relaxation toward the cycle.
  double z = -A;
  for (int k = 0; k < opt.relax_returns; ++k) {
    const double zn = back_return(z, y2, p, opt, horizon).z;
    const bool settled = std::abs(zn - z) < 1e-6 * std::max(1.0, std::abs(z));
    z = zn;
    if (settled) break;
  }

  LimitCycle lc;
  lc.y2 = y2;
  BackReturn r{};
  int it = 0;
  for (;; ++it) {
    if (it >= opt.max_newton) throw NewtonDiverged("return-map Newton did not converge");
    r = back_return(z, y2, p, opt, horizon);
    const double defect = r.z - z;
    if (std::abs(defect) < opt.closure_tol * std::max(1.0, std::abs(z))) break;
    const double slope = r.dz - 1.0;
    z -= slope != 0.0 ? defect / slope : -defect;
    if (!(z < 0.0) || !std::isfinite(z)) throw NewtonDiverged("Newton left the section half-line");
  }
  lc.newton_iterations = it;
  lc.anchor = {0.0, z};
  lc.closure_defect = std::abs(r.z - z);

  IntegratorConfig cfg;
  cfg.rtol = opt.rtol;
  cfg.atol = opt.atol;
  cfg.t_max = horizon;
  cfg.direction = Direction::backward;
  cfg.keep_dense = true;
  cfg.keep_samples = false;
  EventSpec<2> section;
  section.fn = [](double, const Vec2& s) { return s[0]; };
  section.crossing = Crossing::falling;
  section.terminal = true;
  section.guard = [](double t, const Vec2&) { return t < -1e-6; };
  const auto tr = integrate<2>([&](double, const Vec2& s) { return rhs_lienard_fast(s, y2, p); },
                               0.0, lc.anchor, cfg, {section});
  if (tr.outcome != Outcome::terminal_event) throw NoReturn("cycle did not close");
  lc.period = -tr.t_final;

  const int M = std::max(8, opt.samples - opt.samples % 2);
  lc.t.resize(M);
  lc.orbit.resize(M);
  for (int j = 0; j < M; ++j) {
    const double tau = lc.period * j / M;
    const Vec2 s = j == 0 ? lc.anchor : tr.at(-(lc.period - tau));
    lc.t[j] = tau;
    lc.orbit[j] = s;
    lc.amplitude = std::max(lc.amplitude, std::abs(s[0]));
  }
  // Periodic trapezoid; the sampling doubles until halving it moves the mean
  // by less than the error budget (relaxation cycles need far more points).
  auto u2_at = [&](long j, long n) {
    if (j == 0) return lc.anchor[0] * lc.anchor[0];
    const double u = tr.at(-(lc.period - lc.period * static_cast<double>(j) / n))[0];
    return u * u;
  };
  long n = M;
  double coarse = 0;
  for (long j = 0; j < n; ++j) coarse += u2_at(j, n);
  coarse /= n;
  for (;;) {
    double odd = 0;
    for (long j = 1; j < 2 * n; j += 2) odd += u2_at(j, 2 * n);
    const double fine = 0.5 * coarse + odd / (2 * n);
    lc.mean_error = std::abs(fine - coarse);
    lc.mean_u2_sq = fine;
    coarse = fine;
    n *= 2;
    if (lc.mean_error < opt.mean_tol || n >= (1L << 24)) break;
  }
  lc.mean_samples = n;
  // Liouville: the multiplier is exp of the divergence integrated over one
  // period, and the divergence is affine in u2^2.
  lc.log_multiplier =
      lc.period * -(1.0 / p.g) * (3.0 * p.vs() * y2 + 3.0 * kcoef(p) * lc.mean_u2_sq);
  lc.multiplier = std::exp(lc.log_multiplier);
  return lc;
}

AveragedCurve averaged_curve(const Params& p, std::vector<double> grid, unsigned workers,
                             const CycleOptions& opt) {
  if (grid.empty()) throw DomainError("empty y2 grid");
  std::sort(grid.begin(), grid.end());
  AveragedCurve curve;
  curve.points.resize(grid.size());
  const double slope = melnikov_slope(p);
  parallel_for(grid.size(), workers ? workers : default_workers(), [&](std::size_t i) {
    AveragedPoint& pt = curve.points[i];
    pt.y2 = grid[i];
    pt.melnikov = slope * grid[i];
    try {
      const LimitCycle lc = find_limit_cycle(grid[i], p, opt);
      pt.period = lc.period;
      pt.mean_u2_sq = lc.mean_u2_sq;
      pt.g_avg = g_avg_from_mean(grid[i], lc.mean_u2_sq, p);
    } catch (const std::exception& e) {
      pt.error = e.what();
      pt.g_avg = std::numeric_limits<double>::quiet_NaN();
    }
  });
  curve.strictly_decreasing = true;
  for (std::size_t i = 0; i + 1 < curve.points.size(); ++i) {
    if (!(curve.points[i + 1].g_avg < curve.points[i].g_avg)) {
      curve.strictly_decreasing = false;
      curve.violations.push_back(curve.points[i].y2);
    }
  }
  return curve;
}

std::vector<double> default_equilibrium_grid() {
  std::vector<double> g;
  for (double a = 1e-3; a < 100.0; a *= 1.25) g.push_back(-a);
  g.push_back(-100.0);
  return g;
}

double solve_c2_equilibrium(double c2, const Params& p, const AveragedCurve& table,
                            const CycleOptions& opt) {
  if (c2 == 0.0) throw OutOfRange("c2 = 0 corresponds to the Hopf point y2 = 0", 0.0);
  // Points ascending in y2, closed by the limit g_avg(0-) = 0.
  std::vector<std::pair<double, double>> pts;
  for (const auto& pt : table.points)
    if (pt.error.empty() && std::isfinite(pt.g_avg)) pts.emplace_back(pt.y2, pt.g_avg);
  pts.emplace_back(0.0, 0.0);
  std::sort(pts.begin(), pts.end());

  // The branch continuing from y2 = 0 wins when the curve folds.
  for (std::size_t i = pts.size() - 1; i-- > 0;) {
    const double a = pts[i].second - c2, b = pts[i + 1].second - c2;
    if ((a < 0) == (b < 0) && a != 0.0) continue;
    if (a == 0.0) return pts[i].first;
    // Within 1e-9 of the Hopf point the Melnikov line is exact to rounding.
    auto resid = [&](double y2) {
      if (y2 > -1e-9) return melnikov_slope(p) * y2 - c2;
      return g_avg_from_mean(y2, find_limit_cycle(y2, p, opt).mean_u2_sq, p) - c2;
    };
    const double lo = pts[i].first, hi = pts[i + 1].first;
    const double flo = resid(lo), fhi = resid(hi);
    std::uintmax_t iters = 60;
    const auto br = boost::math::tools::toms748_solve(
        resid, lo, hi, flo, fhi,
        [](double x, double y) { return std::abs(x - y) < 1e-13 * std::max(1.0, std::abs(x)); },
        iters);
    const double y2 = 0.5 * (br.first + br.second);
    if (std::abs(resid(y2)) > 1e-8) throw NewtonDiverged("equilibrium residual above 1e-8");
    return y2;
  }
  double best = pts.front().first, gap = std::numeric_limits<double>::infinity();
  for (const auto& [y2, gv] : pts)
    if (std::abs(gv - c2) < gap) {
      gap = std::abs(gv - c2);
      best = y2;
    }
  throw OutOfRange("c2 outside the span of the averaged curve", best);
}

double solve_c2_equilibrium(double c2, const Params& p) {
  if (c2 == 0.0) throw OutOfRange("c2 = 0 corresponds to the Hopf point y2 = 0", 0.0);
  return solve_c2_equilibrium(c2, p, averaged_curve(p, default_equilibrium_grid()));
}

double gamma2_focus_limit(const Params& p) { return -2.0 * p.g / (3.0 * p.vs()); }

namespace {

// Larger real part of the eigenvalues of the linearized layer at (0,0):
// tr = kappa y2, det = 1.
double re_nu_plus(double y2, double kappa) {
  const double tr = kappa * y2;
  if (tr * tr < 4.0) return 0.5 * tr;
  const double sq = std::sqrt(tr * tr - 4.0);
  return tr > 0.0 ? 0.5 * (tr + sq) : 2.0 / (tr - sq);
}

// (rho(y) - rho(e)) / (y - e), exact in each regime.
double re_nu_quotient(double y, double e, double kappa) {
  const double ty = kappa * y, te = kappa * e;
  const bool fy = ty * ty < 4.0, fe = te * te < 4.0;
  if (fy && fe) return 0.5 * kappa;
  if (!fy && !fe && (ty > 0) == (te > 0)) {
    const double sy = std::sqrt(ty * ty - 4.0), se = std::sqrt(te * te - 4.0);
    const double sign = ty > 0 ? 1.0 : -1.0;
    return 0.5 * kappa + sign * 0.5 * kappa * kappa * (y + e) / (sy + se);
  }
  return (re_nu_plus(y, kappa) - re_nu_plus(e, kappa)) / (y - e);
}

template <class F>
double gk(F f, double a, double b) {
  if (a == b) return 0.0;
  // Mapped onto [0, 1]: the library's per-panel error floor does not scale with width.
  const double w = b - a;
  double err = 0;
  const double v = w * boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
                           [&](double t) { return f(a + w * t); }, 0.0, 1.0, 20, 1e-13, &err);
  err *= std::abs(w);
  if (!std::isfinite(v) || err > 1e-10 * std::max(1.0, std::abs(v)))
    throw QuadratureFailure("adaptive quadrature missed its tolerance");
  return v;
}

// Integral of f over [a, b] split at the focus/node kinks. On the nodal side
// the integrand behaves like sqrt(|y| - kink); the substitution
// |y| = kink + t^2 removes the square-root endpoint.
template <class F>
double gk_split(F f, double a, double b, double kink) {
  std::vector<double> cuts{a};
  for (double k : {-kink, kink})
    if (k > a && k < b) cuts.push_back(k);
  cuts.push_back(b);
  double s = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i], hi = cuts[i + 1];
    if (hi <= -kink) {
      s += gk([&](double t) { return 2.0 * t * f(-kink - t * t); }, std::sqrt(-kink - hi),
              std::sqrt(-kink - lo));
    } else if (lo >= kink) {
      s += gk([&](double t) { return 2.0 * t * f(kink + t * t); }, std::sqrt(lo - kink),
              std::sqrt(hi - kink));
    } else {
      s += gk(f, lo, hi);
    }
  }
  return s;
}

struct ExitSetup {
  double kappa, e, kink, g;
};

ExitSetup exit_setup(double c2, const Params& p) {
  p.require_repulsive();
  if (!(c2 < 0.0)) throw DomainError("exit point needs c2 < 0");
  return {-3.0 * p.vs() / p.g, 2.0 * c2 * p.g, gamma2_focus_limit(p), p.g};
}

// W over (-inf, Y] for Y <= 0.
double w_negative(double Y, const ExitSetup& s) {
  auto f = [&](double y) { return 2.0 * s.g * re_nu_plus(y, s.kappa) / (y - s.e); };
  // Tail on (-inf, -1] through s = 1/y2.
  const double top = std::min(Y, -1.0);
  double w = gk([&](double t) { return f(1.0 / t) / (t * t); }, 1.0 / top, 0.0);
  if (Y > -1.0) w += gk_split(f, -1.0, Y, s.kink);
  return w;
}

}  // namespace

double way_in_out(double Y, double c2, const Params& p) {
  const ExitSetup s = exit_setup(c2, p);
  if (!(Y < s.e)) throw DomainError("W is defined only below 2 c2 g");
  if (Y <= 0.0) return w_negative(Y, s);
  const double A = -2.0 * s.g * re_nu_plus(s.e, s.kappa);
  auto R = [&](double y) { return 2.0 * s.g * re_nu_quotient(y, s.e, s.kappa); };
  return w_negative(0.0, s) + A * std::log(s.e / (s.e - Y)) + gk_split(R, 0.0, Y, s.kink);
}

ExitPoint exit_point_detail(double c2, const Params& p) {
  const ExitSetup s = exit_setup(c2, p);
  const double w0 = w_negative(0.0, s);
  const double A = -2.0 * s.g * re_nu_plus(s.e, s.kappa);
  auto R = [&](double y) { return 2.0 * s.g * re_nu_quotient(y, s.e, s.kappa); };
  // Unknown L = ln(e / gap); the log singularity at y2 = e is integrated exactly.
  auto G = [&](double L) {
    const double Y = -s.e * std::expm1(-L);
    return w0 + A * L + gk_split(R, 0.0, Y, s.kink);
  };
  if (!(w0 < 0.0)) throw NoRootInBracket("W(0) is not negative");
  double lo = 0.0, hi = 1.0, ghi = G(hi);
  while (!(ghi > 0.0)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw NoRootInBracket("no sign change of W below 2 c2 g");
    ghi = G(hi);
  }
  std::uintmax_t iters = 100;
  const auto br = boost::math::tools::toms748_solve(
      G, lo, hi, G(lo), ghi, [](double a, double b) { return std::abs(a - b) < 1e-14 * std::max(1.0, a); },
      iters);
  const double L = 0.5 * (br.first + br.second);
  return {-s.e * std::expm1(-L), s.e * std::exp(-L), std::log(s.e) - L};
}

double exit_point(double c2, const Params& p) { return exit_point_detail(c2, p).y_exit; }

std::vector<ExitPointRow> exit_point_curve(const Params& p, const std::vector<double>& grid,
                                           unsigned workers) {
  if (grid.empty()) throw DomainError("empty c2 grid");
  std::vector<ExitPointRow> rows(grid.size());
  const double limit = gamma2_focus_limit(p);
  parallel_for(grid.size(), workers ? workers : default_workers(), [&](std::size_t i) {
    rows[i].c2 = grid[i];
    try {
      rows[i].y_exit = exit_point(grid[i], p);
      rows[i].regime = rows[i].y_exit < limit ? "focus" : "node";
    } catch (const std::exception& e) {
      rows[i].error = e.what();
      rows[i].y_exit = std::numeric_limits<double>::quiet_NaN();
    }
  });
  return rows;
}

int weber_zero_count(double mu, double L) {
  if (!(mu > 0.0)) throw DomainError("weber_zero_count needs mu > 0");
  if (!(L > 0.0)) throw DomainError("integration window must be positive");
  if (std::abs(mu - std::round(mu)) < 1e-12) throw IntegerResonance("integer mu admits a bounded solution");
  IntegratorConfig cfg;
  cfg.rtol = 1e-12;
  cfg.atol = 1e-300;
  cfg.t_max = 2.0 * L;
  cfg.keep_samples = false;
  EventSpec<2> zero;
  zero.fn = [](double, const Vec2& s) { return s[0]; };
  const Vec2 s0{std::pow(L, mu), -mu * std::pow(L, mu - 1.0)};
  const auto tr = integrate<2>([mu](double Y, const Vec2& s) { return rhs_weber(s, Y, mu); }, -L,
                               s0, cfg, {zero});
  return static_cast<int>(tr.events.size());
}

Gamma2Class gamma2_classify(double y2, double c2, const Params& p) {
  p.require_repulsive();
  const double kappa = -3.0 * p.vs() / p.g;
  const double limit = gamma2_focus_limit(p);
  auto eig = [&](double y) -> std::array<std::complex<double>, 2> {
    const double tr = kappa * y;
    const std::complex<double> d = std::sqrt(std::complex<double>(tr * tr - 4.0, 0.0));
    return {0.5 * (tr - d), 0.5 * (tr + d)};
  };
  auto tag = [&](double y) -> std::string {
    if (y < 0.0) return "attracting";
    if (y == 0.0) return "hopf";
    return y < limit ? "repelling-focus" : "repelling-node";
  };
  Gamma2Class out;
  out.tag = tag(y2);
  out.eig = eig(y2);
  out.q2_y2 = 2.0 * c2 * p.g;
  out.q2_eig = eig(out.q2_y2);
  // The slow direction along gamma_2 always contracts (slope 1/(2g) < 0).
  const double yq = out.q2_y2;
  if (yq < 0.0)
    out.q2_tag = "attracting";
  else if (yq == 0.0)
    out.q2_tag = "hopf";
  else
    out.q2_tag = yq < limit ? "saddle-focus" : "saddle-node-type";
  return out;
}

}  // namespace cusp
