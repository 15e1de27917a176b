#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cusp/cycles.hpp"
#include "cusp/errors.hpp"
#include "cusp/geometry.hpp"
#include "cusp/integrate.hpp"
#include "cusp/sao.hpp"
#include "cusp/vfields.hpp"

using namespace cusp;

namespace {

struct Result {
  bool pass = true;
  std::ostringstream msg;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      msg << " [failed: " << what << "]";
    }
  }
};

Params params(double c, double eps = 0.01) { return Params{-1.0, c, eps, std::nullopt}; }

PassageSpec spec_at(double c, double eps = 0.01) {
  PassageSpec s;
  s.p = params(c, eps);
  return s;
}

double max_abs(const Vec4& a, const Vec4& b) {
  double m = 0;
  for (int i = 0; i < 4; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void criterion1(Result& r) {
  const auto rep = run_passage(spec_at(1.24)).report;
  r.msg << "c=1.24 zeros=" << rep.zeros << " rotations=" << rep.rotations << ";";
  r.check(rep.zeros == 5 && rep.rotations == 4, "c=1.24 needs 5 zeros and 4 rotations");
  const std::pair<double, int> expect[] = {{1.18, 1}, {1.20, 1}, {1.22, 2}, {1.24, 4}, {1.25, 5}};
  for (const auto& [c, n] : expect) {
    const auto q = run_passage(spec_at(c)).report;
    const int pred = static_cast<int>(std::floor(params(c).mu()));
    r.msg << " c=" << c << ":" << q.rotations << "/" << pred;
    r.check(pred == n, "prediction at c=" + std::to_string(c));
    r.check(q.rotations == pred, "rotations at c=" + std::to_string(c));
  }
}

void criterion2(Result& r) {
  std::vector<double> grid;
  for (int i = 0; i <= 18; ++i) grid.push_back(1.17 + 0.005 * i);
  const auto rows = sweep_counts(spec_at(1.2), grid);
  int agree = 0, outside = 0;
  for (const auto& row : rows) {
    if (row.in_band) continue;
    ++outside;
    if (row.error.empty() && row.report.rotations == row.report.predicted) ++agree;
    else r.check(false, "mismatch at c=" + std::to_string(row.c));
  }
  r.msg << agree << "/" << outside << " grid points agree;";
  // Band points past the saddle-node edge: counts must not decrease.
  const auto band = sweep_counts(spec_at(1.2), {1.266, 1.27, 1.275, 1.28, 1.285});
  int prev = -1;
  r.msg << " band counts";
  for (const auto& row : band) {
    r.check(row.in_band, "band flag at c=" + std::to_string(row.c));
    r.check(row.error.empty(), "band run failed at c=" + std::to_string(row.c));
    r.msg << " " << row.report.rotations;
    r.check(row.report.rotations >= prev, "band counts decrease");
    prev = row.report.rotations;
  }
}

void criterion3(Result& r) {
  const std::vector<double> eps{1e-4, 3e-4, 1e-3, 3e-3, 1e-2};
  const auto fit = amplitude_scaling(spec_at(1.22), eps);
  const double target = 0.5 * params(1.22).mu();
  const double gap = fit.z_slope - fit.u_slope;
  r.msg << "u-slope=" << fit.u_slope << " (target " << target << ") gap=" << gap << ";";
  r.check(std::abs(fit.u_slope - target) <= 0.1 * target, "u exponent");
  r.check(std::abs(gap - 0.5) <= 0.1, "exponent gap");
  PassageSpec wide = spec_at(1.22);
  wide.delta *= 2;
  const auto fit2 = amplitude_scaling(wide, eps);
  r.msg << " doubled delta u-slope=" << fit2.u_slope;
  r.check(std::abs(fit2.u_slope - fit.u_slope) < 0.05, "slope changes with delta");
}

void criterion4(Result& r) {
  const Params p = params(1.24);
  const double vs = p.vs();
  const double hc = hopf_crossing(p, 1.2, 1.35);
  r.msg << "crossing-v_s=" << hc - vs << ";";
  r.check(std::abs(hc - vs) <= 1e-10, "Hopf crossing");
  const auto at = eigen_summary(params(vs));
  r.msg << " nu34=" << at.nu34[0].real() << "+-" << std::abs(at.nu34[0].imag()) << "i;";
  r.check(std::abs(at.nu34[0].real()) < 1e-12, "nu34 real part");
  r.check(std::abs(std::abs(at.nu34[0].imag()) - 0.1) < 1e-12, "nu34 imaginary part");
  r.check(std::abs(at.nu34[0].imag() + at.nu34[1].imag()) < 1e-12, "conjugate pair");
  const double l1 = lyapunov_coefficients(p).l1_hat;
  r.msg << " l1_hat=" << l1 << ";";
  r.check(std::abs(l1 - 1.5) < 1e-14, "l1_hat");

  // Averaged equilibrium for c2 = +0.1, then one reverse-time run of the layer there.
  const double y2 = solve_c2_equilibrium(0.1, p);
  const double tr = -3.0 * vs * y2 / p.g;
  r.msg << " y2*=" << y2 << " tr=" << tr;
  r.check(y2 < 0 && tr < 0, "origin of the layer is not attracting");
  const auto f = [&](double, const Vec<2>& s) { return rhs_lienard_fast(s, y2, p); };
  EventSpec<2> neg{[](double, const Vec<2>& s) { return s[0]; }, Crossing::any,
                   [](double, const Vec<2>& s) { return s[1] < 0; }, false, 0};
  EventSpec<2> pos{[](double, const Vec<2>& s) { return s[0]; }, Crossing::any,
                   [](double, const Vec<2>& s) { return s[1] > 0; }, false, 1};
  IntegratorConfig cfg;
  cfg.rtol = 1e-11;
  cfg.atol = 1e-13;
  cfg.direction = Direction::backward;
  cfg.t_max = 3000;
  cfg.keep_samples = false;
  const auto run = integrate<2>(f, 0.0, {1e-3, 0.0}, cfg, {neg, pos});
  const auto a = run.events_with(0), b = run.events_with(1);
  r.check(a.size() > 4 && b.size() > 4, "no sustained rotation in reverse time");
  if (a.size() > 4 && b.size() > 4) {
    const std::size_t n = a.size();
    const double z1 = a[n - 1].state[1], z0 = a[n - 2].state[1];
    const double T1 = a[n - 2].t - a[n - 1].t, T0 = a[n - 3].t - a[n - 2].t;
    r.msg << " cycle z-=" << z1 << " z+=" << b.back().state[1] << " T=" << T1;
    r.check(std::abs(z1 - z0) < 1e-6 * std::max(1.0, std::abs(z1)), "returns did not settle");
    r.check(std::abs(T1 - T0) < 1e-6 * T1, "return times did not settle");
    r.check(z1 < 0 && b.back().state[1] > 0, "cycle does not enclose the equilibrium");
  }
}

void criterion5(Result& r) {
  const auto d = bifurcation_scan(params(1.24), 0.5, 1.6);
  const double want[] = {1.0, (4.0 / 3.0) / std::sqrt(5.0 / 3.0), std::sqrt(5.0 / 3.0)};
  const char* names[] = {"P1", "P2", "T"};
  for (int i = 0; i < 3; ++i) {
    double found = std::nan("");
    for (const auto& b : d.points)
      if (b.label == names[i]) found = b.c;
    r.msg << " " << names[i] << "=" << found;
    r.check(std::abs(found - want[i]) <= 1e-8, std::string(names[i]) + " location");
  }
  double worst = 0;
  for (double c : {0.3, 0.6, 0.9, 0.99, 1.05, 1.1, 1.2, 1.24, 1.28, 1.4, 1.6}) {
    for (const auto& s : folded_singularities(params(c))) {
      if (s.kind != SingularityKind::nonsymmetric_f3 && s.kind != SingularityKind::nonsymmetric_f4)
        continue;
      worst = std::max(worst, std::abs(s.det));
    }
  }
  r.msg << "; max |det Dh| at f3/f4=" << worst;
  r.check(worst <= 1e-10, "det Dh at f3/f4");
}

void criterion6(Result& r) {
  const Params p = params(1.24);
  std::vector<double> grid;
  for (int i = 0; i <= 60; ++i) grid.push_back(-3.0 + 0.05 * i);
  grid.back() = -0.005;
  const auto curve = averaged_curve(p, grid);
  int failed = 0;
  for (const auto& pt : curve.points) failed += !pt.error.empty();
  r.check(failed == 0, "cycle failures on the grid");
  r.msg << "strictly decreasing=" << (curve.strictly_decreasing ? "yes" : "no");
  if (!curve.violations.empty())
    r.msg << " (" << curve.violations.size() << " increasing pairs, from y2=" << curve.violations.front()
          << " to " << curve.violations.back() << ")";
  r.check(curve.strictly_decreasing, "g_avg not strictly decreasing");

  std::vector<double> near;
  for (int i = 0; i <= 9; ++i) near.push_back(-0.05 + 0.005 * i);
  const auto small = averaged_curve(p, near);
  const auto& a = small.points.front();
  const auto& b = small.points.back();
  const double slope = (b.g_avg - a.g_avg) / (b.y2 - a.y2);
  r.msg << "; secant slope=" << slope;
  r.check(std::abs(slope + 1.0 / 7.0) <= 0.05 / 7.0, "secant slope");
}

void criterion7(Result& r) {
  const Params p = params(1.24);
  std::vector<double> grid;
  for (int i = 0; i <= 79; ++i) grid.push_back(-0.8 + 0.01 * i);
  const auto rows = exit_point_curve(p, grid);
  const double lim = gamma2_focus_limit(p);
  double crossing = std::nan("");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    r.check(rows[i].error.empty(), "exit point failed at c2=" + std::to_string(rows[i].c2));
    if (i == 0) continue;
    r.check(rows[i].y_exit < rows[i - 1].y_exit, "not monotone at c2=" + std::to_string(rows[i].c2));
    const double fa = rows[i - 1].y_exit - lim, fb = rows[i].y_exit - lim;
    if (fa * fb < 0) crossing = rows[i - 1].c2 + (rows[i].c2 - rows[i - 1].c2) * fa / (fa - fb);
  }
  r.msg << "crossing at c2=" << crossing;
  r.check(std::abs(crossing + 0.42) <= 0.02, "crossing location");
  r.msg << "; y_exit at c2=-1e-2,-1e-3,-1e-4:";
  double prev = rows.back().y_exit;
  for (double c2 : {-1e-2, -1e-3, -1e-4}) {
    const double y = exit_point(c2, p);
    r.msg << " " << y;
    r.check(y > 0 && y <= 2 * c2 * p.g && y <= prev, "y_exit does not shrink toward 0");
    prev = y;
  }
}

void criterion8(Result& r) {
  for (double mu : {0.5, 1.5, 2.7, 4.06, 6.3}) {
    const int n = static_cast<int>(std::floor(mu)) + 1;
    const int a = weber_zero_count(mu, 8.0), b = weber_zero_count(mu, 16.0);
    r.msg << " mu=" << mu << ":" << a << "," << b;
    r.check(a == n && b == n, "count at mu=" + std::to_string(mu));
  }
}

void criterion9(Result& r) {
  const auto a = saddle_node_passage(spec_at(1.24, 0.01), -0.1).report;
  const auto b = saddle_node_passage(spec_at(1.24, 0.0025), -0.1).report;
  r.msg << "c2=-0.1: lift after closest approach=" << a.lift_after_closest / M_PI
        << "pi, zeros eps=0.01:" << a.zeros << " eps=0.0025:" << b.zeros << ";";
  r.check(a.left_region && a.lift_after_closest > 3 * M_PI, "no outward spiral exit");
  r.check(b.zeros > a.zeros, "zero count does not grow as eps shrinks");
  const auto q = saddle_node_passage(spec_at(1.24, 0.01), 0.1).report;
  r.msg << " c2=+0.1: O(1) oscillations=" << q.o1_oscillations << " settled=" << q.converged;
  r.check(q.o1_oscillations == 0, "SAOs for c2 > 0");
  r.check(q.converged, "no convergence to the equilibrium");
}

void criterion10(Result& r) {
  std::mt19937_64 rng(1234567);
  std::uniform_real_distribution<double> S(-1.5, 1.5), C(0.8, 1.4), G(-2.0, -0.2), E(0.001, 0.1),
      R(0.05, 1.0), Y(-2.0, -0.1);
  double equiv = 0, flip = 0, inv = 0, chart = 0, conj = 0, roundtrip = 0, fi_entry = 0,
         fi_scaling = 0;
  for (int n = 0; n < 100; ++n) {
    Params p{G(rng), C(rng), E(rng), std::nullopt};
    const StateFull s{S(rng), S(rng), S(rng), S(rng)};
    equiv = std::max(equiv, max_abs(rhs_full(s.swapped(), p).arr(), rhs_full(s, p).swapped().arr()));

    const StateSym y = to_sym(s, p);
    const auto a = rhs_sym(y, p), b = rhs_sym({y.x, -y.u, y.y, -y.z}, p);
    flip = std::max(flip, max_abs(a.arr(), {b.x, -b.u, b.y, -b.z}));
    roundtrip = std::max(roundtrip, max_abs(from_sym(y, p).arr(), s.arr()));
    const auto d = rhs_full(s, p);
    conj = std::max(conj, max_abs({0.5 * (d.v1 + d.v2), 0.5 * (d.v1 - d.v2), 0.5 * (d.w1 + d.w2),
                                   0.5 * (d.w1 - d.w2)},
                                  rhs_sym(y, p).arr()));

    const auto g1 = rhs_sym({y.x, 0, y.y, 0}, p);
    const auto g2 = rhs_scaling({R(rng), 0, S(rng), 0}, p);
    const Params q = Params::saddle_node(p.g, -0.1, p.eps);
    const auto g3 = rhs_scaling({R(rng), 0, S(rng), 0}, q, ScalingVariant::saddle_node);
    const auto g4 = rhs_entry({R(rng), 0, 0, R(rng)}, p);
    inv = std::max({inv, std::abs(g1.u), std::abs(g1.z), std::abs(g2.u2), std::abs(g2.z2),
                    std::abs(g3.u2), std::abs(g3.z2), std::abs(g4.u1), std::abs(g4.z1)});

    const StateEntry e{R(rng), S(rng), S(rng), R(rng)};
    const CuspPoint pa = blowdown(e), pb = blowdown(chart_entry_to_scaling(e));
    const StateEntry back = chart_scaling_to_entry(chart_entry_to_scaling(e));
    chart = std::max({chart, std::abs(pa.u - pb.u), std::abs(pa.y - pb.y), std::abs(pa.z - pb.z),
                      std::abs(pa.eps - pb.eps), max_abs(back.arr(), e.arr())});

    // First integrals along short trajectories.
    IntegratorConfig cfg;
    cfg.rtol = 1e-11;
    cfg.atol = 1e-14;
    cfg.t_max = 0.5;
    // eps1 grows like a Riccati solution; keep its blow-up time past the horizon.
    const StateEntry e0{R(rng), 0.1 * S(rng), 0.1 * S(rng), 0.2 * R(rng)};
    const auto te = integrate<4>(
        [&](double, const Vec4& v) { return rhs_entry(StateEntry::of(v), p).arr(); }, 0.0,
        e0.arr(), cfg);
    const double I0 = std::pow(e0.r1, 4) * e0.eps1;
    for (const auto& v : te.y)
      fi_entry = std::max(fi_entry, std::abs(std::pow(v[0], 4) * v[3] - I0) / I0);
    const StateScaling s0{R(rng), 0.05 * S(rng), Y(rng), 0.05 * S(rng)};
    const auto ts = integrate<4>(
        [&](double, const Vec4& v) {
          return rhs_scaling(StateScaling::of(v), q, ScalingVariant::saddle_node).arr();
        },
        0.0, s0.arr(), cfg);
    for (const auto& v : ts.y) fi_scaling = std::max(fi_scaling, std::abs(v[0] - s0.r2));
  }
  r.msg << "swap=" << equiv << " flip=" << flip << " gamma=" << inv << " charts=" << chart
        << " conjugacy=" << conj << " round-trip=" << roundtrip << " r1^4 eps1=" << fi_entry
        << " r2=" << fi_scaling;
  r.check(equiv < 1e-14, "swap equivariance");
  r.check(flip < 1e-14, "(u,z) flip equivariance");
  r.check(inv == 0.0, "invariance of u = z = 0");
  r.check(chart < 1e-12, "chart composition");
  r.check(conj < 1e-12, "conjugacy");
  r.check(roundtrip < 1e-14, "coordinate round trip");
  r.check(fi_entry < 1e-9, "r1^4 eps1 conservation");
  r.check(fi_scaling == 0.0, "r2 conservation");
}

struct Criterion {
  std::function<void(Result&)> run;
  double budget_s;
};

const Criterion kCriteria[] = {
    {criterion1, 10},  {criterion2, 300}, {criterion3, 120}, {criterion4, 60},
    {criterion5, 60},  {criterion6, 120}, {criterion7, 60},  {criterion8, 5},
    {criterion9, 120}, {criterion10, 30},
};

bool run_one(int n) {
  Result r;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    kCriteria[n - 1].run(r);
  } catch (const std::exception& e) {
    r.check(false, std::string("exception: ") + e.what());
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.check(dt < kCriteria[n - 1].budget_s, "runtime budget");
  std::printf("CRITERION %d: %s %s (%.2f s)\n", n, r.pass ? "PASS" : "FAIL", r.msg.str().c_str(),
              dt);
  std::fflush(stdout);
  return r.pass;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      which.push_back(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: acceptance [--criterion N]...\n");
      return 2;
    }
  }
  if (which.empty())
    for (int n = 1; n <= 10; ++n) which.push_back(n);
  bool ok = true;
  for (int n : which) {
    if (n < 1 || n > 10) {
      std::fprintf(stderr, "criterion must be in 1..10\n");
      return 2;
    }
    ok = run_one(n) && ok;
  }
  return ok ? 0 : 1;
}
