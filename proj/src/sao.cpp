#include "cusp/sao.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cusp/parallel.hpp"

namespace cusp {

namespace {

constexpr int kZero = 0, kOut = 1, kLeave = 2, kExtremum = 3, kClosest = 4, kSettled = 5;

double wrap(double a) {
  constexpr double pi = std::numbers::pi;
  while (a > pi) a -= 2 * pi;
  while (a <= -pi) a += 2 * pi;
  return a;
}

double angle(const Vec4& s) { return std::atan2(s[3], s[1]); }

void add_flag(std::string& flags, const char* f) {
  if (!flags.empty()) flags += ';';
  flags += f;
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::match: return "match";
    case Verdict::mismatch: return "mismatch";
    case Verdict::saddle_node_band: return "saddle-node-band";
    case Verdict::underflow: return "underflow";
    case Verdict::no_prediction: return "no-prediction";
  }
  return "?";
}

void PassageSpec::validate() const {
  p.require_repulsive();
  if (!(p.eps > 0.0)) throw DomainError("a passage needs eps > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  if (!(z_guard > 0.0) || !(u_leave > 0.0)) throw DomainError("z_guard and u_leave must be positive");
  if (!(rtol > 0.0) || !(atol > 0.0)) throw DomainError("tolerances must be positive");
}

double saddle_node_band_start(const Params& p) {
  return p.vs() - std::sqrt(p.eps) / (3.0 * p.vs());
}

StateFull seed_on_attracting_sheet(const PassageSpec& spec) {
  const Params& p = spec.p;
  p.require_repulsive();
  if (spec.u0 == 0.0) throw SeedOnSymmetricAxis("seed with u0 = 0 lies on the symmetric axis");
  const double vs = p.vs();
  const double fold = -((9.0 * vs * vs + p.g) / vs) * spec.u0 * spec.u0;
  if (!(spec.y0 < fold)) throw DomainError("seed must lie below the fold, on the attracting sheet");
  const StateSym s{cm_x(spec.u0, spec.y0, p), spec.u0, spec.y0, cm_Q(spec.u0, spec.y0, p)};
  return from_sym(s, p);
}

Passage run_passage(const PassageSpec& spec) {
  spec.validate();
  const Params& p = spec.p;
  const Vec4 s0 = to_sym(seed_on_attracting_sheet(spec), p).arr();
  const double y_in = spec.y_in(), y_out = spec.y_out();
  const double yq = -p.c * p.c * p.c + 3.0 * p.c - p.ws();
  const Vec4 q{p.c, 0.0, yq, 0.0};
  const double r2 = std::pow(p.eps, 0.25);
  const double wu = 1.0 / (r2 * r2), wy = wu * wu, wz = wu * wu * wu;

  auto f = [&p](double, const Vec4& s) { return rhs_sym(StateSym::of(s), p).arr(); };
  auto in_window = [=](const Vec4& s) { return s[2] >= y_in && s[2] <= y_out; };

  std::vector<EventSpec<4>> ev;
  ev.push_back({[](double, const Vec4& s) { return s[1]; }, Crossing::any,
                [=, g = spec.z_guard](double, const Vec4& s) {
                  return std::abs(s[3]) <= g && in_window(s);
                },
                false, kZero});
  ev.push_back({[=](double, const Vec4& s) { return s[2] - y_out; }, Crossing::rising, {}, true,
                kOut});
  ev.push_back({[=, l = spec.u_leave](double, const Vec4& s) { return std::abs(s[1]) - l; },
                Crossing::rising, {}, true, kLeave});
  ev.push_back({[&p](double, const Vec4& s) { return rhs_sym(StateSym::of(s), p).u; },
                Crossing::any, [=](double, const Vec4& s) { return s[2] >= y_in; }, false,
                kExtremum});
  ev.push_back({[&, q](double, const Vec4& s) {
                  const StateSym d = rhs_sym(StateSym::of(s), p);
                  return wu * s[1] * d.u + wy * (s[2] - q[2]) * d.y + wz * s[3] * d.z;
                },
                Crossing::rising, {}, false, kClosest});
  ev.push_back({[=, tol = spec.converge_tol](double, const Vec4& s) {
                  double d = 0;
                  for (int i = 0; i < 4; ++i) d += (s[i] - q[i]) * (s[i] - q[i]);
                  return std::sqrt(d) - tol;
                },
                Crossing::falling, {}, true, kSettled});

  IntegratorConfig cfg;
  cfg.rtol = spec.rtol;
  cfg.atol = spec.atol;
  cfg.t_max = spec.t_horizon();
  cfg.event_tol = 1e-10;
  cfg.keep_dense = spec.keep_dense;
  StepHooks<4> hooks;
  hooks.accept = [](const Vec4& a, const Vec4& b) {
    return std::abs(wrap(angle(b) - angle(a))) < 0.5 * std::numbers::pi;
  };

  Passage out;
  out.traj = integrate<4>(f, 0.0, s0, cfg, ev, hooks);
  const auto& tr = out.traj;
  SaoReport& rep = out.report;

  const auto leave = tr.events_with(kLeave);
  if (!leave.empty() && leave.front().state[2] < y_in)
    throw EscapeBeforeEntry("orbit left the cusp region before reaching y_in");
  rep.left_region = !leave.empty();
  rep.converged = !tr.events_with(kSettled).empty();
  if (const auto o = tr.events_with(kOut); !o.empty()) {
    rep.u_section = o.front().state[1];
    rep.z_section = o.front().state[3];
  }

  // Unwrapped angle at the accepted samples; steps were vetoed unless the
  // increment stayed below pi/2, so unwrapping is exact.
  std::vector<double> theta(tr.t.size());
  for (std::size_t k = 0; k < tr.t.size(); ++k)
    theta[k] = k == 0 ? angle(tr.y[0]) : theta[k - 1] + wrap(angle(tr.y[k]) - angle(tr.y[k - 1]));
  auto theta_at = [&](double te, const Vec4& se) {
    std::size_t k = std::upper_bound(tr.t.begin(), tr.t.end(), te) - tr.t.begin();
    k = k == 0 ? 0 : k - 1;
    return theta[k] + wrap(angle(se) - angle(tr.y[k]));
  };
  const double theta_end = theta.back();

  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    const auto& s = tr.y[k];
    if (in_window(s) && std::max(std::abs(s[1]), std::abs(s[3])) < 10.0 * spec.atol) {
      rep.underflow = true;
      break;
    }
  }

  const auto zeros = tr.events_with(kZero);
  rep.zeros = static_cast<int>(zeros.size());
  for (const auto& e : zeros) {
    rep.zero_records.push_back({e.t, e.state[2], e.state[3]});
    // Amplitude in the scaling chart: z2 = z / r2^3.
    if (std::abs(e.state[3]) / (r2 * r2 * r2) >= spec.o1_threshold) ++rep.o1_oscillations;
  }

  if (!zeros.empty()) {
    rep.theta_lift = theta_end - theta_at(zeros.front().t, zeros.front().state);
    rep.rotations = static_cast<int>(std::floor(rep.theta_lift / std::numbers::pi + 1e-9));
    rep.z_exit = std::abs(zeros.back().state[3]);
    rep.last_amplitude = rep.z_exit;
  }
  if (zeros.size() >= 2) {
    const double ta = zeros[zeros.size() - 2].t, tb = zeros.back().t;
    double best = 0;
    for (const auto& e : tr.events_with(kExtremum))
      if (e.t > ta && e.t < tb) best = std::max(best, std::abs(e.state[1]));
    if (best > 0) rep.u_exit = best;
  }

  const auto mins = tr.events_with(kClosest);
  auto dist = [&](const Vec4& s) {
    return std::sqrt(wu * s[1] * s[1] + wy * (s[2] - q[2]) * (s[2] - q[2]) + wz * s[3] * s[3]);
  };
  for (const auto& e : mins) {
    const double d = dist(e.state);
    if (!(d >= rep.closest_distance)) {
      rep.closest_distance = d;
      rep.t_closest = e.t;
      rep.lift_after_closest = theta_end - theta_at(e.t, e.state);
    }
  }
  rep.spiral_exit = rep.left_region && rep.lift_after_closest > 3.0 * std::numbers::pi;

  const double mu = p.mu();
  rep.mu = mu;
  if (p.lambda1() < 0.0 && std::isfinite(mu)) rep.predicted = static_cast<int>(std::floor(mu));
  if (rep.zeros > 0 && rep.rotations != rep.zeros - 1) add_flag(rep.flags, "non-simple-zeros");
  if (rep.underflow) add_flag(rep.flags, "underflow");
  if (tr.outcome == Outcome::horizon_exceeded) add_flag(rep.flags, "horizon");
  if (rep.converged) add_flag(rep.flags, "settled-on-q");

  if (rep.underflow)
    rep.verdict = Verdict::underflow;
  else if (p.c > saddle_node_band_start(p))
    rep.verdict = Verdict::saddle_node_band;
  else if (rep.predicted < 0)
    rep.verdict = Verdict::no_prediction;
  else
    rep.verdict = rep.rotations == rep.predicted ? Verdict::match : Verdict::mismatch;
  return out;
}

std::vector<SweepRow> sweep_counts(const PassageSpec& base, const std::vector<double>& c_grid,
                                   unsigned workers) {
  if (c_grid.empty()) throw DomainError("empty c grid");
  std::vector<SweepRow> rows(c_grid.size());
  parallel_for(c_grid.size(), workers ? workers : default_workers(), [&](std::size_t i) {
    PassageSpec spec = base;
    spec.p.c = c_grid[i];
    spec.p.c2.reset();
    SweepRow& row = rows[i];
    row.c = c_grid[i];
    row.eps = spec.p.eps;
    row.in_band = row.c > saddle_node_band_start(spec.p);
    try {
      row.report = run_passage(spec).report;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });
  return rows;
}

ScalingFit amplitude_scaling(const PassageSpec& base, const std::vector<double>& eps_grid,
                             unsigned workers) {
  if (eps_grid.size() < 2) throw DomainError("scaling fit needs at least two eps values");
  ScalingFit fit;
  fit.rows.resize(eps_grid.size());
  parallel_for(eps_grid.size(), workers ? workers : default_workers(), [&](std::size_t i) {
    PassageSpec spec = base;
    spec.p.eps = eps_grid[i];
    ScalingRow& row = fit.rows[i];
    row.eps = eps_grid[i];
    try {
      row.report = run_passage(spec).report;
      row.used = !row.report.underflow && std::isfinite(row.report.u_exit) &&
                 std::isfinite(row.report.z_exit);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });

  auto slope = [&](auto pick) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& r : fit.rows) {
      if (!r.used) continue;
      const double x = std::log(r.eps), y = std::log(pick(r.report));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++n;
    }
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  fit.u_slope = slope([](const SaoReport& r) { return r.u_exit; });
  fit.z_slope = slope([](const SaoReport& r) { return r.z_exit; });
  return fit;
}

Passage saddle_node_passage(const PassageSpec& base, double c2) {
  PassageSpec spec = base;
  const double lo = -1.0 / (3.0 * spec.p.vs());
  if (!(c2 > lo) || c2 == 0.0)
    throw DomainError("c2 must exceed -1/(3 v_s) and be nonzero");
  spec.p = Params::saddle_node(spec.p.g, c2, spec.p.eps);
  return run_passage(spec);
}

}  // namespace cusp
