#pragma once

// Dormand-Prince 5(4) with PI step control, the standard quartic dense
// output, and event location by bisection on the interpolant.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "cusp/errors.hpp"

namespace cusp {

template <std::size_t N>
using Vec = std::array<double, N>;

enum class Direction { forward, backward };
enum class Crossing { rising, falling, any };
enum class Outcome { completed, terminal_event, horizon_exceeded };

struct IntegratorConfig {
  double rtol = 1e-9;
  double atol = 1e-12;
  double h_init = 0.0;  // 0 picks a starting step automatically
  double h_max = std::numeric_limits<double>::infinity();
  double t_max = 1e3;   // length of the integration interval
  Direction direction = Direction::forward;
  double event_tol = 1e-12;
  bool fixed_step = false;  // constant |h| = h_init, no error control
  std::size_t max_steps = 20'000'000;
  bool keep_samples = true;
  bool keep_dense = false;

  void validate() const {
    if (!(rtol > 0.0) || !(atol > 0.0)) throw DomainError("rtol and atol must be positive");
    if (!(t_max > 0.0)) throw DomainError("t_max must be positive");
    if (!(h_max > 0.0)) throw DomainError("h_max must be positive");
    if (!(event_tol > 0.0)) throw DomainError("event_tol must be positive");
    if (h_init < 0.0) throw DomainError("h_init must be non-negative");
    if (fixed_step && !(h_init > 0.0)) throw DomainError("fixed-step mode needs h_init");
  }
};

template <std::size_t N>
struct EventSpec {
  std::function<double(double, const Vec<N>&)> fn;
  Crossing crossing = Crossing::any;
  std::function<bool(double, const Vec<N>&)> guard;  // empty accepts all
  bool terminal = false;
  int id = 0;
};

template <std::size_t N>
struct EventRecord {
  double t;
  Vec<N> state;
  int id;
  bool rising;
};

// One accepted step; evaluates the quartic interpolant on [t0, t0 + h].
template <std::size_t N>
struct DenseSegment {
  double t0 = 0, h = 0;
  std::array<Vec<N>, 5> r{};

  double t1() const { return t0 + h; }
  Vec<N> operator()(double t) const {
    const double th = (t - t0) / h;
    const double th1 = 1.0 - th;
    Vec<N> out;
    for (std::size_t i = 0; i < N; ++i)
      out[i] = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
    return out;
  }
};

template <std::size_t N>
struct Trajectory {
  std::vector<double> t;
  std::vector<Vec<N>> y;
  std::vector<DenseSegment<N>> dense;
  std::vector<EventRecord<N>> events;
  Outcome outcome = Outcome::completed;
  double t_final = 0;
  Vec<N> y_final{};
  std::size_t accepted = 0, rejected = 0;

  std::vector<EventRecord<N>> events_with(int id) const {
    std::vector<EventRecord<N>> out;
    for (const auto& e : events)
      if (e.id == id) out.push_back(e);
    return out;
  }

  // Dense evaluation; requires keep_dense.
  Vec<N> at(double tq) const {
    if (dense.empty()) throw DomainError("trajectory has no dense output");
    const bool fwd = dense.front().h > 0;
    auto it = std::lower_bound(dense.begin(), dense.end(), tq, [fwd](const auto& seg, double v) {
      return fwd ? seg.t1() < v : seg.t1() > v;
    });
    if (it == dense.end()) --it;
    return (*it)(tq);
  }
};

template <std::size_t N>
struct StepHooks {
  // Return false to reject the proposed step (it is retried with half the size).
  std::function<bool(const Vec<N>& y0, const Vec<N>& y1)> accept;
  // Called for every accepted step with its end point, which is the event
  // point when a terminal event cut the step short.
  std::function<void(const DenseSegment<N>&, double t1, const Vec<N>& y1)> observe;
};

namespace detail {

struct DP5 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                          a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                          d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                          d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;
};

template <std::size_t N>
bool finite(const Vec<N>& v) {
  for (double a : v)
    if (!std::isfinite(a)) return false;
  return true;
}

inline bool crosses(double g0, double g1, Crossing dir, bool& rising) {
  const bool up = g0 < 0.0 && g1 >= 0.0;
  const bool down = g0 > 0.0 && g1 <= 0.0;
  rising = up;
  if (dir == Crossing::rising) return up;
  if (dir == Crossing::falling) return down;
  return up || down;
}

}  // namespace detail

template <std::size_t N, class Rhs>
Trajectory<N> integrate(Rhs&& f, double t0, const Vec<N>& y0, const IntegratorConfig& cfg,
                        const std::vector<EventSpec<N>>& events = {},
                        const StepHooks<N>& hooks = {}) {
  using detail::DP5;
  cfg.validate();
  const double sgn = cfg.direction == Direction::forward ? 1.0 : -1.0;
  const double t_end = t0 + sgn * cfg.t_max;

  Trajectory<N> tr;
  if (!detail::finite(y0)) throw NonFiniteState("non-finite initial state");
  Vec<N> k1 = f(t0, y0);
  if (!detail::finite(k1)) throw NonFiniteState("non-finite derivative at initial state");

  auto norm = [&](const Vec<N>& e, const Vec<N>& a, const Vec<N>& b) {
    double s = 0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = cfg.atol + cfg.rtol * std::max(std::abs(a[i]), std::abs(b[i]));
      s += (e[i] / sc) * (e[i] / sc);
    }
    return std::sqrt(s / N);
  };

  double h = cfg.h_init;
  if (h == 0.0) {
    // Standard starting-step heuristic.
    Vec<N> zero{};
    const double d0 = norm(y0, zero, y0);
    const double d1 = norm(k1, zero, y0);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, cfg.t_max);
    Vec<N> y1;
    for (std::size_t i = 0; i < N; ++i) y1[i] = y0[i] + sgn * h0 * k1[i];
    Vec<N> f1 = f(t0 + sgn * h0, y1);
    Vec<N> df;
    for (std::size_t i = 0; i < N; ++i) df[i] = f1[i] - k1[i];
    const double d2 = detail::finite(f1) ? norm(df, zero, y0) / h0 : 1e10;
    const double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                                 : std::pow(0.01 / std::max(d1, d2), 0.2);
    h = std::min(100.0 * h0, h1);
  }
  h = std::min({h, cfg.h_max, cfg.t_max});

  double t = t0;
  Vec<N> y = y0;
  std::vector<double> gprev(events.size());
  for (std::size_t j = 0; j < events.size(); ++j) gprev[j] = events[j].fn(t, y);
  if (cfg.keep_samples) {
    tr.t.push_back(t);
    tr.y.push_back(y);
  }

  double facold = 1e-4;
  const double beta = 0.04, expo1 = 0.2 - beta * 0.75, safe = 0.9;
  bool last_rejected = false;
  bool done = false;
  std::size_t steps = 0;

  while (!done) {
    if (++steps > cfg.max_steps) throw StepSizeUnderflow("step budget exhausted");
    const double remaining = sgn * (t_end - t);
    bool last = false;
    if (h >= remaining) {
      h = remaining;
      last = true;
    }
    if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)))
      throw StepSizeUnderflow("step size underflow at t = " + std::to_string(t));

    const double hs = sgn * h;
    Vec<N> yt, k2, k3, k4, k5, k6, k7, y1, err;
    for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + hs * DP5::a21 * k1[i];
    k2 = f(t + DP5::c2 * hs, yt);
    for (std::size_t i = 0; i < N; ++i) yt[i] = y[i] + hs * (DP5::a31 * k1[i] + DP5::a32 * k2[i]);
    k3 = f(t + DP5::c3 * hs, yt);
    for (std::size_t i = 0; i < N; ++i)
      yt[i] = y[i] + hs * (DP5::a41 * k1[i] + DP5::a42 * k2[i] + DP5::a43 * k3[i]);
    k4 = f(t + DP5::c4 * hs, yt);
    for (std::size_t i = 0; i < N; ++i)
      yt[i] = y[i] + hs * (DP5::a51 * k1[i] + DP5::a52 * k2[i] + DP5::a53 * k3[i] +
                           DP5::a54 * k4[i]);
    k5 = f(t + DP5::c5 * hs, yt);
    for (std::size_t i = 0; i < N; ++i)
      yt[i] = y[i] + hs * (DP5::a61 * k1[i] + DP5::a62 * k2[i] + DP5::a63 * k3[i] +
                           DP5::a64 * k4[i] + DP5::a65 * k5[i]);
    k6 = f(t + hs, yt);
    for (std::size_t i = 0; i < N; ++i)
      y1[i] = y[i] + hs * (DP5::a71 * k1[i] + DP5::a73 * k3[i] + DP5::a74 * k4[i] +
                           DP5::a75 * k5[i] + DP5::a76 * k6[i]);
    k7 = f(t + hs, y1);

    if (!detail::finite(y1) || !detail::finite(k7)) {
      if (cfg.fixed_step) throw NonFiniteState("non-finite state in fixed-step mode");
      h *= 0.25;
      ++tr.rejected;
      last_rejected = true;
      if (h < 1e-300) throw NonFiniteState("non-finite state");
      continue;
    }

    double fac = 1.0;
    if (!cfg.fixed_step) {
      for (std::size_t i = 0; i < N; ++i)
        err[i] = hs * (DP5::e1 * k1[i] + DP5::e3 * k3[i] + DP5::e4 * k4[i] + DP5::e5 * k5[i] +
                       DP5::e6 * k6[i] + DP5::e7 * k7[i]);
      const double en = norm(err, y, y1);
      const double fac11 = std::pow(en, expo1);
      if (en > 1.0) {
        h /= std::min(10.0, fac11 / safe);
        ++tr.rejected;
        last_rejected = true;
        continue;
      }
      fac = fac11 / std::pow(facold, beta);
      fac = std::clamp(fac / safe, 0.2, 10.0);
      facold = std::max(en, 1e-4);
    }
    if (hooks.accept && !hooks.accept(y, y1)) {
      if (cfg.fixed_step) throw StepSizeUnderflow("step veto in fixed-step mode");
      h *= 0.5;
      ++tr.rejected;
      last_rejected = true;
      continue;
    }

    DenseSegment<N> seg;
    seg.t0 = t;
    seg.h = hs;
    for (std::size_t i = 0; i < N; ++i) {
      const double ydiff = y1[i] - y[i];
      const double bspl = hs * k1[i] - ydiff;
      seg.r[0][i] = y[i];
      seg.r[1][i] = ydiff;
      seg.r[2][i] = bspl;
      seg.r[3][i] = ydiff - hs * k7[i] - bspl;
      seg.r[4][i] = hs * (DP5::d1 * k1[i] + DP5::d3 * k3[i] + DP5::d4 * k4[i] +
                          DP5::d5 * k5[i] + DP5::d6 * k6[i] + DP5::d7 * k7[i]);
    }
    double t1 = last ? t_end : t + hs;
    Vec<N> ynew = y1;

    // Events: sign changes on four sub-intervals of the interpolant.
    if (!events.empty()) {
      struct Hit {
        double t;
        std::size_t j;
        bool rising;
      };
      std::vector<Hit> hits;
      constexpr int nsub = 4;
      for (std::size_t j = 0; j < events.size(); ++j) {
        double ta = t, ga = gprev[j];
        for (int m = 1; m <= nsub; ++m) {
          const double tb = m == nsub ? t1 : t + hs * m / nsub;
          const double gb = events[j].fn(tb, m == nsub ? y1 : seg(tb));
          bool rising = false;
          if (detail::crosses(ga, gb, events[j].crossing, rising)) {
            double lo = ta, hi = tb, glo = ga;
            for (int it = 0; it < 200 && std::abs(hi - lo) > cfg.event_tol; ++it) {
              const double mid = 0.5 * (lo + hi);
              const double gm = events[j].fn(mid, seg(mid));
              if ((glo < 0.0) == (gm < 0.0) && gm != 0.0) {
                lo = mid;
                glo = gm;
              } else {
                hi = mid;
              }
            }
            hits.push_back({hi, j, rising});
          }
          ta = tb;
          ga = gb;
        }
      }
      std::sort(hits.begin(), hits.end(),
                [sgn](const Hit& a, const Hit& b) { return sgn * a.t < sgn * b.t; });
      for (const auto& hit : hits) {
        const auto& ev = events[hit.j];
        const Vec<N> ye = seg(hit.t);
        if (ev.guard && !ev.guard(hit.t, ye)) continue;
        tr.events.push_back({hit.t, ye, ev.id, hit.rising});
        if (ev.terminal) {
          t1 = hit.t;
          ynew = ye;
          tr.outcome = Outcome::terminal_event;
          done = true;
          break;
        }
      }
      for (std::size_t j = 0; j < events.size(); ++j) gprev[j] = events[j].fn(t1, ynew);
    }

    if (hooks.observe) hooks.observe(seg, t1, ynew);
    if (cfg.keep_dense) tr.dense.push_back(seg);
    t = t1;
    y = ynew;
    k1 = k7;
    ++tr.accepted;
    if (cfg.keep_samples) {
      tr.t.push_back(t);
      tr.y.push_back(y);
    }
    if (last && !done) {
      done = true;
      bool has_terminal = false;
      for (const auto& ev : events) has_terminal |= ev.terminal;
      tr.outcome = has_terminal ? Outcome::horizon_exceeded : Outcome::completed;
    }

    if (!cfg.fixed_step) {
      double hnew = h / fac;
      if (last_rejected) hnew = std::min(hnew, h);
      h = std::min(hnew, cfg.h_max);
      last_rejected = false;
    }
  }
  tr.t_final = t;
  tr.y_final = y;
  return tr;
}

template <std::size_t N>
struct ReturnResult {
  Vec<N> state;
  double time;
};

// Integrates until the next crossing of `section` in its direction. An
// `any` section adopts the direction in which the flow leaves s0.
template <std::size_t N, class Rhs>
ReturnResult<N> poincare_return(Rhs&& f, EventSpec<N> section, const Vec<N>& s0,
                                IntegratorConfig cfg, double t0 = 0.0) {
  const Vec<N> f0 = f(t0, s0);
  double fn = 0;
  for (double a : f0) fn = std::max(fn, std::abs(a));
  if (fn == 0.0) throw NoReturn("initial state is an equilibrium");

  double scale = 0;
  for (double a : s0) scale = std::max(scale, std::abs(a));
  const double dt = 1e-6 * std::max(1.0, scale) / fn;
  const double sg = cfg.direction == Direction::forward ? 1.0 : -1.0;
  Vec<N> ya, yb;
  for (std::size_t i = 0; i < N; ++i) {
    ya[i] = s0[i] - sg * dt * f0[i];
    yb[i] = s0[i] + sg * dt * f0[i];
  }
  const double slope = (section.fn(t0 + sg * dt, yb) - section.fn(t0 - sg * dt, ya)) / (2 * dt);
  if (std::abs(section.fn(t0, s0)) <= 1e-9 * std::max(1.0, scale) &&
      std::abs(slope) < 1e-10 * std::max(1.0, fn))
    throw TangencyDetected("flow tangent to section at the initial state");
  if (section.crossing == Crossing::any)
    section.crossing = slope > 0 ? Crossing::rising : Crossing::falling;
  section.terminal = true;
  if (std::abs(section.fn(t0, s0)) <= 1e-12 * std::max(1.0, scale)) {
    // Starting on the section: ignore the departure itself.
    auto user = section.guard;
    section.guard = [user, t0, dt](double t, const Vec<N>& y) {
      return std::abs(t - t0) > dt && (!user || user(t, y));
    };
  }
  cfg.keep_samples = false;
  cfg.keep_dense = false;
  auto tr = integrate<N>(f, t0, s0, cfg, {section});
  if (tr.outcome != Outcome::terminal_event) throw NoReturn("no return within the horizon");
  const auto& e = tr.events.back();
  return {e.state, std::abs(e.t - t0)};
}

}  // namespace cusp
