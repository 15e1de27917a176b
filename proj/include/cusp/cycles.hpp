#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "cusp/params.hpp"
#include "cusp/vfields.hpp"

namespace cusp {

struct CycleOptions {
  double rtol = 1e-12;
  double atol = 1e-14;
  int samples = 2048;      // uniform-in-time samples stored over one period
  double mean_tol = 1e-8;  // budget for the trapezoid mean, checked by halving
  int relax_returns = 40;  // cap on reverse-time relaxation sweeps
  int max_newton = 30;
  double closure_tol = 1e-10;  // relative to max(1, |anchor|)
};

// Repelling cycle of the Lienard layer at fixed y2 < 0.
struct LimitCycle {
  double y2 = 0;
  double period = 0;
  Vec2 anchor{};  // on u2 = 0 with z2 < 0
  std::vector<double> t;
  std::vector<Vec2> orbit;
  double mean_u2_sq = 0;
  double mean_error = 0;  // change against half the samples
  long mean_samples = 0;  // trapezoid nodes used for the mean
  double multiplier = 0;  // derivative of the return map
  double log_multiplier = 0;
  double closure_defect = 0;
  double amplitude = 0;   // max |u2| over the samples
  int newton_iterations = 0;
};

LimitCycle find_limit_cycle(double y2, const Params& p, const CycleOptions& opt = {});

double melnikov_radius(double y2, const Params& p);
double melnikov_slope(const Params& p);
double g_avg_from_mean(double y2, double mean_u2_sq, const Params& p);

struct AveragedPoint {
  double y2 = 0, period = 0, mean_u2_sq = 0, g_avg = 0, melnikov = 0;
  std::string error;
};

struct AveragedCurve {
  std::vector<AveragedPoint> points;  // ascending in y2
  bool strictly_decreasing = false;
  std::vector<double> violations;  // left ends of pairs where g_avg does not decrease
};

AveragedCurve averaged_curve(const Params& p, std::vector<double> y2_grid, unsigned workers = 0,
                             const CycleOptions& opt = {});

// Default table used when no curve is supplied.
std::vector<double> default_equilibrium_grid();

double solve_c2_equilibrium(double c2, const Params& p, const AveragedCurve& table,
                            const CycleOptions& opt = {});
double solve_c2_equilibrium(double c2, const Params& p);

// Way-in/way-out integral W(Y) for c2 < 0, Y < 2 c2 g.
double way_in_out(double Y, double c2, const Params& p);

struct ExitPoint {
  double y_exit = 0;
  double gap = 0;      // 2 c2 g - y_exit, resolved without cancellation
  double log_gap = 0;  // ln(gap); finite where gap underflows
};
ExitPoint exit_point_detail(double c2, const Params& p);
double exit_point(double c2, const Params& p);

struct ExitPointRow {
  double c2 = 0, y_exit = 0;
  std::string regime;  // focus | node
  std::string error;
};
std::vector<ExitPointRow> exit_point_curve(const Params& p, const std::vector<double>& c2_grid,
                                           unsigned workers = 0);

// Threshold -2g/(3 v_s) between focus and node behaviour on gamma_2.
double gamma2_focus_limit(const Params& p);

int weber_zero_count(double mu, double L = 8.0);

struct Gamma2Class {
  std::string tag;
  std::array<std::complex<double>, 2> eig{};
  double q2_y2 = 0;
  std::string q2_tag;
  std::array<std::complex<double>, 2> q2_eig{};
};
Gamma2Class gamma2_classify(double y2, double c2, const Params& p);

}  // namespace cusp
