#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cusp/integrate.hpp"
#include "cusp/params.hpp"
#include "cusp/vfields.hpp"

namespace cusp {

struct PassageSpec {
  Params p;
  double u0 = 0.05;  // seed offsets from the cusp on the attracting sheet
  double y0 = -0.5;
  double delta = 0.1;    // sections y = -+sqrt(eps/delta)
  double z_guard = 0.2;  // zeros of u count only while |z| <= z_guard
  double u_leave = 0.3;  // |u| at which the orbit has left the cusp region
  double horizon = 0.0;  // 0 means 200/eps
  double rtol = 1e-11;
  double atol = 1e-15;
  double o1_threshold = 1e-2;  // |z2| above which a zero is an O(1) oscillation
  double converge_tol = 1e-8;  // distance to q that counts as settled
  bool keep_dense = false;

  double y_in() const { return -std::sqrt(p.eps / delta); }
  double y_out() const { return std::sqrt(p.eps / delta); }
  double t_horizon() const { return horizon > 0 ? horizon : 200.0 / p.eps; }
  void validate() const;
};

enum class Verdict { match, mismatch, saddle_node_band, underflow, no_prediction };
const char* to_string(Verdict v);

struct ZeroRecord {
  double t, y, z;
};

struct SaoReport {
  int zeros = 0;
  int rotations = 0;
  int predicted = -1;  // floor(mu), -1 when no prediction applies
  double mu = std::numeric_limits<double>::quiet_NaN();
  double theta_lift = 0;  // Theta(end) - Theta(first zero)
  double u_exit = std::numeric_limits<double>::quiet_NaN();
  double z_exit = std::numeric_limits<double>::quiet_NaN();
  double last_amplitude = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> u_section, z_section;  // on y = y_out, if reached
  bool underflow = false;
  bool left_region = false;  // |u| reached u_leave
  bool converged = false;    // settled on q
  Verdict verdict = Verdict::no_prediction;
  std::string flags;
  std::vector<ZeroRecord> zero_records;

  // Behaviour near q in the scaled chart metric.
  int o1_oscillations = 0;
  double closest_distance = std::numeric_limits<double>::quiet_NaN();
  double t_closest = std::numeric_limits<double>::quiet_NaN();
  double lift_after_closest = 0;
  bool spiral_exit = false;
};

struct Passage {
  Trajectory<4> traj;  // symmetric coordinates (x, u, y, z)
  SaoReport report;
};

StateFull seed_on_attracting_sheet(const PassageSpec& spec);
Passage run_passage(const PassageSpec& spec);

// Upper end of the node regime; counts are not asserted above it.
double saddle_node_band_start(const Params& p);

struct SweepRow {
  double c = 0, eps = 0;
  SaoReport report;
  bool in_band = false;
  std::string error;
};

std::vector<SweepRow> sweep_counts(const PassageSpec& base, const std::vector<double>& c_grid,
                                   unsigned workers = 0);

struct ScalingRow {
  double eps = 0;
  SaoReport report;
  bool used = false;
  std::string error;
};

struct ScalingFit {
  std::vector<ScalingRow> rows;
  double u_slope = std::numeric_limits<double>::quiet_NaN();
  double z_slope = std::numeric_limits<double>::quiet_NaN();
};

ScalingFit amplitude_scaling(const PassageSpec& base, const std::vector<double>& eps_grid,
                             unsigned workers = 0);

// Passage with c = v_s + sqrt(eps) c2.
Passage saddle_node_passage(const PassageSpec& base, double c2);

}  // namespace cusp
