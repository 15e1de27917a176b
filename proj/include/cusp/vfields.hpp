#pragma once

#include <array>

#include "cusp/params.hpp"

namespace cusp {

using Vec2 = std::array<double, 2>;
using Vec4 = std::array<double, 4>;

struct StateFull {
  double v1 = 0, v2 = 0, w1 = 0, w2 = 0;
  Vec4 arr() const { return {v1, v2, w1, w2}; }
  static StateFull of(const Vec4& a) { return {a[0], a[1], a[2], a[3]}; }
  // The swap symmetry (v1,v2,w1,w2) -> (v2,v1,w2,w1).
  StateFull swapped() const { return {v2, v1, w2, w1}; }
};

struct StateSym {
  double x = 0, u = 0, y = 0, z = 0;
  Vec4 arr() const { return {x, u, y, z}; }
  static StateSym of(const Vec4& a) { return {a[0], a[1], a[2], a[3]}; }
};

struct StateEntry {
  double r1 = 0, u1 = 0, z1 = 0, eps1 = 0;
  Vec4 arr() const { return {r1, u1, z1, eps1}; }
  static StateEntry of(const Vec4& a) { return {a[0], a[1], a[2], a[3]}; }
};

struct StateScaling {
  double r2 = 0, u2 = 0, y2 = 0, z2 = 0;
  Vec4 arr() const { return {r2, u2, y2, z2}; }
  static StateScaling of(const Vec4& a) { return {a[0], a[1], a[2], a[3]}; }
};

// Point (u, y, z, eps) near the cusp, in symmetric coordinates.
struct CuspPoint {
  double u = 0, y = 0, z = 0, eps = 0;
};

enum class ScalingVariant { plain, saddle_node };

StateFull rhs_full(const StateFull& s, const Params& p);
StateSym rhs_sym(const StateSym& s, const Params& p);
Vec2 rhs_reduced_desing(const Vec2& v, const Params& p);
Vec2 rhs_reduced_cm(const Vec2& uy, const Params& p);
StateScaling rhs_scaling(const StateScaling& s, const Params& p,
                         ScalingVariant variant = ScalingVariant::plain);
StateEntry rhs_entry(const StateEntry& s, const Params& p);
Vec2 rhs_lienard_fast(const Vec2& uz, double y2, const Params& p);
Vec2 rhs_weber(const Vec2& s, double Y, double mu);

StateSym to_sym(const StateFull& s, const Params& p);
StateFull from_sym(const StateSym& s, const Params& p);

StateScaling chart_entry_to_scaling(const StateEntry& s);
StateEntry chart_scaling_to_entry(const StateScaling& s);
CuspPoint blowdown(const StateEntry& s);
CuspPoint blowdown(const StateScaling& s);

// Truncated attracting-sheet graph z = Q(u, y) and its partials.
double cm_Q(double u, double y, const Params& p);
double cm_Qu(double u, double y, const Params& p);
double cm_Qy(double u, const Params& p);
// Truncated graph x = v_s + y/(2g) + 3 v_s u^2/(2g) of the slow sheet.
double cm_x(double u, double y, const Params& p);

}  // namespace cusp
