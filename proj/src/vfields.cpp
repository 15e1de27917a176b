#include "cusp/vfields.hpp"

#include <cmath>

namespace cusp {

namespace {

double cube(double a) { return a * a * a; }

// Common fast part of the scaling chart and the Lienard layer.
double lienard_u(double u2, double y2, double z2, const Params& p) {
  const double vs = p.vs();
  return -z2 - (1.0 / p.g) * (3.0 * vs * y2 + (9.0 * vs * vs + p.g) * u2 * u2) * u2;
}

}  // namespace

StateFull rhs_full(const StateFull& s, const Params& p) {
  return {-cube(s.v1) + 3.0 * s.v1 - s.w1 + p.g * (s.v2 - s.v1),
          -cube(s.v2) + 3.0 * s.v2 - s.w2 + p.g * (s.v1 - s.v2),
          p.eps * (s.v1 - p.c), p.eps * (s.v2 - p.c)};
}

StateSym rhs_sym(const StateSym& s, const Params& p) {
  const double vs = p.vs();
  const double ws = p.ws();
  return {-cube(s.x) + 3.0 * s.x - (s.y + ws) - 3.0 * s.x * s.u * s.u,
          -s.z - cube(s.u) + 3.0 * (vs * vs - s.x * s.x) * s.u,
          p.eps * (s.x - p.c), p.eps * s.u};
}

Vec2 rhs_reduced_desing(const Vec2& v, const Params& p) {
  const double a11 = -3.0 * v[1] * v[1] - p.g + 3.0;
  const double a22 = -3.0 * v[0] * v[0] - p.g + 3.0;
  const double d1 = v[0] - p.c;
  const double d2 = v[1] - p.c;
  return {a11 * d1 - p.g * d2, -p.g * d1 + a22 * d2};
}

double cm_Q(double u, double y, const Params& p) {
  const double vs = p.vs();
  return -(u / p.g) * (3.0 * vs * y + (9.0 * vs * vs + p.g) * u * u);
}

double cm_Qu(double u, double y, const Params& p) {
  const double vs = p.vs();
  return -(1.0 / p.g) * (3.0 * vs * y + 3.0 * (9.0 * vs * vs + p.g) * u * u);
}

double cm_Qy(double u, const Params& p) { return -3.0 * p.vs() * u / p.g; }

double cm_x(double u, double y, const Params& p) {
  const double vs = p.vs();
  return vs + y / (2.0 * p.g) + 3.0 * vs * u * u / (2.0 * p.g);
}

Vec2 rhs_reduced_cm(const Vec2& uy, const Params& p) {
  const double u = uy[0];
  const double y = uy[1];
  const double F = cm_x(u, y, p) - p.c;
  return {-u + cm_Qy(u, p) * F, -cm_Qu(u, y, p) * F};
}

StateScaling rhs_scaling(const StateScaling& s, const Params& p, ScalingVariant variant) {
  const double vs = p.vs();
  const double r2sq = s.r2 * s.r2;
  const double slow = s.y2 / (2.0 * p.g) + 3.0 * vs * s.u2 * s.u2 / (2.0 * p.g);
  double y2dot = 0.0;
  if (variant == ScalingVariant::saddle_node) {
    if (!p.c2) throw DomainError("saddle-node scaling variant needs c2");
    y2dot = r2sq * (-*p.c2 + slow);
  } else {
    y2dot = vs - p.c + r2sq * slow;
  }
  return {0.0, lienard_u(s.u2, s.y2, s.z2, p), y2dot, s.u2};
}

StateEntry rhs_entry(const StateEntry& s, const Params& p) {
  const double vs = p.vs();
  const double g = p.g;
  const double B =
      vs - p.c + s.r1 * s.r1 * (-1.0 / (2.0 * g) + 3.0 * vs * s.u1 * s.u1 / (2.0 * g));
  return {-0.5 * s.r1 * s.eps1 * B,
          -s.z1 - (1.0 / g) * (-3.0 * vs + (9.0 * vs * vs + g) * s.u1 * s.u1) * s.u1 +
              0.5 * s.u1 * s.eps1 * B,
          s.eps1 * (s.u1 + 1.5 * s.z1 * B), 2.0 * s.eps1 * s.eps1 * B};
}

Vec2 rhs_lienard_fast(const Vec2& uz, double y2, const Params& p) {
  return {lienard_u(uz[0], y2, uz[1], p), uz[0]};
}

Vec2 rhs_weber(const Vec2& s, double Y, double mu) { return {s[1], Y * s[1] - mu * s[0]}; }

StateSym to_sym(const StateFull& s, const Params& p) {
  return {0.5 * (s.v1 + s.v2), 0.5 * (s.v1 - s.v2), 0.5 * (s.w1 + s.w2) - p.ws(),
          0.5 * (s.w1 - s.w2)};
}

StateFull from_sym(const StateSym& s, const Params& p) {
  const double w = s.y + p.ws();
  return {s.x + s.u, s.x - s.u, w + s.z, w - s.z};
}

StateScaling chart_entry_to_scaling(const StateEntry& s) {
  if (!(s.eps1 > 0.0)) throw ChartOverlapError("entry-to-scaling needs eps1 > 0");
  const double q = std::pow(s.eps1, 0.25);
  return {s.r1 * q, s.u1 / q, -1.0 / std::sqrt(s.eps1), s.z1 / (q * q * q)};
}

StateEntry chart_scaling_to_entry(const StateScaling& s) {
  if (!(s.y2 < 0.0)) throw ChartOverlapError("scaling-to-entry needs y2 < 0");
  const double a = std::sqrt(-s.y2);  // eps1^(-1/4)
  return {s.r2 * a, s.u2 / a, s.z2 / (a * a * a), 1.0 / (s.y2 * s.y2)};
}

CuspPoint blowdown(const StateEntry& s) {
  const double r = s.r1;
  return {r * s.u1, -r * r, r * r * r * s.z1, r * r * r * r * s.eps1};
}

CuspPoint blowdown(const StateScaling& s) {
  const double r = s.r2;
  return {r * s.u2, r * r * s.y2, r * r * r * s.z2, r * r * r * r};
}

}  // namespace cusp
