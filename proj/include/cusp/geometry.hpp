#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "cusp/params.hpp"
#include "cusp/vfields.hpp"

namespace cusp {

using Mat2 = std::array<std::array<double, 2>, 2>;
using cplx = std::complex<double>;

enum class Region { C_RN, F_u, C_S, F_s, C_AN };
const char* to_string(Region r);

struct ManifoldPoint {
  double v1 = 0, v2 = 0;
  double h1 = 0, h2 = 0;  // w = h(v)
  Mat2 Dh{};
  double tr = 0, det = 0;
  std::array<double, 2> eig{};  // eigenvalues of Dh, ascending
  Region region = Region::C_S;
};

// `fold_band` is the |det Dh| threshold for tagging fold points.
ManifoldPoint critical_graph(double v1, double v2, const Params& p, double fold_band = 1e-9);

struct FoldRadii {
  double m_u = 0;
  std::optional<double> m_s;
};
FoldRadii fold_radii(double theta, const Params& p);

enum class SingularityKind { regular_q, cusped_f1, symmetric_f2, nonsymmetric_f3, nonsymmetric_f4 };
const char* to_string(SingularityKind k);

struct SingularityReport {
  SingularityKind kind = SingularityKind::regular_q;
  Vec2 v{};
  double u = 0, y = 0, z = 0;
  std::array<cplx, 2> eig{};  // of the desingularized reduced field
  std::string classification;
  Region region = Region::C_S;
  double det = 0;             // det Dh at the location
  double field_residual = 0;  // |desingularized field| at the location
};

Mat2 desing_jacobian(const Vec2& v, const Params& p);
std::array<cplx, 2> eigenvalues(const Mat2& m);
std::string classify(const std::array<cplx, 2>& eig, double zero_tol = 1e-12);

SingularityReport regular_equilibrium(const Params& p);
std::vector<SingularityReport> folded_singularities(const Params& p);

struct EigenSummary {
  double lambda1 = 0, lambda2 = 0, mu = 0;
  std::array<cplx, 2> nu12{}, nu34{};
  bool saddle_node_degenerate = false;
};
EigenSummary eigen_summary(const Params& p);

// Bisection for the sign change of Re nu34 in c on [c_lo, c_hi].
double hopf_crossing(const Params& p, double c_lo, double c_hi, double tol = 1e-13);

struct BranchRow {
  double c = 0;
  std::string branch;
  double x = 0, u = 0;
  cplx e1, e2;
  std::string stability;
};

struct BifurcationPoint {
  std::string label;  // P1, P2 or T
  double c = 0;
  std::string branch;
};

struct BifurcationDiagram {
  std::vector<BranchRow> rows;
  std::vector<BifurcationPoint> points;
};

BifurcationDiagram bifurcation_scan(const Params& p, double c_lo, double c_hi, int n = 1101);

struct CuspData {
  double vs = 0, g = 0;
  double k = 0;  // 9 v_s^2 + g
  double a = 0;  // cusp normal-form constant
  double Q(double u, double y) const { return -(u / g) * (3.0 * vs * y + k * u * u); }
  double fold(double u_sq) const { return -(k / vs) * u_sq; }
};
CuspData cusp_data(const Params& p);

struct Lyapunov {
  double l1_hat = 0;
  double l1 = 0;
};
Lyapunov lyapunov_coefficients(const Params& p);

}  // namespace cusp
