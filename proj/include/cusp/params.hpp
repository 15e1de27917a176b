#pragma once

#include <cmath>
#include <optional>

#include "cusp/errors.hpp"

namespace cusp {

struct Params {
  double g = -1.0;
  double c = 1.24;
  double eps = 0.01;
  std::optional<double> c2;  // set when c = v_s + sqrt(eps) * c2

  double vs() const { return std::sqrt(1.0 - 2.0 * g / 3.0); }
  double ws() const {
    const double v = vs();
    return -v * v * v + 3.0 * v;
  }
  double lambda1() const { return -6.0 * vs() * (vs() - c); }
  double lambda2() const { return -lambda1() + 2.0 * g; }
  double mu() const { return lambda2() / lambda1(); }

  // Parameters on the saddle-node scaling c = v_s + sqrt(eps) c2.
  static Params saddle_node(double g, double c2, double eps) {
    Params p;
    p.g = g;
    p.eps = eps;
    p.c2 = c2;
    p.c = p.vs() + std::sqrt(eps) * c2;
    return p;
  }

  void require_repulsive() const {
    if (!(g < 0.0)) throw DomainError("coupling g must be negative");
  }
};

}  // namespace cusp
