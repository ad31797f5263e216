#pragma once

#include "eqlift/transport.hpp"

#include <string>
#include <vector>

namespace eqlift {

/// alpha - mu in the degree-2 Cartan complex.
struct EquivariantTwoForm {
  TwoForm alpha;
  MomentMapData mu;
};

struct ResidualReport {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  int samples = 0;
  bool pass = false;

  nlohmann::json to_json() const;
};

/// max |d mu_j(v) - (i/2pi) alpha(X_j, v)| over samples, charts, generators and
/// the coordinate frame. Needs at least 10 samples in every chart.
ResidualReport check_moment_equation(const EquivariantTwoForm& eq2, const TorusAction& action,
                                     const std::vector<VecX>& samples, double tol = 1e-6,
                                     double h = 1e-5);

struct ClassPeriods {
  TwoForm alpha;
  std::vector<std::string> cycles;
  std::vector<double> periods;  // (i/2pi) int alpha
};

/// Image in ordinary cohomology: alpha with its periods over the catalog 2-cycles.
ClassPeriods restrict_class(const EquivariantTwoForm& eq2, const ManifoldScenario& sc);

struct FixedPointValue {
  VecX point;
  int component = 0;
  double value = 0.0;
};

struct IntegralityReport {
  bool pass = false;
  std::string certificate;  // "fixed-point", "trivial-class", "periods-only" or "none"
  std::vector<double> periods;
  std::vector<FixedPointValue> fixed_values;
  double worst_residual = 0.0;
  double tolerance = 0.0;
  std::vector<std::string> offenders;

  nlohmann::json to_json() const;
};

/// Integer periods matching the bundle degree, and integer mu_j at every fixed point.
IntegralityReport check_integrality(const EquivariantTwoForm& eq2, const TorusAction& action,
                                    const LineBundleData& bundle, double tol = 1e-6);

/// d_g of an invariant 1-form eta: (d eta, -(i/2pi) eta(X_j)).
EquivariantTwoForm cartan_differential(const OneForm& eta, const ManifoldScenario& sc);
/// eq2 + d_g eta.
EquivariantTwoForm add_exact(const EquivariantTwoForm& eq2, const OneForm& eta, const ManifoldScenario& sc);

MomentMapData operator+(const MomentMapData& a, const MomentMapData& b);
MomentMapData operator*(double s, const MomentMapData& a);

/// max |phi*_g alpha - alpha| over samples and a grid of per_circle^rank group elements.
double alpha_invariance_residual(const TwoForm& alpha, const TorusAction& action,
                                 const std::vector<VecX>& samples, int per_circle = 8);

}  // namespace eqlift
