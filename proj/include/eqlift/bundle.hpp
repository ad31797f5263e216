#pragma once

#include "eqlift/geometry.hpp"

#include <json.hpp>

#include <memory>

namespace eqlift {

/// Hermitian line bundle as a unit-modulus cocycle: psi_i = g_ij psi_j on
/// overlaps of the chart trivializations.
struct LineBundleData {
  ScenarioPtr scenario;
  int degree = 0;  // (i/2pi)-period of the curvature over the fundamental cycle
  std::function<Complex(int i, int j, const VecX& q)> transition;
  nlohmann::json descriptor;

  Complex g(int i, int j, const VecX& q) const { return i == j ? Complex(1.0) : transition(i, j, q); }
};

using BundlePtr = std::shared_ptr<const LineBundleData>;

/// Unitary connection: chart-local imaginary 1-forms with
/// A_j = A_i + g_ij^-1 dg_ij on overlaps.
struct ConnectionData {
  BundlePtr bundle;
  OneForm forms;
  nlohmann::json descriptor;

  const ManifoldScenario& scenario() const { return *bundle->scenario; }
};

/// Gauge transformation g = exp(i chi) for an ambient phase function chi.
struct GaugeTransform {
  ManifoldPtr manifold;
  std::function<double(const VecX&)> phase;
  std::function<VecX(const VecX&)> phase_gradient;
  nlohmann::json descriptor;

  Complex value(const Point& p) const { return std::polar(1.0, phase(manifold->ambient(p))); }
  /// Real coefficients of d(chi) in p's chart, so g^-1 dg = i * this.
  Vec2 log_derivative(const Point& p) const;

  static GaugeTransform identity(ManifoldPtr m);
};

GaugeTransform operator*(const GaugeTransform& g, const GaugeTransform& h);

TwoForm curvature(const ConnectionData& conn);
ConnectionData apply_gauge(const ConnectionData& conn, const GaugeTransform& g);
/// conn + eta for a global imaginary 1-form eta.
ConnectionData shift_connection(const ConnectionData& conn, const OneForm& eta);
std::pair<BundlePtr, ConnectionData> tensor_power(const BundlePtr& bundle, const ConnectionData& conn, int d);
std::pair<BundlePtr, ConnectionData> tensor_product(const ConnectionData& a, const ConnectionData& b);
/// Difference of two connections on the same bundle: a global imaginary 1-form.
OneForm connection_difference(const ConnectionData& a, const ConnectionData& b);

/// Group average over the torus with n_grid points per circle factor.
OneForm average_one_form(const OneForm& form, const TorusAction& action, int n_grid);
TwoForm average_two_form(const TwoForm& form, const TorusAction& action, int n_grid);

// diagnostics
double cocycle_residual(const LineBundleData& bundle);
double unitarity_residual(const LineBundleData& bundle);
/// Max |A_j - A_i - g_ij^-1 dg_ij| over overlaps (finite-difference log-derivative).
double compatibility_residual(const ConnectionData& conn, double h = 1e-5);
double gauge_consistency_residual(const GaugeTransform& g, const std::vector<VecX>& samples);

}  // namespace eqlift
