#pragma once

#include "eqlift/bundle.hpp"

#include <string>

namespace eqlift {

/// Equivariant moment map, one real component per lattice generator, scaled so
/// that the fibre picks up exp(2 pi i mu_j) over one period of e_j.
struct MomentMapData {
  ScenarioPtr scenario;
  std::vector<std::function<double(const VecX&)>> components;
  bool equivariant = true;
  nlohmann::json descriptor;

  int rank() const { return static_cast<int>(components.size()); }
  double component(int j, const VecX& q) const { return components.at(j)(q); }
  /// <mu(q), s> = sum_j s_j mu_j(q).
  double pairing(const VecX& q, const VecX& s) const;
  MomentMapData shifted(const VecX& offsets) const;
};

enum class MonodromyMethod { formula, ode };

std::string to_string(MonodromyMethod m);

struct MonodromyResult {
  Complex phase;
  VecX x;
  VecX gamma;
  MonodromyMethod method = MonodromyMethod::formula;
  Complex holonomy_part;
  Complex moment_part;
  int steps = 0;
};

/// Point of the total space: base point plus fibre value in the base chart's
/// trivialization.
struct FiberPoint {
  Point base;
  Complex value;
};

/// Re-express a total-space point in another chart's trivialization.
FiberPoint express_in(const LineBundleData& bundle, const FiberPoint& y, int chart);

/// exp(-integral A) with transition factors at chart switches. For an open path
/// the phase maps the first segment's trivialization to the last one's; closed
/// loops are brought back to the first chart.
Complex parallel_transport(const ConnectionData& conn, const PathSpec& path, int n_steps = 256);

Complex orbit_holonomy(const ConnectionData& conn, const TorusAction& action, const VecX& gamma,
                       const VecX& x, int pieces = 0, double offset = 0.0);

MonodromyResult monodromy_formula(const ConnectionData& conn, const MomentMapData& mu,
                                  const TorusAction& action, const VecX& gamma, const VecX& x);

/// Integrates the lifted vector field over one period and compares step
/// doubling; throws AccuracyError if the two runs differ by more than 1e-6.
MonodromyResult monodromy_ode(const ConnectionData& conn, const MomentMapData& mu,
                              const TorusAction& action, const VecX& gamma, const VecX& x,
                              int n_steps = 2048);

struct LiftedFlowResult {
  FiberPoint end;
  Complex holonomy_part;  // transition factors times exp(-i int a(X))
  Complex moment_part;    // exp(2 pi i int <mu, s>)
  int chart_switches = 0;
};

/// RK4 integration of X~(s) = X^nabla(s) + (moment term) U_L for time `duration`.
LiftedFlowResult integrate_lifted_flow(const ConnectionData& conn, const MomentMapData& mu,
                                       const TorusAction& action, const VecX& s, const FiberPoint& y,
                                       double duration, int n_steps);

/// Max |mu_j(flow(s, t, q)) - mu_j(q)| over samples and a grid of group elements.
double moment_orbit_residual(const MomentMapData& mu, const TorusAction& action,
                             const std::vector<VecX>& samples, int per_circle = 8);

}  // namespace eqlift
