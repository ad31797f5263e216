#pragma once

#include "eqlift/cartan.hpp"
#include "eqlift/lattice.hpp"

#include <optional>
#include <string>
#include <vector>

namespace eqlift {

using IntMat = lattice::IntMatrix<long long>;

/// c: Lambda -> H^1(X; R) on the generators, with the Hermite split
/// U * C = H. Rows 0..r-1 of U span Lambda_1, rows r..k-1 span Lambda_0 = Ker c.
struct OrbitClassMap {
  MatX C;            // k x b1, pair_h1 of generator orbits
  IntMat C_int;      // rounded
  IntMat U;          // unimodular, k x k
  IntMat H;          // U * C_int
  int rank = 0;
  double rounding = 0.0;  // max |C - C_int|

  int k() const { return static_cast<int>(C.rows()); }
  int betti1() const { return static_cast<int>(C.cols()); }
  VecX lambda1(int i) const;  // as a real lattice vector
  VecX lambda0(int i) const;
  IntMat H_top() const { return H.topRows(rank); }
  nlohmann::json to_json() const;
};

/// Orbits through the scenario's base point. Throws InconsistencyError when an
/// entry is not within 1e-6 of an integer or the integer and numerical ranks differ.
OrbitClassMap orbit_class_map(const ManifoldScenario& sc, double tol = 1e-6);

/// Affine family of H^1-shifts t (connection + 2 pi i sum t_j h_j) with trivial
/// monodromy, modulo H^1(X; Z).
struct LiftingTorus {
  ConnectionData base;
  ConnectionData solved;
  MomentMapData mu;
  OrbitClassMap ocm;
  VecX particular;   // t_0
  IntMat kernel;     // b1 x (b1 - r), integer basis of the kernel directions
  int dimension = 0;
  long long components = 1;  // index of H_top Z^b1 in Z^r
  VecX phases;       // arg(M)/2pi of the Lambda_1 basis before the shift
  std::vector<Complex> base_monodromy;    // per generator
  std::vector<Complex> solved_monodromy;  // per generator
  double residual = 0.0;                  // max |M - 1| after the shift

  /// Family member at kernel coordinates theta (length `dimension`).
  ConnectionData member(const VecX& theta) const;
  VecX member_shift(const VecX& theta) const;
  nlohmann::json to_json() const;
};

/// Monodromy of every generator at the scenario base point.
std::vector<Complex> generator_monodromy(const ConnectionData& conn, const MomentMapData& mu,
                                         const TorusAction& action);

/// Chooses a connection with curvature alpha whose monodromies all vanish.
/// Throws CertificateError if a Lambda_0 generator has M != 1 and
/// IntegralityError if the shifted connection still has M != 1.
LiftingTorus solve_lifting_shift(const ConnectionData& conn, const MomentMapData& mu,
                                 const TorusAction& action, const OrbitClassMap& ocm, double tol = 1e-6);

struct ClassificationReport {
  std::string scenario;
  int betti1 = 0;
  int rank = 0;
  int dimension = 0;
  bool exists = false;
  std::string verdict;  // "lift" or "no lift"
  std::string reason;
  ResidualReport moment;
  IntegralityReport integrality;
  std::optional<LiftingTorus> torus;
  bool hamiltonian_full_torus = false;  // T^G = T^alpha
  nlohmann::json mu_shifts;

  nlohmann::json to_json() const;
};

/// Existence, dimension b1 - r, and the discrete mu-offset family.
ClassificationReport classify_lifts(const ConnectionData& conn, const EquivariantTwoForm& eq2, double tol = 1e-6);

/// nu(y; s): time-1 flow of the lifted field along s, checked by step doubling.
FiberPoint exponentiate_lift(const ConnectionData& conn, const MomentMapData& mu, const TorusAction& action,
                             const VecX& s, const FiberPoint& y, int n_steps = 2048);

struct LiftedAction {
  ConnectionData conn;
  MomentMapData mu;
  TorusAction action;
  int n_steps = 2048;

  FiberPoint operator()(const VecX& s, const FiberPoint& y) const {
    return exponentiate_lift(conn, mu, action, s, y, n_steps);
  }
};

/// Distance between two total-space points, compared in the first one's chart.
double fiber_distance(const LineBundleData& bundle, const FiberPoint& a, const FiberPoint& b);

struct HamiltonianLift {
  BundlePtr bundle;          // L^d
  ConnectionData tensor;     // nabla^{(x) d}
  ConnectionData reference;  // standard invariant connection on L^d
  OneForm eta;               // averaged difference
  LiftedAction lift;         // reference + eta with its moment map
  OrbitClassMap ocm;
  LiftingTorus torus;
  ResidualReport moment;
  IntegralityReport integrality;
  std::vector<double> fixed_weights;
  double weight_difference = 0.0;
  double averaging_idempotence = 0.0;
  double eta_invariance = 0.0;
  double transport_invariance = 0.0;

  nlohmann::json to_json() const;
};

/// Lift of a Hamiltonian circle action to L^d with an invariant connection.
HamiltonianLift hamiltonian_power_lift(const ScenarioPtr& sc, const BundlePtr& bundle, const ConnectionData& conn,
                                       int d, double tol = 1e-6);

/// max over samples of |nu_s(P_c y) - P_{s c}(nu_s y)| for short chart paths c.
double transport_invariance_residual(const LiftedAction& lift, const ScenarioPtr& sc, int n_checks = 3);

struct RationalizedClass {
  TwoForm omega;  // omega'
  MomentMapData mu;
  std::int64_t k = 1;
  double scale = 1.0;  // sigma with omega' = sigma omega
  std::vector<lattice::Rational> periods;        // (1/2pi) int omega'
  std::vector<lattice::Rational> fixed_values;   // mu' at the fixed points
  double c0_distance = 0.0;
  double epsilon = 0.0;
  bool achieved = false;
  std::string message;

  nlohmann::json to_json() const;
};

/// Nearby class in H^2_G(X; 2 pi Q). Normalization: d mu_j = (1/2pi) iota_{X_j} omega.
RationalizedClass rationalize_class(const TwoForm& omega, const MomentMapData& mu, const ManifoldScenario& sc,
                                    double epsilon, std::int64_t max_denominator = 1000000);

}  // namespace eqlift
