#pragma once

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace eqlift {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Complex = std::complex<double>;
using TangentVector = Vec2;

/// A point given by a chart index and coordinates in that chart.
struct Point {
  int chart = 0;
  Vec2 coords = Vec2::Zero();
};

/// One coordinate chart. Ambient coordinates are R^2 lifts for the torus and
/// R^3 for the sphere; `coords` returns the canonical representative.
struct Chart {
  std::string name;
  std::function<VecX(const Vec2&)> embed;
  std::function<MatX(const Vec2&)> embed_jacobian;   // ambient x 2
  std::function<Vec2(const VecX&)> coords;
  std::function<MatX(const VecX&)> coords_jacobian;  // 2 x ambient, exact on tangent vectors
  std::function<double(const Vec2&)> depth;          // > 0 inside, ~1 deep inside
  std::function<Vec2(const Vec2&, const Vec2&)> unwrap;  // representative nearest a reference
};

struct Manifold {
  std::string name;
  int ambient_dim = 2;
  std::vector<Chart> charts;
  std::function<double(const VecX&, const VecX&)> distance;
  std::function<VecX(const VecX&)> normalize;

  VecX ambient(const Point& p) const;
  double depth(const Point& p) const;
  /// Chart in which q sits deepest.
  Point locate(const VecX& q) const;
  /// Coordinates of q in a given chart; DomainError when q lies outside it.
  Point in_chart(const VecX& q, int chart) const;
  Point to_chart(const Point& p, int chart) const;
  bool same_point(const Point& a, const Point& b, double tol) const;
  /// Jacobian of the transition map from p's chart into `target` at p.
  Mat2 transition_jacobian(const Point& p, int target) const;
  /// sqrt(det g) of the induced ambient metric in chart coordinates.
  double area_density(const Point& p) const;
};

using ManifoldPtr = std::shared_ptr<const Manifold>;

/// Smooth covector field on ambient space with its exterior derivative as an
/// antisymmetric matrix W_ab = d_a Q_b - d_b Q_a.
struct AmbientCovector {
  std::function<VecX(const VecX&)> value;
  std::function<MatX(const VecX&)> derivative;
};

/// Ambient 2-form B with omega = sum_{a<b} B_ab dq^a ^ dq^b (B antisymmetric).
using AmbientBivector = std::function<MatX(const VecX&)>;

struct OneFormChart {
  std::function<Vec2(const Vec2&)> coeff;
  std::function<double(const Vec2&)> exterior;  // du^dv coefficient of d(form); may be empty
};

/// A 1-form given chart by chart. When `imaginary` is set the form is i times
/// the real coefficients stored here.
struct OneForm {
  ManifoldPtr manifold;
  std::vector<OneFormChart> charts;
  bool imaginary = false;

  Vec2 coefficients(const Point& p) const { return charts[p.chart].coeff(p.coords); }
  double evaluate(const Point& p, const Vec2& v) const { return coefficients(p).dot(v); }
  bool has_exterior() const;
  double exterior(const Point& p) const;

  static OneForm zero(ManifoldPtr m, bool imaginary = false);
  static OneForm from_ambient(ManifoldPtr m, const AmbientCovector& q, bool imaginary = false);
  /// One ambient covector per chart (used where local forms differ by trivialization).
  static OneForm from_ambient_per_chart(ManifoldPtr m, const std::vector<AmbientCovector>& q,
                                        bool imaginary);
};

OneForm operator+(const OneForm& a, const OneForm& b);
OneForm operator-(const OneForm& a, const OneForm& b);
OneForm operator*(double s, const OneForm& a);

/// A 2-form as its du^dv coefficient per chart.
struct TwoForm {
  ManifoldPtr manifold;
  std::vector<std::function<double(const Vec2&)>> charts;
  bool imaginary = false;

  double coefficient(const Point& p) const { return charts[p.chart](p.coords); }

  static TwoForm zero(ManifoldPtr m, bool imaginary = false);
  static TwoForm from_ambient(ManifoldPtr m, const AmbientBivector& b, bool imaginary = false);
};

TwoForm operator+(const TwoForm& a, const TwoForm& b);
TwoForm operator*(double s, const TwoForm& a);
TwoForm exterior_derivative(const OneForm& form);

/// Compact torus T^k acting with period-1 lattice flows.
struct TorusAction {
  std::string name;
  int rank = 1;
  std::function<VecX(const VecX& s, double t, const VecX& q)> flow;
  std::function<MatX(const VecX& s, double t, const VecX& q)> flow_jacobian;  // ambient
  std::function<VecX(const VecX& s, const VecX& q)> field;                   // ambient
  std::vector<VecX> fixed_points;
  bool acts_trivially = false;
  bool hamiltonian = false;
};

struct PathSegment {
  int chart = 0;
  double t0 = 0.0, t1 = 1.0;
  std::function<Vec2(double)> position;
  std::function<Vec2(double)> velocity;
};

struct PathSpec {
  std::vector<PathSegment> segments;
  int orientation = 1;
  Eigen::VectorXi homology;  // coordinates in the dual basis, when known
};

struct TwoCyclePatch {
  int chart = 0;
  Vec2 lo, hi;
  bool periodic_u = false, periodic_v = false;
};

struct TwoCycle {
  std::string name;
  std::vector<TwoCyclePatch> patches;
  int orientation = 1;
};

struct QuadratureSettings {
  int line_steps = 256;
  int surface_grid = 128;
  int ode_steps = 2048;
  int average_grid = 16;
};

struct ManifoldScenario {
  std::string name;
  int dim = 2;
  ManifoldPtr manifold;
  TorusAction action;
  std::vector<OneForm> h1_basis;
  std::vector<PathSpec> h1_cycles;
  std::vector<TwoCycle> two_cycles;
  int betti1 = 0;
  std::vector<VecX> sample_points;
  VecX base_point;
  QuadratureSettings quadrature;
  double switch_depth = 0.15;
};

using ScenarioPtr = std::shared_ptr<const ManifoldScenario>;

// --- operations ------------------------------------------------------------

/// d/dt|_0 flow(s, t, x) in the chart coordinates of x.
TangentVector generating_field(const Manifold& m, const TorusAction& action, const VecX& s,
                               const Point& x);

/// Composite Simpson quadrature of the pullback, n_steps per segment.
Complex integrate_one_form(const OneForm& form, const PathSpec& path, int n_steps);

/// Tensor-product quadrature over the cycle's patches (n x n per patch).
Complex integrate_two_form(const TwoForm& form, const TwoCycle& cycle, int n);

/// Periods of the H^1 basis over a closed loop.
VecX pair_h1(const ManifoldScenario& scenario, const PathSpec& loop, int n_steps = 256);

PathSpec chart_line(int chart, const Vec2& a, const Vec2& b);
Point path_start(const PathSpec& path);
Point path_end(const PathSpec& path);
bool is_closed(const Manifold& m, const PathSpec& path, double tol = 1e-9);

/// Loop t -> flow(gamma, t, x), t in [0, 1], split into chart segments.
/// `pieces <= 0` picks 8 pieces per unit of |gamma|_inf; `offset` in [0, 1)
/// shifts the chart-switch parameters.
PathSpec orbit_loop(const ManifoldScenario& scenario, const VecX& gamma, const VecX& x,
                    int pieces = 0, double offset = 0.0);
/// Same as orbit_loop for an arbitrary action (e.g. translations tracing H1 cycles).
PathSpec flow_loop(const Manifold& m, const TorusAction& action, const VecX& gamma, const VecX& x,
                   int pieces = 0, double offset = 0.0);

/// Jacobian of chart_target o flow(s, t) o chart(p)^-1 at p.
Mat2 flow_pushforward(const Manifold& m, const TorusAction& action, const VecX& s, double t,
                      const Point& p, int target_chart);

/// Pullback of a 1-form / 2-form by the time-t flow of s.
OneForm pullback(const OneForm& form, const TorusAction& action, const VecX& s, double t);
TwoForm pullback(const TwoForm& form, const TorusAction& action, const VecX& s, double t);

// --- numerical diagnostics ---------------------------------------------------

/// Max |coords_j(embed_i(coords_i(embed_j(p)))) - p| over samples and chart pairs.
double transition_residual(const ManifoldScenario& scenario);

/// Max |analytic d - central finite difference| over samples in every chart.
double exterior_derivative_residual(const OneForm& form, const std::vector<VecX>& samples,
                                    double h = 1e-5);

/// Max |finite-difference d(form)| over samples: closedness.
double closedness_residual(const OneForm& form, const std::vector<VecX>& samples,
                           double h = 1e-5);

/// Max disagreement of the chart representatives of a global form on overlaps.
double overlap_residual(const OneForm& form, const std::vector<VecX>& samples);
double overlap_residual(const TwoForm& form, const std::vector<VecX>& samples);

/// sup over samples of |omega| measured against the ambient area element.
double c0_norm(const TwoForm& form, const std::vector<VecX>& samples);

/// Periods of the h1 basis against the dual cycles: should be the identity.
MatX h1_pairing_matrix(const ManifoldScenario& scenario, int n_steps = 256);

}  // namespace eqlift
