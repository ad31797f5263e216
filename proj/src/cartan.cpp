#include "eqlift/cartan.hpp"

#include "eqlift/errors.hpp"
#include "eqlift/numerics.hpp"

#include <cmath>
#include <sstream>

namespace eqlift {

using numerics::two_pi;

namespace {

constexpr double kMinDepth = 0.05;

std::string describe(const VecX& q) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < q.size(); ++i) os << (i ? ", " : "") << q(i);
  os << ")";
  return os.str();
}

nlohmann::json vec_json(const VecX& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

nlohmann::json ResidualReport::to_json() const {
  return {{"name", name}, {"residual", residual}, {"tolerance", tolerance}, {"samples", samples}, {"pass", pass}};
}

nlohmann::json IntegralityReport::to_json() const {
  nlohmann::json fixed = nlohmann::json::array();
  for (const auto& f : fixed_values)
    fixed.push_back({{"point", vec_json(f.point)}, {"component", f.component}, {"value", f.value}});
  return {{"pass", pass},          {"certificate", certificate}, {"periods", periods},
          {"fixed_values", fixed}, {"worst_residual", worst_residual}, {"tolerance", tolerance},
          {"offenders", offenders}, {"note", "sufficient certificate for the catalog, not a characterization"}};
}

ResidualReport check_moment_equation(const EquivariantTwoForm& eq2, const TorusAction& action,
                                     const std::vector<VecX>& samples, double tol, double h) {
  if (!eq2.alpha.imaginary) throw PreconditionError("check_moment_equation: alpha must be imaginary");
  if (eq2.mu.rank() != action.rank) throw PreconditionError("check_moment_equation: mu rank differs from the action");
  const Manifold& m = *eq2.alpha.manifold;
  const int n_charts = static_cast<int>(m.charts.size());
  std::vector<int> per_chart(n_charts, 0);
  ResidualReport rep{"moment equation", 0.0, tol, 0, false};
  for (const VecX& q : samples)
    for (int c = 0; c < n_charts; ++c) {
      const Vec2 p = m.charts[c].coords(q);
      if (!p.allFinite() || m.charts[c].depth(p) <= kMinDepth) continue;
      ++per_chart[c];
      const Point pt{c, p};
      const double w = eq2.alpha.coefficient(pt);
      for (int j = 0; j < action.rank; ++j) {
        VecX e = VecX::Zero(action.rank);
        e(j) = 1.0;
        const Vec2 X = generating_field(m, action, e, pt);
        for (int k = 0; k < 2; ++k) {
          Vec2 v = Vec2::Zero();
          v(k) = 1.0;
          const double dmu = (eq2.mu.component(j, m.charts[c].embed(p + h * v)) -
                              eq2.mu.component(j, m.charts[c].embed(p - h * v))) / (2 * h);
          // (i/2pi) iota_X (i w du^dv) evaluated on v
          const double rhs = -w / two_pi<double> * (X.x() * v.y() - X.y() * v.x());
          rep.residual = std::max(rep.residual, std::abs(dmu - rhs));
        }
      }
      ++rep.samples;
    }
  for (int c = 0; c < n_charts; ++c)
    if (per_chart[c] < 10)
      throw PreconditionError("check_moment_equation: chart '" + m.charts[c].name + "' has only " +
                              std::to_string(per_chart[c]) + " samples (need 10)");
  rep.pass = rep.residual < tol;
  return rep;
}

ClassPeriods restrict_class(const EquivariantTwoForm& eq2, const ManifoldScenario& sc) {
  ClassPeriods out{eq2.alpha, {}, {}};
  for (const auto& cyc : sc.two_cycles) {
    const Complex integral = integrate_two_form(eq2.alpha, cyc, sc.quadrature.surface_grid);
    out.cycles.push_back(cyc.name);
    out.periods.push_back((Complex(0, 1) * integral / two_pi<double>).real());
  }
  return out;
}

IntegralityReport check_integrality(const EquivariantTwoForm& eq2, const TorusAction& action,
                                    const LineBundleData& bundle, double tol) {
  const ManifoldScenario& sc = *bundle.scenario;
  IntegralityReport rep;
  rep.tolerance = tol;
  const ClassPeriods cls = restrict_class(eq2, sc);
  rep.periods = cls.periods;
  bool all_zero = true;
  for (std::size_t i = 0; i < cls.periods.size(); ++i) {
    const double p = cls.periods[i];
    const double res = std::abs(p - std::round(p));
    rep.worst_residual = std::max(rep.worst_residual, res);
    if (res >= tol) {
      rep.offenders.push_back("period over " + cls.cycles[i] + " = " + std::to_string(p) + " is not an integer");
    } else if (std::lround(p) != bundle.degree) {
      rep.offenders.push_back("period over " + cls.cycles[i] + " = " + std::to_string(std::lround(p)) +
                              " differs from the bundle degree " + std::to_string(bundle.degree));
    }
    if (std::abs(p) >= tol) all_zero = false;
  }
  for (const VecX& fp : action.fixed_points)
    for (int j = 0; j < eq2.mu.rank(); ++j) {
      const double v = eq2.mu.component(j, fp);
      rep.fixed_values.push_back({fp, j, v});
      const double res = std::abs(v - std::round(v));
      rep.worst_residual = std::max(rep.worst_residual, res);
      if (res >= tol)
        rep.offenders.push_back("mu_" + std::to_string(j) + " = " + std::to_string(v) + " at fixed point " +
                                describe(fp));
    }
  rep.pass = rep.offenders.empty();
  if (!rep.pass)
    rep.certificate = "none";
  else if (!action.fixed_points.empty())
    rep.certificate = "fixed-point";
  else
    rep.certificate = all_zero ? "trivial-class" : "periods-only";
  return rep;
}

MomentMapData operator+(const MomentMapData& a, const MomentMapData& b) {
  if (a.rank() != b.rank()) throw PreconditionError("moment maps of different rank");
  MomentMapData out = a;
  for (int j = 0; j < a.rank(); ++j)
    out.components[j] = [f = a.components[j], g = b.components[j]](const VecX& q) { return f(q) + g(q); };
  out.equivariant = a.equivariant && b.equivariant;
  out.descriptor = {{"kind", "sum"}, {"terms", {a.descriptor, b.descriptor}}};
  return out;
}

MomentMapData operator*(double s, const MomentMapData& a) {
  MomentMapData out = a;
  for (int j = 0; j < a.rank(); ++j)
    out.components[j] = [f = a.components[j], s](const VecX& q) { return s * f(q); };
  out.descriptor = {{"kind", "scaled"}, {"factor", s}, {"base", a.descriptor}};
  return out;
}

EquivariantTwoForm cartan_differential(const OneForm& eta, const ManifoldScenario& sc) {
  if (!eta.imaginary) throw PreconditionError("cartan_differential: eta must be imaginary");
  EquivariantTwoForm out{exterior_derivative(eta), {}};
  const ManifoldPtr m = sc.manifold;
  const TorusAction action = sc.action;
  for (int j = 0; j < action.rank; ++j) {
    out.mu.components.push_back([m, eta, action, j](const VecX& q) {
      VecX e = VecX::Zero(action.rank);
      e(j) = 1.0;
      const Point p = m->locate(q);
      // -(i/2pi) (i eta_r)(X_j)
      return eta.evaluate(p, generating_field(*m, action, e, p)) / two_pi<double>;
    });
  }
  out.mu.descriptor = {{"kind", "cartan-differential"}};
  return out;
}

EquivariantTwoForm add_exact(const EquivariantTwoForm& eq2, const OneForm& eta, const ManifoldScenario& sc) {
  const EquivariantTwoForm d = cartan_differential(eta, sc);
  EquivariantTwoForm out{eq2.alpha + d.alpha, eq2.mu + d.mu};
  out.mu.scenario = eq2.mu.scenario;
  return out;
}

double alpha_invariance_residual(const TwoForm& alpha, const TorusAction& action,
                                 const std::vector<VecX>& samples, int per_circle) {
  const Manifold& m = *alpha.manifold;
  double worst = 0.0;
  const int total = static_cast<int>(std::pow(per_circle, action.rank));
  for (int idx = 0; idx < total; ++idx) {
    VecX s(action.rank);
    int r = idx;
    for (int k = 0; k < action.rank; ++k) {
      s(k) = static_cast<double>(r % per_circle) / per_circle;
      r /= per_circle;
    }
    const TwoForm pulled = pullback(alpha, action, s, 1.0);
    for (const VecX& q : samples)
      for (int c = 0; c < static_cast<int>(m.charts.size()); ++c) {
        const Vec2 p = m.charts[c].coords(q);
        if (!p.allFinite() || m.charts[c].depth(p) <= kMinDepth) continue;
        worst = std::max(worst, std::abs(pulled.coefficient({c, p}) - alpha.coefficient({c, p})));
      }
  }
  return worst;
}

}  // namespace eqlift
