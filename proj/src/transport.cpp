#include "eqlift/transport.hpp"

#include "eqlift/errors.hpp"
#include "eqlift/numerics.hpp"

#include <cmath>

namespace eqlift {

using numerics::two_pi;

double MomentMapData::pairing(const VecX& q, const VecX& s) const {
  if (s.size() != rank()) throw PreconditionError("moment pairing: lattice vector has wrong rank");
  double sum = 0.0;
  for (int j = 0; j < rank(); ++j)
    if (s(j) != 0.0) sum += s(j) * components[j](q);
  return sum;
}

MomentMapData MomentMapData::shifted(const VecX& offsets) const {
  if (offsets.size() != rank()) throw PreconditionError("moment shift: wrong number of offsets");
  MomentMapData out = *this;
  for (int j = 0; j < rank(); ++j)
    out.components[j] = [f = components[j], c = offsets(j)](const VecX& q) { return f(q) + c; };
  out.descriptor = {{"kind", "shifted"}, {"base", descriptor},
                    {"offsets", std::vector<double>(offsets.data(), offsets.data() + offsets.size())}};
  return out;
}

std::string to_string(MonodromyMethod m) { return m == MonodromyMethod::formula ? "formula" : "ode"; }

FiberPoint express_in(const LineBundleData& bundle, const FiberPoint& y, int chart) {
  if (y.base.chart == chart) return y;
  const Manifold& m = *bundle.scenario->manifold;
  const VecX q = m.ambient(y.base);
  // psi_chart = g_{chart, src} psi_src
  return {m.in_chart(q, chart), bundle.g(chart, y.base.chart, q) * y.value};
}

Complex parallel_transport(const ConnectionData& conn, const PathSpec& path, int n_steps) {
  if (!conn.forms.imaginary) throw PreconditionError("connection forms must be imaginary");
  if (path.segments.empty()) return 1.0;
  const Manifold& m = *conn.scenario().manifold;
  Complex lambda = 1.0;
  for (std::size_t k = 0; k < path.segments.size(); ++k) {
    const auto& seg = path.segments[k];
    if (seg.chart < 0 || seg.chart >= static_cast<int>(m.charts.size()))
      throw DomainError("parallel_transport: segment outside atlas");
    const double integral = numerics::simpson<double>(
        [&](double t) { return conn.forms.evaluate(Point{seg.chart, seg.position(t)}, seg.velocity(t)); },
        seg.t0, seg.t1, n_steps);
    lambda *= std::polar(1.0, -integral);
    if (k + 1 < path.segments.size()) {
      const int next = path.segments[k + 1].chart;
      if (next != seg.chart) lambda *= conn.bundle->g(next, seg.chart, m.ambient(Point{seg.chart, seg.position(seg.t1)}));
    }
  }
  const Point end = path_end(path), start = path_start(path);
  if (end.chart != start.chart && m.same_point(start, end, 1e-8))
    lambda *= conn.bundle->g(start.chart, end.chart, m.ambient(end));
  return path.orientation > 0 ? lambda : std::conj(lambda);
}

Complex orbit_holonomy(const ConnectionData& conn, const TorusAction& action, const VecX& gamma,
                       const VecX& x, int pieces, double offset) {
  if (action.acts_trivially) return 1.0;
  const ManifoldScenario& sc = conn.scenario();
  const PathSpec loop = flow_loop(*sc.manifold, action, gamma, x, pieces, offset);
  return parallel_transport(conn, loop, sc.quadrature.line_steps);
}

MonodromyResult monodromy_formula(const ConnectionData& conn, const MomentMapData& mu,
                                  const TorusAction& action, const VecX& gamma, const VecX& x) {
  MonodromyResult r;
  r.method = MonodromyMethod::formula;
  r.x = x;
  r.gamma = gamma;
  r.holonomy_part = orbit_holonomy(conn, action, gamma, x);
  r.moment_part = std::polar(1.0, two_pi<double> * mu.pairing(x, gamma));
  r.phase = r.holonomy_part * r.moment_part;
  r.steps = conn.scenario().quadrature.line_steps;
  return r;
}

LiftedFlowResult integrate_lifted_flow(const ConnectionData& conn, const MomentMapData& mu,
                                       const TorusAction& action, const VecX& s, const FiberPoint& y,
                                       double duration, int n_steps) {
  if (n_steps < 1) throw PreconditionError("integrate_lifted_flow: n_steps must be positive");
  const ManifoldScenario& sc = conn.scenario();
  const Manifold& m = *sc.manifold;
  using State = Eigen::Vector4d;  // (u, v, holonomy angle, moment angle)

  int chart = y.base.chart;
  State state(y.base.coords.x(), y.base.coords.y(), 0.0, 0.0);
  Complex transitions = 1.0;
  int switches = 0;
  const double h = duration / n_steps;

  for (int step = 0; step < n_steps; ++step) {
    const Vec2 p = state.head<2>();
    if (m.charts[chart].depth(p) < sc.switch_depth) {
      const VecX q = m.charts[chart].embed(p);
      const Point next = m.locate(q);
      if (next.chart != chart) {
        transitions *= conn.bundle->g(next.chart, chart, q);
        chart = next.chart;
        ++switches;
      }
      state.head<2>() = next.coords;
    }
    const Chart& ch = m.charts[chart];
    auto rhs = [&](double, const State& st) -> State {
      const Vec2 pc = st.head<2>();
      const VecX q = ch.embed(pc);
      const Vec2 X = ch.coords_jacobian(q) * action.field(s, q);
      State d;
      d.head<2>() = X;
      d(2) = -conn.forms.charts[chart].coeff(pc).dot(X);
      d(3) = two_pi<double> * mu.pairing(q, s);
      return d;
    };
    state = numerics::rk4_step<double>(rhs, step * h, state, h);
  }

  LiftedFlowResult out;
  out.holonomy_part = transitions * std::polar(1.0, state(2));
  out.moment_part = std::polar(1.0, state(3));
  out.end = {{chart, state.head<2>()}, y.value * out.holonomy_part * out.moment_part};
  out.chart_switches = switches;
  return out;
}

MonodromyResult monodromy_ode(const ConnectionData& conn, const MomentMapData& mu,
                              const TorusAction& action, const VecX& gamma, const VecX& x, int n_steps) {
  const Manifold& m = *conn.scenario().manifold;
  const Point start = m.locate(x);
  auto run = [&](int n) {
    const LiftedFlowResult res = integrate_lifted_flow(conn, mu, action, gamma, {start, 1.0}, 1.0, n);
    if (!m.same_point(res.end.base, start, 1e-6))
      throw AccuracyError("monodromy_ode: lifted flow did not close up over one period");
    // Bring the fibre value back to the starting trivialization.
    const Complex back = conn.bundle->g(start.chart, res.end.base.chart, m.ambient(res.end.base));
    return std::pair{res, back};
  };
  const auto [coarse, back_coarse] = run(n_steps);
  const auto [fine, back_fine] = run(2 * n_steps);
  const Complex pc = coarse.end.value * back_coarse, pf = fine.end.value * back_fine;
  if (std::abs(pc - pf) > 1e-6)
    throw AccuracyError("monodromy_ode: step doubling changed the phase by " + std::to_string(std::abs(pc - pf)));
  MonodromyResult r;
  r.method = MonodromyMethod::ode;
  r.x = x;
  r.gamma = gamma;
  r.phase = pf;
  r.holonomy_part = fine.holonomy_part * back_fine;
  r.moment_part = fine.moment_part;
  r.steps = 2 * n_steps;
  return r;
}

double moment_orbit_residual(const MomentMapData& mu, const TorusAction& action,
                             const std::vector<VecX>& samples, int per_circle) {
  double worst = 0.0;
  for (const VecX& q : samples)
    for (int j = 0; j < action.rank; ++j)
      for (int k = 1; k < per_circle; ++k) {
        VecX s = VecX::Zero(action.rank);
        s(j) = static_cast<double>(k) / per_circle;
        const VecX q1 = action.flow(s, 1.0, q);
        for (int c = 0; c < mu.rank(); ++c)
          worst = std::max(worst, std::abs(mu.component(c, q1) - mu.component(c, q)));
      }
  return worst;
}

}  // namespace eqlift
