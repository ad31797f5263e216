#include "eqlift/bundle.hpp"

#include "eqlift/errors.hpp"

#include <cmath>
#include <sstream>

namespace eqlift {

Vec2 GaugeTransform::log_derivative(const Point& p) const {
  const MatX J = manifold->charts.at(p.chart).embed_jacobian(p.coords);
  return J.transpose() * phase_gradient(manifold->ambient(p));
}

GaugeTransform GaugeTransform::identity(ManifoldPtr m) {
  const int n = m->ambient_dim;
  return {m, [](const VecX&) { return 0.0; }, [n](const VecX&) { return VecX::Zero(n).eval(); },
          {{"kind", "identity"}}};
}

GaugeTransform operator*(const GaugeTransform& g, const GaugeTransform& h) {
  return {g.manifold,
          [a = g.phase, b = h.phase](const VecX& q) { return a(q) + b(q); },
          [a = g.phase_gradient, b = h.phase_gradient](const VecX& q) -> VecX { return a(q) + b(q); },
          {{"kind", "product"}, {"left", g.descriptor}, {"right", h.descriptor}}};
}

TwoForm curvature(const ConnectionData& conn) {
  const ManifoldScenario& sc = conn.scenario();
  const TwoForm F = exterior_derivative(conn.forms);
  const Manifold& m = *sc.manifold;
  for (const VecX& q : sc.sample_points)
    for (int i = 0; i < static_cast<int>(m.charts.size()); ++i) {
      const Vec2 pi = m.charts[i].coords(q);
      if (!pi.allFinite() || m.charts[i].depth(pi) <= 0.0) continue;
      for (int j = i + 1; j < static_cast<int>(m.charts.size()); ++j) {
        const Vec2 pj = m.charts[j].coords(q);
        if (!pj.allFinite() || m.charts[j].depth(pj) <= 0.0) continue;
        const Point p{i, pi};
        const double diff = F.coefficient(p) - m.transition_jacobian(p, j).determinant() *
                                                   F.coefficient(Point{j, pj});
        if (std::abs(diff) > 1e-8) {
          std::ostringstream os;
          os << "curvature disagrees on overlap " << m.charts[i].name << "/" << m.charts[j].name
             << " by " << diff;
          throw InconsistencyError(os.str());
        }
      }
    }
  // Evaluate through the deepest chart so a coefficient never comes from a
  // trivialization that degenerates nearby.
  const ManifoldPtr mp = sc.manifold;
  TwoForm out{mp, {}, F.imaginary};
  for (int c = 0; c < static_cast<int>(mp->charts.size()); ++c) {
    out.charts.push_back([mp, F, c](const Vec2& p) {
      const Point src{c, p};
      const Point best = mp->locate(mp->ambient(src));
      if (best.chart == c) return F.coefficient(src);
      return mp->transition_jacobian(src, best.chart).determinant() * F.coefficient(best);
    });
  }
  return out;
}

ConnectionData apply_gauge(const ConnectionData& conn, const GaugeTransform& g) {
  const ManifoldPtr m = conn.forms.manifold;
  OneForm shift{m, {}, true};
  for (int c = 0; c < static_cast<int>(m->charts.size()); ++c) {
    shift.charts.push_back({[g, c](const Vec2& p) { return g.log_derivative(Point{c, p}); },
                            [](const Vec2&) { return 0.0; }});
  }
  return {conn.bundle, conn.forms + shift,
          {{"kind", "gauge"}, {"base", conn.descriptor}, {"gauge", g.descriptor}}};
}

ConnectionData shift_connection(const ConnectionData& conn, const OneForm& eta) {
  if (!eta.imaginary) throw PreconditionError("connection shifts must be imaginary one-forms");
  return {conn.bundle, conn.forms + eta, {{"kind", "shift"}, {"base", conn.descriptor}}};
}

std::pair<BundlePtr, ConnectionData> tensor_power(const BundlePtr& bundle, const ConnectionData& conn, int d) {
  if (d <= 0) throw PreconditionError("tensor_power: d must be a positive integer");
  if (d == 1) return {bundle, conn};
  auto power = std::make_shared<LineBundleData>();
  power->scenario = bundle->scenario;
  power->degree = bundle->degree * d;
  power->transition = [base = bundle, d](int i, int j, const VecX& q) {
    return std::pow(base->g(i, j, q), d);
  };
  power->descriptor = {{"kind", "tensor_power"}, {"base", bundle->descriptor}, {"d", d}};
  ConnectionData out{power, static_cast<double>(d) * conn.forms,
                     {{"kind", "tensor_power"}, {"base", conn.descriptor}, {"d", d}}};
  return {power, out};
}

std::pair<BundlePtr, ConnectionData> tensor_product(const ConnectionData& a, const ConnectionData& b) {
  if (a.bundle->scenario != b.bundle->scenario)
    throw PreconditionError("tensor_product: bundles over different scenarios");
  auto prod = std::make_shared<LineBundleData>();
  prod->scenario = a.bundle->scenario;
  prod->degree = a.bundle->degree + b.bundle->degree;
  prod->transition = [ba = a.bundle, bb = b.bundle](int i, int j, const VecX& q) {
    return ba->g(i, j, q) * bb->g(i, j, q);
  };
  prod->descriptor = {{"kind", "tensor_product"}, {"left", a.bundle->descriptor}, {"right", b.bundle->descriptor}};
  ConnectionData out{prod, a.forms + b.forms,
                     {{"kind", "tensor_product"}, {"left", a.descriptor}, {"right", b.descriptor}}};
  return {prod, out};
}

OneForm connection_difference(const ConnectionData& a, const ConnectionData& b) {
  return a.forms - b.forms;
}

namespace {

std::vector<VecX> torus_grid(int rank, int n) {
  std::vector<VecX> out;
  const int total = static_cast<int>(std::pow(n, rank));
  for (int idx = 0; idx < total; ++idx) {
    VecX s(rank);
    int r = idx;
    for (int k = 0; k < rank; ++k) {
      s(k) = static_cast<double>(r % n) / n;
      r /= n;
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace

OneForm average_one_form(const OneForm& form, const TorusAction& action, int n_grid) {
  if (n_grid < 1) throw PreconditionError("average_one_form: n_grid must be positive");
  const ManifoldPtr m = form.manifold;
  const auto grid = std::make_shared<const std::vector<VecX>>(
      action.acts_trivially ? std::vector<VecX>{VecX::Zero(action.rank)} : torus_grid(action.rank, n_grid));
  OneForm out{m, {}, form.imaginary};
  const bool with_d = form.has_exterior();
  for (int c = 0; c < static_cast<int>(m->charts.size()); ++c) {
    OneFormChart oc;
    oc.coeff = [m, form, action, grid, c](const Vec2& p) -> Vec2 {
      const Point src{c, p};
      const VecX q = m->ambient(src);
      Vec2 sum = Vec2::Zero();
      for (const VecX& s : *grid) {
        const Point dst = m->locate(action.flow(s, 1.0, q));
        sum += flow_pushforward(*m, action, s, 1.0, src, dst.chart).transpose() * form.coefficients(dst);
      }
      return sum / static_cast<double>(grid->size());
    };
    if (with_d) {
      oc.exterior = [m, form, action, grid, c](const Vec2& p) {
        const Point src{c, p};
        const VecX q = m->ambient(src);
        double sum = 0.0;
        for (const VecX& s : *grid) {
          const Point dst = m->locate(action.flow(s, 1.0, q));
          sum += flow_pushforward(*m, action, s, 1.0, src, dst.chart).determinant() * form.exterior(dst);
        }
        return sum / static_cast<double>(grid->size());
      };
    }
    out.charts.push_back(std::move(oc));
  }
  return out;
}

TwoForm average_two_form(const TwoForm& form, const TorusAction& action, int n_grid) {
  if (n_grid < 1) throw PreconditionError("average_two_form: n_grid must be positive");
  const ManifoldPtr m = form.manifold;
  const auto grid = std::make_shared<const std::vector<VecX>>(
      action.acts_trivially ? std::vector<VecX>{VecX::Zero(action.rank)} : torus_grid(action.rank, n_grid));
  TwoForm out{m, {}, form.imaginary};
  for (int c = 0; c < static_cast<int>(m->charts.size()); ++c) {
    out.charts.push_back([m, form, action, grid, c](const Vec2& p) {
      const Point src{c, p};
      const VecX q = m->ambient(src);
      double sum = 0.0;
      for (const VecX& s : *grid) {
        const Point dst = m->locate(action.flow(s, 1.0, q));
        sum += flow_pushforward(*m, action, s, 1.0, src, dst.chart).determinant() * form.coefficient(dst);
      }
      return sum / static_cast<double>(grid->size());
    });
  }
  return out;
}

namespace {

template <typename F>
void for_each_overlap(const Manifold& m, const std::vector<VecX>& samples, F&& f) {
  for (const VecX& q : samples) {
    std::vector<Point> in;
    for (int c = 0; c < static_cast<int>(m.charts.size()); ++c) {
      const Vec2 p = m.charts[c].coords(q);
      if (p.allFinite() && m.charts[c].depth(p) > 0.0) in.push_back({c, p});
    }
    f(q, in);
  }
}

}  // namespace

double cocycle_residual(const LineBundleData& bundle) {
  const ManifoldScenario& sc = *bundle.scenario;
  double worst = 0.0;
  for_each_overlap(*sc.manifold, sc.sample_points, [&](const VecX& q, const std::vector<Point>& in) {
    for (const auto& a : in)
      for (const auto& b : in)
        for (const auto& c : in) {
          const Complex prod = bundle.g(a.chart, b.chart, q) * bundle.g(b.chart, c.chart, q) *
                               bundle.g(c.chart, a.chart, q);
          worst = std::max(worst, std::abs(prod - 1.0));
        }
  });
  return worst;
}

double unitarity_residual(const LineBundleData& bundle) {
  const ManifoldScenario& sc = *bundle.scenario;
  double worst = 0.0;
  for_each_overlap(*sc.manifold, sc.sample_points, [&](const VecX& q, const std::vector<Point>& in) {
    for (const auto& a : in)
      for (const auto& b : in) worst = std::max(worst, std::abs(std::abs(bundle.g(a.chart, b.chart, q)) - 1.0));
  });
  return worst;
}

double compatibility_residual(const ConnectionData& conn, double h) {
  const ManifoldScenario& sc = conn.scenario();
  const Manifold& m = *sc.manifold;
  double worst = 0.0;
  for_each_overlap(m, sc.sample_points, [&](const VecX&, const std::vector<Point>& in) {
    for (const auto& pi : in) {
      if (m.depth(pi) < 0.05) continue;
      for (const auto& pj : in) {
        if (pi.chart == pj.chart) continue;
        // i * d(arg g_ij) in chart i coordinates, five-point stencil.
        const Complex g0 = conn.bundle->g(pi.chart, pj.chart, m.ambient(pi));
        auto phase_at = [&](const Vec2& e) {
          return std::arg(conn.bundle->g(pi.chart, pj.chart, m.charts[pi.chart].embed(pi.coords + e)) / g0);
        };
        Vec2 dlog;
        for (int k = 0; k < 2; ++k) {
          Vec2 e = Vec2::Zero();
          e(k) = h;
          dlog(k) = (8 * (phase_at(e) - phase_at(-e)) - (phase_at(2 * e) - phase_at(-2 * e))) / (12 * h);
        }
        const Mat2 J = m.transition_jacobian(pi, pj.chart);
        const Vec2 lhs = J.transpose() * conn.forms.coefficients(pj);
        const Vec2 rhs = conn.forms.coefficients(pi) + dlog;
        worst = std::max(worst, (lhs - rhs).norm());
      }
    }
  });
  return worst;
}

double gauge_consistency_residual(const GaugeTransform& g, const std::vector<VecX>& samples) {
  const Manifold& m = *g.manifold;
  double worst = 0.0;
  for_each_overlap(m, samples, [&](const VecX&, const std::vector<Point>& in) {
    for (const auto& a : in)
      for (const auto& b : in) worst = std::max(worst, std::abs(g.value(a) - g.value(b)));
  });
  return worst;
}

}  // namespace eqlift
