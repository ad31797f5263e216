#include "eqlift/geometry.hpp"

#include "eqlift/errors.hpp"
#include "eqlift/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace eqlift {

// --- Manifold ----------------------------------------------------------------

VecX Manifold::ambient(const Point& p) const { return charts.at(p.chart).embed(p.coords); }

double Manifold::depth(const Point& p) const { return charts.at(p.chart).depth(p.coords); }

Point Manifold::locate(const VecX& q) const {
  Point best{-1, Vec2::Zero()};
  double best_depth = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < static_cast<int>(charts.size()); ++c) {
    const Vec2 p = charts[c].coords(q);
    if (!p.allFinite()) continue;
    const double d = charts[c].depth(p);
    if (d > best_depth) {
      best_depth = d;
      best = {c, p};
    }
  }
  if (best.chart < 0 || best_depth <= 0.0) throw DomainError("point outside atlas of " + name);
  return best;
}

Point Manifold::in_chart(const VecX& q, int chart) const {
  const Vec2 p = charts.at(chart).coords(q);
  if (!p.allFinite() || charts[chart].depth(p) <= 0.0)
    throw DomainError("point outside chart " + charts[chart].name + " of " + name);
  return {chart, p};
}

Point Manifold::to_chart(const Point& p, int chart) const {
  if (p.chart == chart) return p;
  return in_chart(ambient(p), chart);
}

bool Manifold::same_point(const Point& a, const Point& b, double tol) const {
  return distance(ambient(a), ambient(b)) <= tol;
}

Mat2 Manifold::transition_jacobian(const Point& p, int target) const {
  const VecX q = ambient(p);
  return charts.at(target).coords_jacobian(q) * charts.at(p.chart).embed_jacobian(p.coords);
}

double Manifold::area_density(const Point& p) const {
  const MatX J = charts.at(p.chart).embed_jacobian(p.coords);
  return std::sqrt((J.transpose() * J).determinant());
}

// --- forms -------------------------------------------------------------------

bool OneForm::has_exterior() const {
  return std::all_of(charts.begin(), charts.end(),
                     [](const OneFormChart& c) { return static_cast<bool>(c.exterior); });
}

double OneForm::exterior(const Point& p) const {
  const auto& c = charts.at(p.chart);
  if (!c.exterior) throw PreconditionError("one-form has no analytic exterior derivative");
  return c.exterior(p.coords);
}

OneForm OneForm::zero(ManifoldPtr m, bool imaginary) {
  OneForm f{m, {}, imaginary};
  for (std::size_t c = 0; c < m->charts.size(); ++c)
    f.charts.push_back({[](const Vec2&) { return Vec2::Zero().eval(); },
                        [](const Vec2&) { return 0.0; }});
  return f;
}

OneForm OneForm::from_ambient(ManifoldPtr m, const AmbientCovector& q, bool imaginary) {
  return from_ambient_per_chart(m, std::vector<AmbientCovector>(m->charts.size(), q), imaginary);
}

OneForm OneForm::from_ambient_per_chart(ManifoldPtr m, const std::vector<AmbientCovector>& q,
                                        bool imaginary) {
  if (q.size() != m->charts.size())
    throw PreconditionError("from_ambient_per_chart: one covector per chart required");
  OneForm f{m, {}, imaginary};
  for (std::size_t c = 0; c < m->charts.size(); ++c) {
    const Chart& chart = m->charts[c];
    OneFormChart oc;
    oc.coeff = [chart, Q = q[c].value](const Vec2& p) -> Vec2 {
      return chart.embed_jacobian(p).transpose() * Q(chart.embed(p));
    };
    if (q[c].derivative) {
      oc.exterior = [chart, W = q[c].derivative](const Vec2& p) {
        const MatX J = chart.embed_jacobian(p);
        return J.col(0).dot(W(chart.embed(p)) * J.col(1));
      };
    }
    f.charts.push_back(std::move(oc));
  }
  return f;
}

namespace {

void require_compatible(const OneForm& a, const OneForm& b) {
  if (a.manifold != b.manifold || a.charts.size() != b.charts.size())
    throw PreconditionError("one-forms live on different manifolds");
  if (a.imaginary != b.imaginary)
    throw PreconditionError("cannot add real and imaginary one-forms");
}

}  // namespace

OneForm operator+(const OneForm& a, const OneForm& b) {
  require_compatible(a, b);
  OneForm f{a.manifold, {}, a.imaginary};
  for (std::size_t c = 0; c < a.charts.size(); ++c) {
    OneFormChart oc;
    oc.coeff = [fa = a.charts[c].coeff, fb = b.charts[c].coeff](const Vec2& p) -> Vec2 {
      return fa(p) + fb(p);
    };
    if (a.charts[c].exterior && b.charts[c].exterior)
      oc.exterior = [da = a.charts[c].exterior, db = b.charts[c].exterior](const Vec2& p) {
        return da(p) + db(p);
      };
    f.charts.push_back(std::move(oc));
  }
  return f;
}

OneForm operator*(double s, const OneForm& a) {
  OneForm f{a.manifold, {}, a.imaginary};
  for (const auto& ch : a.charts) {
    OneFormChart oc;
    oc.coeff = [s, fa = ch.coeff](const Vec2& p) -> Vec2 { return s * fa(p); };
    if (ch.exterior) oc.exterior = [s, da = ch.exterior](const Vec2& p) { return s * da(p); };
    f.charts.push_back(std::move(oc));
  }
  return f;
}

OneForm operator-(const OneForm& a, const OneForm& b) { return a + (-1.0) * b; }

TwoForm TwoForm::zero(ManifoldPtr m, bool imaginary) {
  TwoForm f{m, {}, imaginary};
  f.charts.assign(m->charts.size(), [](const Vec2&) { return 0.0; });
  return f;
}

TwoForm TwoForm::from_ambient(ManifoldPtr m, const AmbientBivector& b, bool imaginary) {
  TwoForm f{m, {}, imaginary};
  for (const Chart& chart : m->charts) {
    f.charts.push_back([chart, b](const Vec2& p) {
      const MatX J = chart.embed_jacobian(p);
      return J.col(0).dot(b(chart.embed(p)) * J.col(1));
    });
  }
  return f;
}

TwoForm operator+(const TwoForm& a, const TwoForm& b) {
  if (a.manifold != b.manifold || a.imaginary != b.imaginary)
    throw PreconditionError("incompatible two-forms");
  TwoForm f{a.manifold, {}, a.imaginary};
  for (std::size_t c = 0; c < a.charts.size(); ++c)
    f.charts.push_back([fa = a.charts[c], fb = b.charts[c]](const Vec2& p) { return fa(p) + fb(p); });
  return f;
}

TwoForm operator*(double s, const TwoForm& a) {
  TwoForm f{a.manifold, {}, a.imaginary};
  for (const auto& ch : a.charts) f.charts.push_back([s, ch](const Vec2& p) { return s * ch(p); });
  return f;
}

TwoForm exterior_derivative(const OneForm& form) {
  if (!form.has_exterior()) throw PreconditionError("one-form has no analytic exterior derivative");
  TwoForm f{form.manifold, {}, form.imaginary};
  for (const auto& ch : form.charts) f.charts.push_back(ch.exterior);
  return f;
}

// --- operations ----------------------------------------------------------------

TangentVector generating_field(const Manifold& m, const TorusAction& action, const VecX& s,
                               const Point& x) {
  if (x.chart < 0 || x.chart >= static_cast<int>(m.charts.size()) || m.depth(x) <= 0.0)
    throw DomainError("generating_field: point outside atlas");
  const VecX q = m.ambient(x);
  return m.charts[x.chart].coords_jacobian(q) * action.field(s, q);
}

Complex integrate_one_form(const OneForm& form, const PathSpec& path, int n_steps) {
  if (n_steps < 16) throw PreconditionError("integrate_one_form: n_steps must be >= 16");
  const Manifold& m = *form.manifold;
  double total = 0.0;
  for (const auto& seg : path.segments) {
    if (seg.chart < 0 || seg.chart >= static_cast<int>(m.charts.size()))
      throw DomainError("path segment references unknown chart");
    total += numerics::simpson<double>(
        [&](double t) {
          const Point p{seg.chart, seg.position(t)};
          return form.evaluate(p, seg.velocity(t));
        },
        seg.t0, seg.t1, n_steps);
  }
  total *= path.orientation;
  return form.imaginary ? Complex(0.0, total) : Complex(total, 0.0);
}

Complex integrate_two_form(const TwoForm& form, const TwoCycle& cycle, int n) {
  if (n < 2) throw PreconditionError("integrate_two_form: grid too small");
  double total = 0.0;
  for (const auto& patch : cycle.patches) {
    const auto& w = form.charts.at(patch.chart);
    auto axis = [n](double lo, double hi, bool periodic) {
      std::vector<std::pair<double, double>> nodes;
      if (periodic) {
        const double h = (hi - lo) / n;
        for (int i = 0; i < n; ++i) nodes.emplace_back(lo + (i + 0.5) * h, h);
      } else {
        const auto [x, wt] = numerics::gauss_legendre<double>(n);
        const double half = (hi - lo) / 2, mid = (hi + lo) / 2;
        for (int i = 0; i < n; ++i) nodes.emplace_back(mid + half * x(i), half * wt(i));
      }
      return nodes;
    };
    const auto us = axis(patch.lo.x(), patch.hi.x(), patch.periodic_u);
    const auto vs = axis(patch.lo.y(), patch.hi.y(), patch.periodic_v);
    double s = 0.0;
    for (const auto& [u, wu] : us)
      for (const auto& [v, wv] : vs) s += w(Vec2(u, v)) * wu * wv;
    total += s;
  }
  total *= cycle.orientation;
  return form.imaginary ? Complex(0.0, total) : Complex(total, 0.0);
}

Point path_start(const PathSpec& path) {
  const auto& s = path.segments.front();
  return {s.chart, s.position(s.t0)};
}

Point path_end(const PathSpec& path) {
  const auto& s = path.segments.back();
  return {s.chart, s.position(s.t1)};
}

bool is_closed(const Manifold& m, const PathSpec& path, double tol) {
  if (path.segments.empty()) return false;
  return m.same_point(path_start(path), path_end(path), tol);
}

VecX pair_h1(const ManifoldScenario& scenario, const PathSpec& loop, int n_steps) {
  if (!is_closed(*scenario.manifold, loop, 1e-8))
    throw PreconditionError("pair_h1: loop is not closed");
  VecX out(scenario.h1_basis.size());
  for (std::size_t j = 0; j < scenario.h1_basis.size(); ++j)
    out(j) = integrate_one_form(scenario.h1_basis[j], loop, n_steps).real();
  return out;
}

PathSpec chart_line(int chart, const Vec2& a, const Vec2& b) {
  PathSegment seg;
  seg.chart = chart;
  seg.position = [a, b](double t) -> Vec2 { return a + t * (b - a); };
  seg.velocity = [a, b](double) -> Vec2 { return b - a; };
  PathSpec path;
  path.segments.push_back(std::move(seg));
  return path;
}

PathSpec orbit_loop(const ManifoldScenario& scenario, const VecX& gamma, const VecX& x,
                    int pieces, double offset) {
  return flow_loop(*scenario.manifold, scenario.action, gamma, x, pieces, offset);
}

PathSpec flow_loop(const Manifold& m, const TorusAction& action, const VecX& gamma, const VecX& x,
                   int pieces, double offset) {
  if (pieces <= 0) pieces = 8 * std::max(1, static_cast<int>(std::ceil(gamma.cwiseAbs().maxCoeff())));
  offset -= std::floor(offset);

  std::vector<double> cuts{0.0};
  for (int i = 0; i <= pieces; ++i) {
    const double t = (i + offset) / pieces;
    if (t > 1e-12 && t < 1.0 - 1e-12) cuts.push_back(t);
  }
  cuts.push_back(1.0);

  const VecX q0 = x;
  auto orbit = [action, gamma, q0](double t) { return action.flow(gamma, t, q0); };

  PathSpec path;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double ta = cuts[i], tb = cuts[i + 1];
    int best = -1;
    double best_depth = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < static_cast<int>(m.charts.size()); ++c) {
      double d = std::numeric_limits<double>::infinity();
      for (int k = 0; k <= 8; ++k) {
        const Vec2 p = m.charts[c].coords(orbit(ta + (tb - ta) * k / 8.0));
        d = std::min(d, p.allFinite() ? m.charts[c].depth(p) : -1.0);
      }
      if (d > best_depth) {
        best_depth = d;
        best = c;
      }
    }
    if (best < 0 || best_depth <= 0.0) throw DomainError("orbit_loop: orbit piece leaves the atlas");
    const Chart chart = m.charts[best];
    const Vec2 ref = chart.coords(orbit(ta));
    PathSegment seg;
    seg.chart = best;
    seg.t0 = ta;
    seg.t1 = tb;
    seg.position = [chart, orbit, ref](double t) -> Vec2 {
      return chart.unwrap(chart.coords(orbit(t)), ref);
    };
    seg.velocity = [chart, orbit, action, gamma](double t) -> Vec2 {
      const VecX q = orbit(t);
      return chart.coords_jacobian(q) * action.field(gamma, q);
    };
    path.segments.push_back(std::move(seg));
  }
  return path;
}

Mat2 flow_pushforward(const Manifold& m, const TorusAction& action, const VecX& s, double t,
                      const Point& p, int target_chart) {
  const VecX q = m.ambient(p);
  const VecX q1 = action.flow(s, t, q);
  return m.charts.at(target_chart).coords_jacobian(q1) * action.flow_jacobian(s, t, q) *
         m.charts.at(p.chart).embed_jacobian(p.coords);
}

OneForm pullback(const OneForm& form, const TorusAction& action, const VecX& s, double t) {
  const ManifoldPtr m = form.manifold;
  OneForm out{m, {}, form.imaginary};
  const bool with_d = form.has_exterior();
  for (int c = 0; c < static_cast<int>(m->charts.size()); ++c) {
    OneFormChart oc;
    oc.coeff = [m, form, action, s, t, c](const Vec2& p) -> Vec2 {
      const Point src{c, p};
      const Point dst = m->locate(action.flow(s, t, m->ambient(src)));
      const Mat2 D = flow_pushforward(*m, action, s, t, src, dst.chart);
      return D.transpose() * form.coefficients(dst);
    };
    if (with_d) {
      oc.exterior = [m, form, action, s, t, c](const Vec2& p) {
        const Point src{c, p};
        const Point dst = m->locate(action.flow(s, t, m->ambient(src)));
        const Mat2 D = flow_pushforward(*m, action, s, t, src, dst.chart);
        return D.determinant() * form.exterior(dst);
      };
    }
    out.charts.push_back(std::move(oc));
  }
  return out;
}

TwoForm pullback(const TwoForm& form, const TorusAction& action, const VecX& s, double t) {
  const ManifoldPtr m = form.manifold;
  TwoForm out{m, {}, form.imaginary};
  for (int c = 0; c < static_cast<int>(m->charts.size()); ++c) {
    out.charts.push_back([m, form, action, s, t, c](const Vec2& p) {
      const Point src{c, p};
      const Point dst = m->locate(action.flow(s, t, m->ambient(src)));
      return flow_pushforward(*m, action, s, t, src, dst.chart).determinant() * form.coefficient(dst);
    });
  }
  return out;
}

// --- diagnostics ------------------------------------------------------------------

namespace {

template <typename F>
void for_each_chart_sample(const Manifold& m, const std::vector<VecX>& samples, double min_depth, F&& f) {
  for (const VecX& q : samples)
    for (int c = 0; c < static_cast<int>(m.charts.size()); ++c) {
      const Vec2 p = m.charts[c].coords(q);
      if (p.allFinite() && m.charts[c].depth(p) > min_depth) f(Point{c, p});
    }
}

double fd_exterior(const OneForm& form, const Point& p, double h) {
  const auto& coeff = form.charts[p.chart].coeff;
  const Vec2 eu(1, 0), ev(0, 1);
  const double du_a2 = (coeff(p.coords + h * eu).y() - coeff(p.coords - h * eu).y()) / (2 * h);
  const double dv_a1 = (coeff(p.coords + h * ev).x() - coeff(p.coords - h * ev).x()) / (2 * h);
  return du_a2 - dv_a1;
}

}  // namespace

double transition_residual(const ManifoldScenario& scenario) {
  const Manifold& m = *scenario.manifold;
  double worst = 0.0;
  for_each_chart_sample(m, scenario.sample_points, 0.0, [&](const Point& p) {
    for (int j = 0; j < static_cast<int>(m.charts.size()); ++j) {
      const Vec2 pj = m.charts[j].coords(m.ambient(p));
      if (!pj.allFinite() || m.charts[j].depth(pj) <= 0.0) continue;
      const Point back = m.to_chart(Point{j, pj}, p.chart);
      const Vec2 diff = m.charts[p.chart].unwrap(back.coords, p.coords) - p.coords;
      worst = std::max(worst, diff.norm());
    }
  });
  return worst;
}

double exterior_derivative_residual(const OneForm& form, const std::vector<VecX>& samples, double h) {
  double worst = 0.0;
  for_each_chart_sample(*form.manifold, samples, 0.05, [&](const Point& p) {
    worst = std::max(worst, std::abs(form.exterior(p) - fd_exterior(form, p, h)));
  });
  return worst;
}

double closedness_residual(const OneForm& form, const std::vector<VecX>& samples, double h) {
  double worst = 0.0;
  for_each_chart_sample(*form.manifold, samples, 0.05, [&](const Point& p) {
    worst = std::max(worst, std::abs(fd_exterior(form, p, h)));
  });
  return worst;
}

double overlap_residual(const OneForm& form, const std::vector<VecX>& samples) {
  const Manifold& m = *form.manifold;
  double worst = 0.0;
  for_each_chart_sample(m, samples, 0.0, [&](const Point& p) {
    for (int j = p.chart + 1; j < static_cast<int>(m.charts.size()); ++j) {
      const Vec2 pj = m.charts[j].coords(m.ambient(p));
      if (!pj.allFinite() || m.charts[j].depth(pj) <= 0.0) continue;
      const Mat2 J = m.transition_jacobian(p, j);
      const Vec2 diff = form.coefficients(p) - J.transpose() * form.coefficients(Point{j, pj});
      worst = std::max(worst, diff.norm());
    }
  });
  return worst;
}

double overlap_residual(const TwoForm& form, const std::vector<VecX>& samples) {
  const Manifold& m = *form.manifold;
  double worst = 0.0;
  for_each_chart_sample(m, samples, 0.0, [&](const Point& p) {
    for (int j = p.chart + 1; j < static_cast<int>(m.charts.size()); ++j) {
      const Vec2 pj = m.charts[j].coords(m.ambient(p));
      if (!pj.allFinite() || m.charts[j].depth(pj) <= 0.0) continue;
      const double diff = form.coefficient(p) -
                          m.transition_jacobian(p, j).determinant() * form.coefficient(Point{j, pj});
      worst = std::max(worst, std::abs(diff));
    }
  });
  return worst;
}

double c0_norm(const TwoForm& form, const std::vector<VecX>& samples) {
  const Manifold& m = *form.manifold;
  double worst = 0.0;
  for (const VecX& q : samples) {
    const Point p = m.locate(q);
    worst = std::max(worst, std::abs(form.coefficient(p)) / m.area_density(p));
  }
  return worst;
}

MatX h1_pairing_matrix(const ManifoldScenario& scenario, int n_steps) {
  const std::size_t b = scenario.h1_basis.size();
  MatX P(b, scenario.h1_cycles.size());
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < scenario.h1_cycles.size(); ++j)
      P(i, j) = integrate_one_form(scenario.h1_basis[i], scenario.h1_cycles[j], n_steps).real();
  return P;
}

}  // namespace eqlift
