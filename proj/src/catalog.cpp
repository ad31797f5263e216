#include "eqlift/catalog.hpp"

#include "eqlift/errors.hpp"
#include "eqlift/numerics.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace eqlift::catalog {

namespace {

using numerics::two_pi;
constexpr double pi = std::numbers::pi;
constexpr double kStereoRadius = 2.0;
const double kNaN = std::numeric_limits<double>::quiet_NaN();

MatX identity(int n) { return MatX::Identity(n, n); }

ManifoldPtr make_torus() {
  auto m = std::make_shared<Manifold>();
  m->name = "torus2";
  m->ambient_dim = 2;
  const Vec2 offsets[4] = {{0.0, 0.0}, {0.5, 0.0}, {0.0, 0.5}, {0.5, 0.5}};
  const char* names[4] = {"T00", "T10", "T01", "T11"};
  for (int c = 0; c < 4; ++c) {
    const Vec2 o = offsets[c];
    Chart ch;
    ch.name = names[c];
    ch.embed = [](const Vec2& p) -> VecX { return p; };
    ch.embed_jacobian = [](const Vec2&) { return identity(2); };
    ch.coords = [o](const VecX& q) -> Vec2 {
      const Vec2 d = q.head<2>() - o;
      return o + (d.array() - d.array().floor()).matrix();
    };
    ch.coords_jacobian = [](const VecX&) { return identity(2); };
    ch.depth = [o](const Vec2& p) {
      double d = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 2; ++k) d = std::min({d, p(k) - o(k), o(k) + 1.0 - p(k)});
      return d / 0.5;
    };
    ch.unwrap = [](const Vec2& p, const Vec2& ref) -> Vec2 {
      return p + (ref - p).array().round().matrix();
    };
    m->charts.push_back(std::move(ch));
  }
  m->distance = [](const VecX& a, const VecX& b) {
    Vec2 d = a.head<2>() - b.head<2>();
    d = (d.array() - d.array().round()).matrix();
    return d.norm();
  };
  m->normalize = [](const VecX& q) { return q; };
  return m;
}

Chart stereographic(bool north) {
  // north: projection from the south pole, covers z > -1; south: from the north pole.
  const double sz = north ? 1.0 : -1.0;
  Chart ch;
  ch.name = north ? "north" : "south";
  ch.embed = [sz](const Vec2& p) -> VecX {
    const double r2 = p.squaredNorm(), s = 1.0 + r2;
    VecX q(3);
    q << 2 * p.x() / s, 2 * p.y() / s, sz * (1.0 - r2) / s;
    return q;
  };
  ch.embed_jacobian = [sz](const Vec2& p) {
    const double u = p.x(), v = p.y(), s = 1.0 + p.squaredNorm(), s2 = s * s;
    MatX J(3, 2);
    J << 2 / s - 4 * u * u / s2, -4 * u * v / s2,
         -4 * u * v / s2, 2 / s - 4 * v * v / s2,
         -sz * 4 * u / s2, -sz * 4 * v / s2;
    return J;
  };
  ch.coords = [sz](const VecX& q) -> Vec2 {
    const double den = 1.0 + sz * q(2);
    if (den < 1e-12) return Vec2(kNaN, kNaN);
    return Vec2(q(0) / den, q(1) / den);
  };
  ch.coords_jacobian = [sz](const VecX& q) {
    const double den = 1.0 + sz * q(2), d2 = den * den;
    MatX J(2, 3);
    J << 1 / den, 0, -sz * q(0) / d2,
         0, 1 / den, -sz * q(1) / d2;
    return J;
  };
  ch.depth = [](const Vec2& p) { return (kStereoRadius - p.norm()) / kStereoRadius; };
  ch.unwrap = [](const Vec2& p, const Vec2&) { return p; };
  return ch;
}

Chart band() {
  Chart ch;
  ch.name = "band";
  ch.embed = [](const Vec2& p) -> VecX {
    VecX q(3);
    q << std::sin(p.x()) * std::cos(p.y()), std::sin(p.x()) * std::sin(p.y()), std::cos(p.x());
    return q;
  };
  ch.embed_jacobian = [](const Vec2& p) {
    const double ct = std::cos(p.x()), st = std::sin(p.x()), cp = std::cos(p.y()), sp = std::sin(p.y());
    MatX J(3, 2);
    J << ct * cp, -st * sp,
         ct * sp, st * cp,
         -st, 0.0;
    return J;
  };
  ch.coords = [](const VecX& q) -> Vec2 {
    const double r = q.norm();
    return Vec2(std::acos(std::clamp(q(2) / r, -1.0, 1.0)), std::atan2(q(1), q(0)));
  };
  ch.coords_jacobian = [](const VecX& q) {
    const double rho2 = q(0) * q(0) + q(1) * q(1), rho = std::sqrt(rho2);
    MatX J(2, 3);
    J << q(2) * q(0) / rho, q(2) * q(1) / rho, -rho,
         -q(1) / rho2, q(0) / rho2, 0.0;
    return J;
  };
  ch.depth = [](const Vec2& p) { return std::min(p.x(), pi - p.x()) / (pi / 2); };
  ch.unwrap = [](const Vec2& p, const Vec2& ref) -> Vec2 {
    return {p.x(), p.y() + two_pi<double> * std::round((ref.y() - p.y()) / two_pi<double>)};
  };
  return ch;
}

ManifoldPtr make_sphere() {
  auto m = std::make_shared<Manifold>();
  m->name = "sphere2";
  m->ambient_dim = 3;
  m->charts = {stereographic(true), stereographic(false), band()};
  m->distance = [](const VecX& a, const VecX& b) { return (a - b).norm(); };
  m->normalize = [](const VecX& q) -> VecX { return q / q.norm(); };
  return m;
}

// chart index -> trivialization type on the sphere (0 = north, 1 = south)
constexpr int kSphereTriv[3] = {0, 1, 0};

VecX sphere_point(double theta, double phi) {
  VecX q(3);
  q << std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta);
  return q;
}

TorusAction translate_action(std::string name, int rank) {
  TorusAction a;
  a.name = std::move(name);
  a.rank = rank;
  a.flow = [rank](const VecX& s, double t, const VecX& q) -> VecX {
    VecX out = q;
    out.head(rank) += t * s.head(rank);
    return out;
  };
  a.flow_jacobian = [](const VecX&, double, const VecX&) { return identity(2); };
  a.field = [rank](const VecX& s, const VecX&) -> VecX {
    VecX v = VecX::Zero(2);
    v.head(rank) = s.head(rank);
    return v;
  };
  return a;
}

Eigen::Matrix3d rotation_z(double angle) {
  Eigen::Matrix3d R;
  R << std::cos(angle), -std::sin(angle), 0, std::sin(angle), std::cos(angle), 0, 0, 0, 1;
  return R;
}

TorusAction rotate_action() {
  TorusAction a;
  a.name = "rotate-z";
  a.rank = 1;
  a.flow = [](const VecX& s, double t, const VecX& q) -> VecX { return rotation_z(two_pi<double> * s(0) * t) * q; };
  a.flow_jacobian = [](const VecX& s, double t, const VecX&) -> MatX { return rotation_z(two_pi<double> * s(0) * t); };
  a.field = [](const VecX& s, const VecX& q) -> VecX {
    VecX v(3);
    v << -q(1), q(0), 0.0;
    return two_pi<double> * s(0) * v;
  };
  a.fixed_points = {sphere_point(0.0, 0.0), sphere_point(pi, 0.0)};
  a.hamiltonian = true;
  return a;
}

TorusAction trivial_action() {
  TorusAction a;
  a.name = "trivial";
  a.rank = 1;
  a.flow = [](const VecX&, double, const VecX& q) { return q; };
  a.flow_jacobian = [](const VecX&, double, const VecX& q) { return identity(static_cast<int>(q.size())); };
  a.field = [](const VecX&, const VecX& q) { return VecX::Zero(q.size()).eval(); };
  // Every point is fixed; these are the declared witnesses.
  a.fixed_points = {sphere_point(0.0, 0.0), sphere_point(pi, 0.0), sphere_point(pi / 2, 0.0),
                    sphere_point(pi / 2, pi / 2), sphere_point(1.0, 0.4)};
  a.acts_trivially = true;
  a.hamiltonian = true;
  return a;
}

AmbientCovector constant_covector(const VecX& c) {
  const int n = static_cast<int>(c.size());
  return {[c](const VecX&) { return c; }, [n](const VecX&) { return MatX::Zero(n, n).eval(); }};
}

MatX antisym3(double xy, double xz, double yz) {
  MatX W(3, 3);
  W << 0, xy, xz, -xy, 0, yz, -xz, -yz, 0;
  return W;
}

MatX antisym2(double xy) {
  MatX W(2, 2);
  W << 0, xy, -xy, 0;
  return W;
}

std::shared_ptr<ManifoldScenario> torus_base(std::string name, const QuadratureSettings& quad) {
  auto sc = std::make_shared<ManifoldScenario>();
  sc->name = std::move(name);
  sc->manifold = make_torus();
  sc->quadrature = quad;
  sc->betti1 = 2;
  VecX ex(2), ey(2);
  ex << 1, 0;
  ey << 0, 1;
  sc->h1_basis = {OneForm::from_ambient(sc->manifold, constant_covector(ex)),
                  OneForm::from_ambient(sc->manifold, constant_covector(ey))};
  const TorusAction shifts = translate_action("translate2", 2);
  VecX x0(2), y0(2);
  x0 << 0.2, 0.35;
  y0 << 0.35, 0.2;
  PathSpec cx = flow_loop(*sc->manifold, shifts, ex, x0), cy = flow_loop(*sc->manifold, shifts, ey, y0);
  cx.homology = Eigen::Vector2i(1, 0);
  cy.homology = Eigen::Vector2i(0, 1);
  sc->h1_cycles = {cx, cy};
  sc->two_cycles = {{"fundamental", {{0, Vec2(0, 0), Vec2(1, 1), true, true}}, 1}};
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) {
      VecX q(2);
      q << (i + 0.31) / 7.0, (j + 0.73) / 7.0;
      sc->sample_points.push_back(q);
    }
  sc->base_point = VecX(2);
  sc->base_point << 0.3, 0.7;
  return sc;
}

std::shared_ptr<ManifoldScenario> sphere_base(std::string name, const QuadratureSettings& quad) {
  auto sc = std::make_shared<ManifoldScenario>();
  sc->name = std::move(name);
  sc->manifold = make_sphere();
  sc->quadrature = quad;
  sc->betti1 = 0;
  sc->two_cycles = {{"fundamental", {{2, Vec2(0, -pi), Vec2(pi, pi), false, true}}, 1}};
  const int n = 64;
  const double golden = pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / n;
    sc->sample_points.push_back(sphere_point(std::acos(z), golden * i));
  }
  sc->sample_points.push_back(sphere_point(0.05, 0.3));
  sc->sample_points.push_back(sphere_point(pi - 0.05, 2.0));
  sc->base_point = sphere_point(1.0, 0.4);
  return sc;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace

std::vector<std::string> scenario_ids() {
  return {"torus2-translate", "torus2-diag", "sphere2-rotate", "sphere2-trivial"};
}

ScenarioPtr scenario(std::string_view id, const QuadratureSettings& quadrature) {
  if (id == "torus2-translate") {
    auto sc = torus_base("torus2-translate", quadrature);
    sc->action = translate_action("translate-x", 1);
    return sc;
  }
  if (id == "torus2-diag") {
    auto sc = torus_base("torus2-diag", quadrature);
    sc->action = translate_action("translate-xy", 2);
    return sc;
  }
  if (id == "sphere2-rotate") {
    auto sc = sphere_base("sphere2-rotate", quadrature);
    sc->action = rotate_action();
    return sc;
  }
  if (id == "sphere2-trivial") {
    auto sc = sphere_base("sphere2-trivial", quadrature);
    sc->action = trivial_action();
    return sc;
  }
  throw DomainError("unknown scenario '" + std::string(id) + "'");
}

bool is_torus(const ManifoldScenario& sc) { return sc.manifold->name == "torus2"; }
bool is_sphere(const ManifoldScenario& sc) { return sc.manifold->name == "sphere2"; }

BundlePtr bundle(const ScenarioPtr& sc, int degree) {
  auto b = std::make_shared<LineBundleData>();
  b->scenario = sc;
  b->degree = degree;
  b->descriptor = {{"scenario", sc->name}, {"degree", degree}};
  if (is_torus(*sc)) {
    if (degree != 0) throw PreconditionError("torus scenarios carry only topologically trivial bundles");
    b->transition = [](int, int, const VecX&) { return Complex(1.0); };
  } else {
    b->transition = [degree](int i, int j, const VecX& q) {
      const int ti = kSphereTriv[i], tj = kSphereTriv[j];
      if (ti == tj) return Complex(1.0);
      const double phi = std::atan2(q(1), q(0));
      // psi_N = z^k psi_S
      return std::polar(1.0, (ti == 0 ? 1.0 : -1.0) * degree * phi);
    };
  }
  return b;
}

nlohmann::json to_json(const ConnectionParams& p) {
  return {{"flat_a", p.flat_a}, {"flat_b", p.flat_b}, {"beta", p.beta}, {"twist", p.twist}, {"wobble", p.wobble}};
}

ConnectionParams connection_params_from_json(const nlohmann::json& j) {
  ConnectionParams p;
  p.flat_a = j.value("flat_a", 0.0);
  p.flat_b = j.value("flat_b", 0.0);
  p.beta = j.value("beta", 0.0);
  p.twist = j.value("twist", 0.0);
  p.wobble = j.value("wobble", 0.0);
  return p;
}

ConnectionData connection(const BundlePtr& bundle, const ConnectionParams& params) {
  const ScenarioPtr& sc = bundle->scenario;
  nlohmann::json desc = {{"bundle", bundle->descriptor}, {"params", to_json(params)}};
  if (is_torus(*sc)) {
    if (params.beta != 0.0 && sc->action.rank == 2)
      throw PreconditionError("beta perturbation makes the curvature non-invariant under torus2-diag");
    const double a = params.flat_a, b = params.flat_b, beta = params.beta, w = params.wobble;
    AmbientCovector A{
        [=](const VecX& q) -> VecX {
          const double c = std::cos(two_pi<double> * (q(0) + q(1)));
          VecX v(2);
          v << two_pi<double> * a + beta * std::sin(two_pi<double> * q(1)) + two_pi<double> * w * c,
               two_pi<double> * b + two_pi<double> * w * c;
          return v;
        },
        [=](const VecX& q) { return antisym2(-two_pi<double> * beta * std::cos(two_pi<double> * q(1))); }};
    return {bundle, OneForm::from_ambient(sc->manifold, A, true), desc};
  }
  if (params.flat_a != 0.0 || params.flat_b != 0.0 || params.beta != 0.0)
    throw PreconditionError("flat shifts are torus-only connection parameters");
  const double k = bundle->degree, eps = params.twist, w = params.wobble;
  auto local = [=](bool north) {
    const double sz = north ? 1.0 : -1.0;
    // north: -(k/2)(-y, x, 0)/(1+z); south: (k/2)(-y, x, 0)/(1-z)
    return AmbientCovector{
        [=](const VecX& q) -> VecX {
          const double f = -sz * (k / 2) / (1.0 + sz * q(2));
          VecX v(3);
          v << -q(1) * f - eps * q(1) + w, q(0) * f + eps * q(0), 0.0;
          return v;
        },
        [=](const VecX& q) {
          const double den = 1.0 + sz * q(2);
          return antisym3(-sz * k / den + 2 * eps, (k / 2) * q(1) / (den * den),
                          -(k / 2) * q(0) / (den * den));
        }};
  };
  std::vector<AmbientCovector> per_chart;
  for (int c = 0; c < 3; ++c) per_chart.push_back(local(kSphereTriv[c] == 0));
  return {bundle, OneForm::from_ambient_per_chart(sc->manifold, per_chart, true), desc};
}

MomentMapData moment_map(const BundlePtr& bundle, const ConnectionParams& params, const VecX& offsets) {
  const ScenarioPtr& sc = bundle->scenario;
  const int rank = sc->action.rank;
  if (offsets.size() != rank) throw PreconditionError("moment_map: one offset per lattice generator");
  MomentMapData mu;
  mu.scenario = sc;
  mu.descriptor = {{"bundle", bundle->descriptor}, {"params", to_json(params)},
                   {"offsets", std::vector<double>(offsets.data(), offsets.data() + rank)}};
  if (sc->name == "torus2-translate") {
    const double beta = params.beta, c = offsets(0);
    mu.components = {[=](const VecX& q) { return beta * std::sin(two_pi<double> * q(1)) / two_pi<double> + c; }};
  } else if (sc->name == "torus2-diag") {
    for (int j = 0; j < rank; ++j) mu.components.push_back([c = offsets(j)](const VecX&) { return c; });
  } else if (sc->name == "sphere2-rotate") {
    const double k = bundle->degree, eps = params.twist, c = offsets(0);
    mu.components = {[=](const VecX& q) {
      return (k / 2) * (1.0 + q(2)) + eps * (q(0) * q(0) + q(1) * q(1)) + c;
    }};
  } else {
    mu.components = {[c = offsets(0)](const VecX&) { return c; }};
  }
  return mu;
}

MomentMapData moment_map(const BundlePtr& bundle, const ConnectionParams& params) {
  return moment_map(bundle, params, VecX::Zero(bundle->scenario->action.rank));
}

OneForm invariant_one_form(const ScenarioPtr& sc, double amplitude) {
  if (sc->name == "torus2-translate") {
    return OneForm::from_ambient(
        sc->manifold,
        {[amplitude](const VecX& q) -> VecX {
           VecX v(2);
           v << amplitude * std::cos(two_pi<double> * q(1)), amplitude * (0.3 + std::sin(two_pi<double> * q(1)));
           return v;
         },
         [amplitude](const VecX& q) { return antisym2(two_pi<double> * amplitude * std::sin(two_pi<double> * q(1))); }});
  }
  if (sc->name == "torus2-diag") {
    VecX c(2);
    c << amplitude, 0.5 * amplitude;
    return OneForm::from_ambient(sc->manifold, constant_covector(c));
  }
  return OneForm::from_ambient(sc->manifold,
                               {[amplitude](const VecX& q) -> VecX {
                                  VecX v(3);
                                  v << -amplitude * q(1), amplitude * q(0), 0.0;
                                  return v;
                                },
                                [amplitude](const VecX&) { return antisym3(2 * amplitude, 0, 0); }});
}

TwoForm area_form(const ScenarioPtr& sc) {
  if (is_torus(*sc)) return TwoForm::from_ambient(sc->manifold, [](const VecX&) { return antisym2(1.0); });
  return TwoForm::from_ambient(sc->manifold, [](const VecX& q) { return antisym3(q(2), -q(1), q(0)); });
}

OneForm h1_shift(const ManifoldScenario& sc, const VecX& t) {
  if (t.size() != sc.betti1) throw PreconditionError("h1_shift: need one coefficient per H^1 generator");
  OneForm out = OneForm::zero(sc.manifold, true);
  for (int j = 0; j < sc.betti1; ++j) {
    OneForm h = sc.h1_basis[j];
    h.imaginary = true;
    out = out + (two_pi<double> * t(j)) * h;
  }
  return out;
}

VecX random_point(const ManifoldScenario& sc, std::mt19937_64& rng) {
  if (is_torus(sc)) {
    VecX q(2);
    q << uniform(rng, 0, 1), uniform(rng, 0, 1);
    return q;
  }
  std::normal_distribution<double> n(0.0, 1.0);
  VecX q(3);
  q << n(rng), n(rng), n(rng);
  return q / q.norm();
}

GaugeTransform random_gauge(const ScenarioPtr& sc, std::mt19937_64& rng) {
  if (is_torus(*sc)) {
    const int m = uniform_int(rng, -2, 2), n = uniform_int(rng, -2, 2);
    struct Mode { Vec2 k; double amp, phase; };
    std::vector<Mode> modes;
    for (int i = 0; i < 2; ++i)
      modes.push_back({Vec2(uniform_int(rng, -2, 2), uniform_int(rng, -2, 2)), uniform(rng, -0.5, 0.5),
                       uniform(rng, 0, two_pi<double>)});
    auto phase = [=](const VecX& q) {
      double chi = two_pi<double> * (m * q(0) + n * q(1));
      for (const auto& md : modes) chi += md.amp * std::sin(two_pi<double> * md.k.dot(q.head<2>()) + md.phase);
      return chi;
    };
    auto grad = [=](const VecX& q) -> VecX {
      Vec2 g = two_pi<double> * Vec2(m, n);
      for (const auto& md : modes)
        g += md.amp * std::cos(two_pi<double> * md.k.dot(q.head<2>()) + md.phase) * two_pi<double> * md.k;
      return g;
    };
    return {sc->manifold, phase, grad, {{"kind", "torus-random"}, {"winding", {m, n}}}};
  }
  Eigen::Vector3d c;
  Eigen::Matrix3d S;
  for (int i = 0; i < 3; ++i) c(i) = uniform(rng, -1, 1);
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) S(i, j) = S(j, i) = uniform(rng, -0.5, 0.5);
  return {sc->manifold,
          [=](const VecX& q) { return c.dot(q) + q.dot(S * q); },
          [=](const VecX& q) -> VecX { return c + 2.0 * S * q; },
          {{"kind", "sphere-random"}}};
}

OneForm random_closed_form(const ScenarioPtr& sc, std::mt19937_64& rng, VecX* h1_part) {
  GaugeTransform g = random_gauge(sc, rng);
  VecX t = VecX::Zero(sc->betti1);
  for (int j = 0; j < sc->betti1; ++j) t(j) = uniform(rng, -1, 1);
  const auto grad = g.phase_gradient;
  std::function<VecX(const VecX&)> exact = grad;
  if (is_torus(*sc)) {
    // drop the winding so the exact part has zero periods
    const int m = g.descriptor["winding"][0], n = g.descriptor["winding"][1];
    exact = [grad, m, n](const VecX& q) -> VecX { return grad(q) - two_pi<double> * Vec2(m, n); };
  }
  const int dim = sc->manifold->ambient_dim;
  OneForm eta = OneForm::from_ambient(sc->manifold, {exact, [dim](const VecX&) { return MatX::Zero(dim, dim).eval(); }}, true);
  if (sc->betti1 > 0) eta = eta + h1_shift(*sc, t);
  if (h1_part) *h1_part = t;
  return eta;
}

ConnectionParams random_connection_params(const ManifoldScenario& sc, std::mt19937_64& rng) {
  ConnectionParams p;
  if (is_torus(sc)) {
    p.flat_a = uniform(rng, -1, 1);
    p.flat_b = uniform(rng, -1, 1);
    if (sc.action.rank == 1) p.beta = uniform(rng, -0.5, 0.5);
    p.wobble = uniform(rng, -0.2, 0.2);
  } else {
    p.twist = uniform(rng, -0.3, 0.3);
    p.wobble = uniform(rng, -0.5, 0.5);
  }
  return p;
}

VecX random_lattice_vector(int rank, std::mt19937_64& rng, int bound) {
  VecX v = VecX::Zero(rank);
  while (v.isZero())
    for (int j = 0; j < rank; ++j) v(j) = uniform_int(rng, -bound, bound);
  return v;
}

}  // namespace eqlift::catalog
