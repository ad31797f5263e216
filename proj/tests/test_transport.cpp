#include "eqlift/catalog.hpp"
#include "eqlift/errors.hpp"
#include "eqlift/numerics.hpp"

#include <doctest.h>

#include <numbers>

using namespace eqlift;
using numerics::two_pi;
constexpr double pi = std::numbers::pi;

namespace {

VecX sphere_point(double theta, double phi) {
  VecX q(3);
  q << std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta);
  return q;
}

PathSpec latitude(double theta) { return chart_line(2, Vec2(theta, -pi), Vec2(theta, pi)); }

double dist(Complex a, Complex b) { return std::abs(a - b); }

}  // namespace

TEST_CASE("transport examples on the torus") {
  auto sc = catalog::scenario("torus2-translate");
  const auto b = catalog::bundle(sc, 0);
  const PathSpec loop = orbit_loop(*sc, VecX::Ones(1), sc->base_point);
  CHECK(dist(parallel_transport(catalog::connection(b), loop), 1.0) < 1e-14);

  catalog::ConnectionParams p;
  p.flat_a = 0.25;
  CHECK(dist(parallel_transport(catalog::connection(b, p), loop), std::polar(1.0, -pi / 2)) < 1e-12);
  PathSpec back = loop;
  back.orientation = -1;
  CHECK(dist(parallel_transport(catalog::connection(b, p), back), std::polar(1.0, pi / 2)) < 1e-12);

  // transport along an open path composes
  const auto conn = catalog::connection(b, catalog::ConnectionParams{0.1, 0.3, 0.5, 0.0, 0.2});
  const Vec2 a(0.2, 0.2), m(0.4, 0.3), e(0.7, 0.6);
  const Complex whole = parallel_transport(conn, chart_line(0, a, e), 512);
  PathSpec two = chart_line(0, a, m);
  two.segments.push_back(chart_line(0, m, e).segments[0]);
  // piecewise path with a kink: compare against the two halves
  const Complex halves = parallel_transport(conn, chart_line(0, a, m)) * parallel_transport(conn, chart_line(0, m, e));
  CHECK(dist(parallel_transport(conn, two), halves) < 1e-12);
  CHECK(std::abs(std::abs(whole) - 1.0) < 1e-14);
  CHECK(dist(parallel_transport(conn, PathSpec{}), 1.0) == 0.0);
}

TEST_CASE("latitude holonomy of O(k)") {
  auto sc = catalog::scenario("sphere2-rotate");
  for (int k : {-2, -1, 1, 2, 3}) {
    const auto conn = catalog::connection(catalog::bundle(sc, k));
    for (double theta : {0.3, 0.8, 1.2, pi / 2, 2.0, 2.6}) {
      CAPTURE(k);
      CAPTURE(theta);
      const Complex expected = std::polar(1.0, pi * k * (1.0 - std::cos(theta)));
      CHECK(dist(parallel_transport(conn, latitude(theta), 512), expected) < 1e-10);
      CHECK(dist(orbit_holonomy(conn, sc->action, VecX::Ones(1), sphere_point(theta, 0.7)), expected) < 1e-8);
    }
  }
  const auto o1 = catalog::connection(catalog::bundle(sc, 1));
  CHECK(dist(parallel_transport(o1, latitude(pi / 2), 512), -1.0) < 1e-12);
}

TEST_CASE("closed-loop holonomy is gauge invariant and independent of chart switches") {
  std::mt19937_64 rng(21);
  for (const auto& id : catalog::scenario_ids()) {
    CAPTURE(id);
    auto sc = catalog::scenario(id);
    if (sc->action.acts_trivially) continue;
    const auto conn = catalog::connection(catalog::bundle(sc, catalog::is_sphere(*sc) ? 2 : 0),
                                          catalog::random_connection_params(*sc, rng));
    for (int i = 0; i < 20; ++i) {
      const VecX x = catalog::random_point(*sc, rng);
      const VecX g = catalog::random_lattice_vector(sc->action.rank, rng);
      if (g.isZero()) continue;
      const Complex h0 = orbit_holonomy(conn, sc->action, g, x);
      CHECK(dist(orbit_holonomy(apply_gauge(conn, catalog::random_gauge(sc, rng)), sc->action, g, x), h0) < 1e-7);
      CHECK(dist(orbit_holonomy(conn, sc->action, g, x, 13, 0.37), h0) < 1e-7);
      CHECK(dist(orbit_holonomy(conn, sc->action, g, x, 29, 0.81), h0) < 1e-7);
    }
  }
}

TEST_CASE("monodromy formula agrees with the lifted flow") {
  std::mt19937_64 rng(22);
  for (const auto& id : catalog::scenario_ids()) {
    CAPTURE(id);
    auto sc = catalog::scenario(id);
    catalog::ConnectionParams p = catalog::random_connection_params(*sc, rng);
    const auto b = catalog::bundle(sc, catalog::is_sphere(*sc) ? 1 : 0);
    const auto conn = catalog::connection(b, p);
    const auto mu = catalog::moment_map(b, p);
    for (int i = 0; i < 4; ++i) {
      VecX x = catalog::random_point(*sc, rng);
      if (catalog::is_sphere(*sc)) x = sphere_point(0.4 + 0.6 * i, 0.3 * i);
      VecX g = VecX::Zero(sc->action.rank);
      g(i % sc->action.rank) = 1;
      const auto f = monodromy_formula(conn, mu, sc->action, g, x);
      const auto o = monodromy_ode(conn, mu, sc->action, g, x, 512);
      CHECK(o.method == MonodromyMethod::ode);
      CHECK(dist(f.phase, o.phase) < 1e-7);
      CHECK(dist(f.phase, f.holonomy_part * f.moment_part) < 1e-14);
    }
  }
}

TEST_CASE("monodromy is constant in x and obeys the shift law") {
  std::mt19937_64 rng(23);
  auto sc = catalog::scenario("sphere2-rotate");
  catalog::ConnectionParams p;
  p.twist = 0.15;
  p.wobble = 0.05;
  const auto b = catalog::bundle(sc, 2);
  const auto conn = catalog::connection(b, p);
  const auto mu = catalog::moment_map(b, p);
  const VecX one = VecX::Ones(1);
  const Complex m0 = monodromy_formula(conn, mu, sc->action, one, sc->base_point).phase;
  CHECK(dist(m0, 1.0) < 1e-8);
  for (int i = 0; i < 20; ++i) {
    const VecX x = sphere_point(0.1 + 0.14 * i, 0.5 * i);
    CHECK(dist(monodromy_formula(conn, mu, sc->action, one, x).phase, m0) < 1e-8);
  }
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 20; ++i) {
    VecX c(1);
    c << u(rng);
    const Complex shifted = monodromy_formula(conn, mu.shifted(c), sc->action, one, sc->base_point).phase;
    CHECK(dist(shifted, m0 * std::polar(1.0, two_pi<double> * c(0))) < 1e-10);
  }
  CHECK_THROWS_AS(mu.shifted(VecX::Ones(2)), PreconditionError);
  CHECK_THROWS_AS(mu.pairing(sc->base_point, VecX::Ones(2)), PreconditionError);
}

TEST_CASE("moment maps are orbit invariant") {
  for (const auto& id : catalog::scenario_ids()) {
    auto sc = catalog::scenario(id);
    catalog::ConnectionParams p;
    if (id == "torus2-translate") p.beta = 0.4;
    if (id == "sphere2-rotate") p.twist = 0.3;
    const auto mu = catalog::moment_map(catalog::bundle(sc, catalog::is_sphere(*sc) ? 1 : 0), p);
    CHECK(moment_orbit_residual(mu, sc->action, sc->sample_points) < 1e-12);
  }
}

TEST_CASE("too few ODE steps raise AccuracyError") {
  auto sc = catalog::scenario("sphere2-rotate");
  catalog::ConnectionParams p;
  p.twist = 0.4;
  const auto b = catalog::bundle(sc, 3);
  const auto conn = catalog::connection(b, p);
  CHECK_THROWS_AS(monodromy_ode(conn, catalog::moment_map(b, p), sc->action, VecX::Ones(1), sc->base_point, 4),
                  AccuracyError);
  CHECK_THROWS_AS(integrate_lifted_flow(conn, catalog::moment_map(b, p), sc->action, VecX::Ones(1),
                                        {sc->manifold->locate(sc->base_point), 1.0}, 1.0, 0),
                  PreconditionError);
}

TEST_CASE("fibre coordinates change by the transition functions") {
  auto sc = catalog::scenario("sphere2-rotate");
  const auto b = catalog::bundle(sc, 2);
  const VecX q = sphere_point(1.3, 0.9);
  const FiberPoint y{sc->manifold->in_chart(q, 0), Complex(0.3, -0.4)};
  const FiberPoint s = express_in(*b, y, 1);
  CHECK(s.base.chart == 1);
  CHECK(std::abs(std::abs(s.value) - 0.5) < 1e-14);
  CHECK(dist(s.value, std::polar(1.0, -2 * 0.9) * y.value) < 1e-12);
  const FiberPoint back = express_in(*b, s, 0);
  CHECK(dist(back.value, y.value) < 1e-14);
  CHECK((back.base.coords - y.base.coords).norm() < 1e-12);
}
