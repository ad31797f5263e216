#include "eqlift/catalog.hpp"
#include "eqlift/cartan.hpp"
#include "eqlift/errors.hpp"
#include "eqlift/numerics.hpp"

#include <doctest.h>

#include <algorithm>

using namespace eqlift;
using numerics::two_pi;

namespace {

struct Pair {
  BundlePtr bundle;
  ConnectionData conn;
  EquivariantTwoForm eq2;
};

Pair catalog_pair(const std::string& id, int degree, const catalog::ConnectionParams& p = {},
                  VecX offsets = VecX()) {
  auto sc = catalog::scenario(id);
  auto b = catalog::bundle(sc, degree);
  auto conn = catalog::connection(b, p);
  if (offsets.size() == 0) offsets = VecX::Zero(sc->action.rank);
  return {b, conn, {curvature(conn), catalog::moment_map(b, p, offsets)}};
}

}  // namespace

TEST_CASE("catalog pairs satisfy the moment equation") {
  std::mt19937_64 rng(31);
  for (const auto& id : catalog::scenario_ids()) {
    CAPTURE(id);
    auto sc = catalog::scenario(id);
    for (int i = 0; i < 3; ++i) {
      auto p = catalog::random_connection_params(*sc, rng);
      const auto pr = catalog_pair(id, catalog::is_sphere(*sc) ? i + 1 : 0, p);
      const ResidualReport r = check_moment_equation(pr.eq2, sc->action, sc->sample_points);
      CHECK(r.pass);
      CHECK(r.residual < 1e-6);
      CHECK(r.samples >= 50);
      CHECK(r.to_json()["pass"] == true);
    }
  }
}

TEST_CASE("a non-equivariant perturbation shows up in the residual") {
  auto sc = catalog::scenario("sphere2-rotate");
  auto pr = catalog_pair("sphere2-rotate", 1);
  MomentMapData bump;
  bump.components = {[](const VecX& q) { return 0.1 * q(2) * q(2); }};
  pr.eq2.mu = pr.eq2.mu + bump;
  const ResidualReport r = check_moment_equation(pr.eq2, sc->action, sc->sample_points);
  // the residual is then |d(0.1 z^2)| in the coordinate frame
  double expected = 0.0;
  const Manifold& m = *sc->manifold;
  for (const VecX& q : sc->sample_points)
    for (const auto& ch : m.charts) {
      const Vec2 p = ch.coords(q);
      if (!p.allFinite() || ch.depth(p) <= 0.05) continue;
      const MatX J = ch.embed_jacobian(p);
      for (int k = 0; k < 2; ++k) expected = std::max(expected, std::abs(0.2 * q(2) * J(2, k)));
    }
  CHECK_FALSE(r.pass);
  CHECK(r.residual == doctest::Approx(expected).epsilon(1e-6));
  CHECK(r.residual > 0.05);
}

TEST_CASE("moment equation preconditions") {
  auto sc = catalog::scenario("sphere2-rotate");
  const auto pr = catalog_pair("sphere2-rotate", 1);
  std::vector<VecX> few(sc->sample_points.begin(), sc->sample_points.begin() + 9);
  CHECK_THROWS_AS(check_moment_equation(pr.eq2, sc->action, few), PreconditionError);
  EquivariantTwoForm real = pr.eq2;
  real.alpha = catalog::area_form(sc);
  CHECK_THROWS_AS(check_moment_equation(real, sc->action, sc->sample_points), PreconditionError);
  EquivariantTwoForm wrong = pr.eq2;
  wrong.mu.components.push_back(wrong.mu.components[0]);
  CHECK_THROWS_AS(check_moment_equation(wrong, sc->action, sc->sample_points), PreconditionError);
}

TEST_CASE("the Cartan differential of an invariant form is equivariantly closed and exact") {
  std::mt19937_64 rng(32);
  for (const auto& id : catalog::scenario_ids()) {
    CAPTURE(id);
    const auto pr = catalog_pair(id, id.rfind("sphere", 0) == 0 ? 2 : 0,
                                 catalog::random_connection_params(*catalog::scenario(id), rng));
    const ScenarioPtr sc = pr.bundle->scenario;
    OneForm eta = catalog::invariant_one_form(sc, 0.6);
    eta.imaginary = true;
    const EquivariantTwoForm d = cartan_differential(eta, *sc);
    // d_g(d_g eta) = 0 in degree 3 amounts to the moment equation for (d eta, mu)
    CHECK(check_moment_equation(d, sc->action, sc->sample_points).residual < 1e-6);
    for (const auto& cyc : sc->two_cycles)
      CHECK(std::abs(integrate_two_form(d.alpha, cyc, sc->quadrature.surface_grid)) < 1e-9);

    const EquivariantTwoForm sum = add_exact(pr.eq2, eta, *sc);
    CHECK(check_moment_equation(sum, sc->action, sc->sample_points).residual < 1e-6);
    const auto before = restrict_class(pr.eq2, *sc), after = restrict_class(sum, *sc);
    for (std::size_t i = 0; i < before.periods.size(); ++i)
      CHECK(after.periods[i] == doctest::Approx(before.periods[i]).epsilon(1e-9));
    CHECK(alpha_invariance_residual(sum.alpha, sc->action, sc->sample_points) < 1e-8);
  }
  auto sphere = catalog::scenario("sphere2-rotate");
  CHECK_THROWS_AS(cartan_differential(catalog::invariant_one_form(sphere, 1.0), *sphere), PreconditionError);
}

TEST_CASE("sphere cartan differential of the rotation form") {
  auto sc = catalog::scenario("sphere2-rotate");
  OneForm eta = catalog::invariant_one_form(sc, 1.0);  // x dy - y dx
  eta.imaginary = true;
  const EquivariantTwoForm d = cartan_differential(eta, *sc);
  // eta(X) = 2 pi (x^2 + y^2)
  for (const VecX& q : sc->sample_points)
    CHECK(d.mu.component(0, q) == doctest::Approx(q(0) * q(0) + q(1) * q(1)).epsilon(1e-10));
}

TEST_CASE("restricted class periods") {
  for (int k = -1; k <= 3; ++k) {
    const auto pr = catalog_pair("sphere2-rotate", k);
    const ClassPeriods c = restrict_class(pr.eq2, *pr.bundle->scenario);
    REQUIRE(c.periods.size() == 1);
    CHECK(c.periods[0] == doctest::Approx(k).epsilon(1e-10));
  }
  const auto t = catalog_pair("torus2-translate", 0, catalog::ConnectionParams{0, 0, 0.5, 0, 0});
  CHECK(std::abs(restrict_class(t.eq2, *t.bundle->scenario).periods[0]) < 1e-10);
}

TEST_CASE("integrality certificates") {
  const auto o1 = catalog_pair("sphere2-rotate", 1);
  auto sc = o1.bundle->scenario;
  const IntegralityReport r = check_integrality(o1.eq2, sc->action, *o1.bundle);
  CHECK(r.pass);
  CHECK(r.certificate == "fixed-point");
  REQUIRE(r.fixed_values.size() == 2);
  std::vector<double> vals{r.fixed_values[0].value, r.fixed_values[1].value};
  std::sort(vals.begin(), vals.end());
  CHECK(vals[0] == doctest::Approx(0.0));
  CHECK(vals[1] == doctest::Approx(1.0));
  CHECK(r.to_json()["note"].get<std::string>().find("sufficient") != std::string::npos);

  VecX half(1);
  half << 0.5;
  const auto h = catalog_pair("sphere2-rotate", 1, {}, half);
  const IntegralityReport rh = check_integrality(h.eq2, sc->action, *h.bundle);
  CHECK_FALSE(rh.pass);
  CHECK(rh.certificate == "none");
  CHECK(rh.offenders.size() == 2);
  CHECK(rh.worst_residual == doctest::Approx(0.5));

  // period disagreeing with the bundle degree
  const auto o2 = catalog_pair("sphere2-rotate", 2);
  const IntegralityReport rd = check_integrality(o2.eq2, sc->action, *o1.bundle);
  CHECK_FALSE(rd.pass);

  const auto tt = catalog_pair("torus2-translate", 0, catalog::ConnectionParams{0.2, 0.1, 0.3, 0, 0.1});
  const IntegralityReport rt = check_integrality(tt.eq2, tt.bundle->scenario->action, *tt.bundle);
  CHECK(rt.pass);
  CHECK(rt.certificate == "trivial-class");

  VecX point3(1);
  point3 << 0.3;
  const auto tr = catalog_pair("sphere2-trivial", 1, {}, point3);
  const auto trs = tr.bundle->scenario;
  const IntegralityReport rtr = check_integrality(tr.eq2, trs->action, *tr.bundle);
  CHECK_FALSE(rtr.pass);
  CHECK(rtr.offenders.size() == trs->action.fixed_points.size());
}

TEST_CASE("curvature invariance") {
  auto diag = catalog::scenario("torus2-diag");
  const TwoForm bumpy = TwoForm::from_ambient(diag->manifold, [](const VecX& q) {
    MatX B = MatX::Zero(2, 2);
    B(0, 1) = std::sin(two_pi<double> * q(0));
    B(1, 0) = -B(0, 1);
    return B;
  });
  CHECK(alpha_invariance_residual(bumpy, diag->action, diag->sample_points) > 0.5);
  const auto pr = catalog_pair("sphere2-rotate", 2, catalog::ConnectionParams{0, 0, 0, 0.3, 0.2});
  CHECK(alpha_invariance_residual(pr.eq2.alpha, pr.bundle->scenario->action, pr.bundle->scenario->sample_points) < 1e-8);
}

TEST_CASE("moment map arithmetic") {
  const auto pr = catalog_pair("torus2-diag", 0);
  VecX c(2);
  c << 0.25, -1.0;
  const MomentMapData a = pr.eq2.mu.shifted(c);
  const MomentMapData s = 2.0 * a + a;
  VecX q(2);
  q << 0.1, 0.2;
  CHECK(s.component(0, q) == doctest::Approx(0.75));
  CHECK(s.component(1, q) == doctest::Approx(-3.0));
  const auto sp = catalog_pair("sphere2-rotate", 1);
  CHECK_THROWS_AS(a + sp.eq2.mu, PreconditionError);
}
