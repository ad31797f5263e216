#pragma once

#include "eqlift/transport.hpp"

#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace eqlift::catalog {

/// The four catalog scenarios.
std::vector<std::string> scenario_ids();
ScenarioPtr scenario(std::string_view id, const QuadratureSettings& quadrature = {});

bool is_torus(const ManifoldScenario& sc);
bool is_sphere(const ManifoldScenario& sc);

/// Degree-k bundle: clutching z^k on the sphere, trivial (k = 0 only) on the torus.
BundlePtr bundle(const ScenarioPtr& sc, int degree);

/// Catalog connection parameters.
/// torus:  A = i (2 pi a dx + 2 pi b dy + beta sin(2 pi y) dx + wobble d sin(2 pi (x + y)))
/// sphere: A = standard O(k) + i twist (x dy - y dx) + i wobble dx   (ambient coordinates)
struct ConnectionParams {
  double flat_a = 0.0;
  double flat_b = 0.0;
  double beta = 0.0;
  double twist = 0.0;
  double wobble = 0.0;
};

nlohmann::json to_json(const ConnectionParams& p);
ConnectionParams connection_params_from_json(const nlohmann::json& j);

ConnectionData connection(const BundlePtr& bundle, const ConnectionParams& params = {});

/// Moment map partnering the curvature of `connection(bundle, params)`.
/// Sphere rotation: mu = (k/2)(1 + z) + twist (x^2 + y^2), so mu(south) = 0 and mu(north) = k.
MomentMapData moment_map(const BundlePtr& bundle, const ConnectionParams& params, const VecX& offsets);
MomentMapData moment_map(const BundlePtr& bundle, const ConnectionParams& params = {});

/// Invariant 1-form used for Cartan-exactness checks (real coefficients).
/// torus: h(y) dx + h2(y) dy; sphere: x dy - y dx.
OneForm invariant_one_form(const ScenarioPtr& sc, double amplitude);

/// Sphere area form restricted from R^3 (period 4 pi), or dx^dy on the torus (period 1).
TwoForm area_form(const ScenarioPtr& sc);

/// H^1 shift 2 pi i sum_j t_j h_j.
OneForm h1_shift(const ManifoldScenario& sc, const VecX& t);

// random generators for property tests
VecX random_point(const ManifoldScenario& sc, std::mt19937_64& rng);
GaugeTransform random_gauge(const ScenarioPtr& sc, std::mt19937_64& rng);
/// Closed imaginary 1-form: h1 shift plus an exact part.
OneForm random_closed_form(const ScenarioPtr& sc, std::mt19937_64& rng, VecX* h1_part = nullptr);
ConnectionParams random_connection_params(const ManifoldScenario& sc, std::mt19937_64& rng);
VecX random_lattice_vector(int rank, std::mt19937_64& rng, int bound = 2);

}  // namespace eqlift::catalog
