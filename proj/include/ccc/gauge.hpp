#ifndef CCC_GAUGE_HPP
#define CCC_GAUGE_HPP

#include <vector>

#include "ccc/factorization.hpp"
#include "ccc/spaces.hpp"

namespace ccc {

struct GaugeResult {
    /// Upper endpoint of the final bisection bracket; the infimum lies in
    /// [bracket_lo, distance].
    double distance;
    /// Modular evaluated at `distance` (always <= 1 there).
    double modular_at_t;
    int bisection_iterations;
    double bracket_lo;
    double bracket_hi;
};

/// The modular sum_i mu_i phi_check(psi_hat(|f_i - g_i|) / t).
/// Points of zero weight are skipped entirely, so they neither contribute
/// nor constrain the tabulated range. Differences beyond the psi_hat table
/// are a ValidationError (rebuild the factorization with a larger r_max);
/// a phi_check argument beyond its table is a NumericError.
double modular(const SampleFunction& f, const SampleFunction& g, double t,
               const Factorization& fact, const WeightedSpace& space);

/// Gauge distance inf{t > 0 : modular(f, g, t) <= 1}, located by bracketing
/// and bisection on t. The reported distance is the upper endpoint of a
/// bracket of relative width tol, so modular(distance) <= 1 always holds.
/// Probes beyond the phi_check table are resolved with a convex linear
/// lower bound when that suffices to classify the probe, and fail with a
/// NumericError otherwise.
GaugeResult orlicz_distance(const SampleFunction& f, const SampleFunction& g,
                            const Factorization& fact,
                            const WeightedSpace& space, double tol = 1e-9);

/// Closed form for concave theta: the distance degenerates to the weighted
/// sum of theta(|f_i - g_i|). Concavity of theta is probed on a geometric
/// grid up to the largest difference; failure is a ValidationError.
double orlicz_distance_concave(const SampleFunction& f,
                               const SampleFunction& g, const ScaleSpec& theta,
                               const WeightedSpace& space);

/// Outer functions used by the composition-comparison tests: r^2, r^3 and
/// a tabulation of 2^r - 1. Each fixes 1 (value 1 at argument 1).
std::vector<ScaleSpec> jensen_outer_catalog();

/// Check spec(1) == 1 to 1e-12, the normalization the comparison relies on.
void require_unit_fixed_point(const ScaleSpec& spec);

}  // namespace ccc

#endif
