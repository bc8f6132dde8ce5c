#ifndef CCC_FACTORIZATION_HPP
#define CCC_FACTORIZATION_HPP

#include <vector>

#include "ccc/monotone_table.hpp"
#include "ccc/scale.hpp"

namespace ccc {

/// Result of the invariant sweep run after construction.
/// Violations are relative; `ok` applies the documented thresholds
/// (1e-8 for concavity/convexity of the factors, 1e-6 for reproducing
/// theta by composition at nodes and interval midpoints).
struct FactorizationCheck {
    double max_concavity_violation = 0.0;
    double max_convexity_violation = 0.0;
    double max_composition_rel_error = 0.0;
    bool ok = false;
};

/// Minimal splitting theta = phi_check o psi_hat with psi_hat concave and
/// phi_check convex. psi_hat absorbs exactly the concave part of theta:
/// it is built so that log psi_hat' accumulates only the negative part of
/// theta''/theta'. The pair is normalized so that a concave theta factors
/// as (identity, theta); in general the convention fixes psi_hat' = 1 on
/// the region where theta is convex.
struct Factorization {
    TabulatedMonotone psi_hat;
    TabulatedMonotone phi_check;
    /// phi_check^{-1}(1), NaN when phi_check stays below 1 on its table.
    double phi_check_inv_at_1;
    ScaleSpec source;
    FactorizationCheck check;

    /// Tabulated-scale views of the factors (share a copy of the tables).
    ScaleSpec psi_spec() const;
    ScaleSpec phi_spec() const;

    /// The equivalent pair (phi_check(lambda .), psi_hat / lambda).
    /// Gauge and transport distances are invariant under this change.
    Factorization rescaled(double lambda) const;
};

/// Compute the minimal factorization of `theta` on [0, r_max], tabulated at
/// `grid_points` geometrically spaced nodes (plus the node 0). r_max must
/// not exceed the domain cap of `theta`.
///
/// Throws ValidationError for non-increasing theta or bad parameters, and
/// NumericError when the defining integral diverges near 0 or overflows.
Factorization minimal_factorization(const ScaleSpec& theta,
                                    int grid_points = 2048,
                                    double r_max = 10.0);

/// Pointwise defect of the factorization identity
///   theta''/theta' = (phi''/phi')(psi) psi' + psi''/psi'
/// evaluated on `grid`. A zero or non-finite derivative at a grid point is a
/// NumericError naming the location.
struct ResidualReport {
    std::vector<double> grid;
    std::vector<double> residuals;
    double sup = 0.0;
    /// Grid point attaining `sup`.
    double at_t = 0.0;
};
ResidualReport verify_factorization(const ScaleSpec& theta,
                                    const ScaleSpec& phi, const ScaleSpec& psi,
                                    const std::vector<double>& grid);

/// Compare a candidate concave inner factor against the computed minimal
/// one. At each grid point the gap is
///   (-psi_hat''/psi_hat') - (-candidate''/candidate').
/// Any admissible inner factor bends at least as much as the minimal one,
/// so max_gap <= tol certifies minimality of psi_hat. Preconditions checked
/// on the grid: candidate strictly increasing and concave, and the induced
/// outer factor theta o candidate^{-1} convex.
struct MinimalityReport {
    std::vector<double> grid;
    std::vector<double> gap;
    double max_gap = 0.0;
};
MinimalityReport minimality_gap(const ScaleSpec& candidate_psi,
                                const Factorization& fact,
                                const std::vector<double>& grid);

/// Post-compose the convex factor with a strictly increasing convex
/// function, keeping the concave factor unchanged. The result splits
/// outer o theta, but in general it is not the minimal factorization of
/// that composite; it is the pair comparison bounds must share the inner
/// factor with. Nodes whose phi_check value exceeds the domain cap of
/// `outer` are dropped from both tables.
Factorization compose_outer(const ScaleSpec& outer, const Factorization& fact);

/// n geometrically spaced points in [from, to], endpoints included.
std::vector<double> geometric_grid(double from, double to, int n);

}  // namespace ccc

#endif
