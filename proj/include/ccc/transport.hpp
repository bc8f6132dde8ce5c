#ifndef CCC_TRANSPORT_HPP
#define CCC_TRANSPORT_HPP

#include <cstddef>
#include <utility>
#include <vector>

#include "ccc/factorization.hpp"
#include "ccc/spaces.hpp"

namespace ccc {

/// Exact solver for the balanced transportation problem
///   min sum_ij q_ij c_ij,  q >= 0, row sums mu, column sums nu,
/// by the transportation simplex on the bipartite spanning-tree basis.
/// Marginals are fixed at construction; solve() may be called repeatedly
/// with different costs and then warm-starts from the previous basis.
///
/// Deterministic pivoting: entering arc is the most negative reduced cost
/// (lowest index on ties), switching to Bland's rule during degenerate
/// stretches; leaving arc is the lowest-index minimizer of the cycle flow.
class TransportSolver {
public:
    TransportSolver(std::vector<double> mu, std::vector<double> nu);

    struct Solution {
        /// Row-major n*m optimal flows.
        const std::vector<double>& flow;
        double cost;
        /// max(0, u_i + v_j - c_ij) over all arcs, relative to max(1, |c|).
        double certificate;
        int pivots;
    };

    Solution solve(const std::vector<double>& cost_row_major);

    std::size_t rows() const { return n_; }
    std::size_t cols() const { return m_; }

private:
    std::size_t n_, m_;
    std::vector<double> mu_, nu_;
    std::vector<double> flow_;
    std::vector<char> basic_;
    bool has_basis_ = false;
    double cost_ = 0.0, certificate_ = 0.0;
    int pivots_ = 0;

    std::vector<double> u_, v_;
    std::vector<std::vector<std::pair<int, int>>> adj_;  // node -> (node, arc)

    void northwest_init();
    void build_adjacency();
    bool compute_duals(const std::vector<double>& c);
};

struct OTResult {
    TransportPlan plan;
    double cost;
    double certificate;
};

/// One-shot optimal transport with explicit costs (finite, row-major n*m).
OTResult solve_ot(const std::vector<double>& cost_row_major,
                  const DiscreteMeasure& mu, const DiscreteMeasure& nu);

struct TransportModularResult {
    double value;
    TransportPlan plan;
};

/// min over couplings q of sum_ij q_ij phi_check(psi_hat(d_ij)/t).
/// Distances beyond the psi_hat table fail validation; phi_check arguments
/// beyond its table are handled by the convex linear lower bound and cause
/// a NumericError if the optimal plan touches such an arc.
TransportModularResult transport_modular(const DiscreteMeasure& mu,
                                         const DiscreteMeasure& nu,
                                         const FiniteMetricSpace& space,
                                         double t, const Factorization& fact);

struct WassersteinResult {
    double distance;
    /// Plan computed at t = distance.
    TransportPlan optimal_plan;
    /// Transport modular at t = distance (of optimal_plan).
    double transport_modular_at_w;
    /// Number of transportation problems solved along the way.
    int lp_solves;
    double bracket_lo;
    double bracket_hi;
    /// Plan at the upper bracket endpoint; its modular there is <= 1.
    TransportPlan plan_at_bracket_hi;
};

/// Wasserstein distance inf{t > 0 : transport modular at t <= 1}, by outer
/// bisection over t with one exact transport solve per probe. The bracket
/// is narrowed to one eighth of the requested relative tolerance and the
/// midpoint reported, so the modular at the reported distance stays within
/// 1 + tol. Identical measures short-circuit to distance 0 with the
/// diagonal plan.
WassersteinResult wasserstein_distance(const DiscreteMeasure& mu,
                                       const DiscreteMeasure& nu,
                                       const FiniteMetricSpace& space,
                                       const Factorization& fact,
                                       double tol = 1e-6);

/// (distance <= 1, min coupling cost of theta(d) <= 1). The two agree for
/// any scale function away from the boundary case W = 1.
std::pair<bool, bool> check_unit_ball_equivalence(const DiscreteMeasure& mu,
                                                  const DiscreteMeasure& nu,
                                                  const FiniteMetricSpace& space,
                                                  const ScaleSpec& theta,
                                                  const Factorization& fact,
                                                  double tol = 1e-6);

/// The coupling at the final upper bracket endpoint of the bisection.
TransportPlan optimal_coupling(const DiscreteMeasure& mu,
                               const DiscreteMeasure& nu,
                               const FiniteMetricSpace& space,
                               const Factorization& fact, double tol = 1e-6);

}  // namespace ccc

#endif
