#include "ccc/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ccc/errors.hpp"

namespace ccc {

namespace {

constexpr int kRefine = 8;       // log-space subintervals per coarse interval
constexpr int kHeadNodes = 32;   // extension intervals below the first node
constexpr double kHeadDecades = 3.0;
constexpr double kGaussOffset = 0.57735026918962576;  // 1/sqrt(3)
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) { return std::to_string(v); }

/// min(theta'', 0) / theta'. This is the density of log psi_hat'; it
/// vanishes wherever theta is convex and is continuous across inflections.
double neg_curvature_ratio(const ScaleSpec& theta, double y) {
    const double d1 = theta.eval(y, 1);
    if (!(d1 > 0.0) || !std::isfinite(d1))
        throw ValidationError("minimal_factorization: '" + theta.label() +
                              "' must be strictly increasing; derivative is " +
                              fmt(d1) + " at r=" + fmt(y));
    const double d2 = theta.eval(y, 2);
    if (!std::isfinite(d2))
        throw ValidationError("minimal_factorization: '" + theta.label() +
                              "' has non-finite second derivative at r=" +
                              fmt(y));
    return std::min(d2, 0.0) / d1;
}

/// Two-point Gauss rule for int min(theta'',0)/theta' dz over [yl, yr],
/// taken in the substitution u = log z.
double log_gauss_segment(const ScaleSpec& theta, double yl, double yr) {
    const double ul = std::log(yl), ur = std::log(yr);
    const double half = 0.5 * (ur - ul), mid = 0.5 * (ur + ul);
    double acc = 0.0;
    for (const double s : {-kGaussOffset, kGaussOffset}) {
        const double y = std::exp(mid + s * half);
        acc += half * neg_curvature_ratio(theta, y) * y;
    }
    return acc;
}

struct CheckInputs {
    const TabulatedMonotone& psi;
    const TabulatedMonotone& phi;
    const ScaleSpec& theta;
};

/// Monotonicity sweep of the stored node derivatives (nonincreasing for
/// the concave factor, nondecreasing for the convex one) plus fidelity of
/// the composition at nodes and geometric interval midpoints. Node 0 is
/// skipped: its slope is a finite-difference stand-in for a generally
/// singular derivative.
FactorizationCheck run_check(const CheckInputs& in) {
    FactorizationCheck out;
    auto slope_trend = [](const TabulatedMonotone& t, bool expect_decreasing) {
        const auto& m = t.slopes();
        double worst = 0.0;
        for (std::size_t k = 1; k + 1 < m.size(); ++k) {
            const double jump =
                expect_decreasing ? m[k + 1] - m[k] : m[k] - m[k + 1];
            worst = std::max(worst, jump / std::max(m[k], m[k + 1]));
        }
        return worst;
    };
    out.max_concavity_violation = slope_trend(in.psi, true);
    out.max_convexity_violation = slope_trend(in.phi, false);

    const auto& x = in.psi.grid();
    double worst = 0.0;
    auto probe = [&](double r) {
        const double target = in.theta.eval(r, 0);
        const double got = in.phi.eval(std::min(in.psi.eval(r, 0), in.phi.x_max()), 0);
        worst = std::max(worst,
                         std::abs(got - target) / std::max(target, 1e-300));
    };
    for (std::size_t k = 1; k < x.size(); ++k) {
        probe(x[k]);
        if (k + 1 < x.size()) probe(std::sqrt(x[k] * x[k + 1]));
    }
    out.max_composition_rel_error = worst;
    out.ok = out.max_concavity_violation <= 1e-8 &&
             out.max_convexity_violation <= 1e-8 &&
             out.max_composition_rel_error <= 1e-6;
    return out;
}

}  // namespace

Factorization minimal_factorization(const ScaleSpec& theta, int grid_points,
                                    double r_max) {
    if (grid_points < 8)
        throw ValidationError(
            "minimal_factorization: grid_points must be at least 8");
    if (!(r_max > 0.0) || !std::isfinite(r_max))
        throw ValidationError("minimal_factorization: r_max must be positive");
    if (r_max > theta.domain_cap() * (1.0 + 1e-12))
        throw ValidationError("minimal_factorization: r_max=" + fmt(r_max) +
                              " exceeds the domain cap " +
                              fmt(theta.domain_cap()) + " of '" +
                              theta.label() + "'");

    const int N = grid_points;
    // Reference point for the inner integral; psi_hat' == 1 there before
    // normalization. Use 1 when it lies inside [0, r_max].
    const double ref = r_max >= 1.0 ? 1.0 : r_max;
    double lo = r_max * 1e-6;
    if (lo > ref) lo = ref;

    // Coarse geometric grid with the reference spliced in as an exact node.
    std::vector<double> coarse(N);
    const double lr = std::log(r_max / lo);
    for (int j = 0; j < N; ++j)
        coarse[j] = lo * std::exp(lr * j / (N - 1));
    coarse[0] = lo;
    coarse[N - 1] = r_max;
    int j_ref = 0;
    if (ref == lo) {
        j_ref = 0;
    } else if (ref == r_max) {
        j_ref = N - 1;
    } else {
        const double t = std::log(ref / lo) / lr * (N - 1);
        j_ref = std::clamp(static_cast<int>(std::lround(t)), 1, N - 2);
        coarse[j_ref] = ref;
        if (!(coarse[j_ref - 1] < ref && ref < coarse[j_ref + 1]))
            throw NumericError(
                "minimal_factorization: grid too coarse to place the "
                "reference node");
    }

    // Refined evaluation nodes: a geometric head below the grid plus 8
    // log-space subdivisions of every coarse interval.
    const std::size_t M =
        kHeadNodes + static_cast<std::size_t>(N - 1) * kRefine + 1;
    std::vector<double> ry(M);
    for (int i = 0; i < kHeadNodes; ++i)
        ry[i] = lo * std::pow(10.0, -kHeadDecades * (kHeadNodes - i) /
                                        kHeadNodes);
    std::size_t idx = kHeadNodes;
    for (int j = 0; j + 1 < N; ++j) {
        const double step = std::log(coarse[j + 1] / coarse[j]) / kRefine;
        for (int s = 0; s < kRefine; ++s)
            ry[idx++] = s == 0 ? coarse[j] : coarse[j] * std::exp(step * s);
    }
    ry[idx] = coarse[N - 1];
    const auto refined_of = [&](int j) {
        return static_cast<std::size_t>(kHeadNodes) +
               static_cast<std::size_t>(j) * kRefine;
    };
    const std::size_t ref_idx = refined_of(j_ref);

    // Cumulative inner integral I(y) = int_ref^y min(theta'',0)/theta' dz,
    // anchored exactly at the reference node.
    std::vector<double> I(M);
    I[ref_idx] = 0.0;
    for (std::size_t k = ref_idx; k + 1 < M; ++k)
        I[k + 1] = I[k] + log_gauss_segment(theta, ry[k], ry[k + 1]);
    for (std::size_t k = ref_idx; k > 0; --k)
        I[k - 1] = I[k] - log_gauss_segment(theta, ry[k - 1], ry[k]);
    for (double v : I)
        if (std::abs(v) > 700.0)
            throw NumericError(
                "minimal_factorization: inner integral exceeds 700 in "
                "magnitude; psi_hat' overflows for '" + theta.label() + "'");

    // Outer integral of E = exp(I). Each interval is integrated with the
    // local power-law model F = E*y ~ y^a, which is exact when theta is a
    // pure power; the mass below the head is the extrapolated tail F0/a0.
    std::vector<double> F(M);
    for (std::size_t k = 0; k < M; ++k) F[k] = std::exp(I[k]) * ry[k];
    const double du0 = std::log(ry[1] / ry[0]);
    const double a0 = std::log(F[1] / F[0]) / du0;
    if (a0 <= 1e-3)
        throw NumericError(
            "minimal_factorization: integral of psi_hat' diverges near 0 "
            "(local exponent " + fmt(a0 - 1.0) + "); '" + theta.label() +
            "' is not factorizable at this resolution");
    std::vector<double> Psi(M);
    Psi[0] = F[0] / a0;
    for (std::size_t k = 0; k + 1 < M; ++k) {
        const double du = std::log(ry[k + 1] / ry[k]);
        const double la = std::log(F[k + 1] / F[k]);
        const double a = la / du;
        const double piece =
            std::abs(a) > 1e-9 ? (F[k + 1] - F[k]) / a : F[k] * du;
        Psi[k + 1] = Psi[k] + piece;
    }

    // Coarse tables with analytic slopes and curvatures. E = psi_hat',
    // phi_check' = theta'/E along the graph; node 0 entries are singular in
    // general and left to finite-difference estimation.
    std::vector<double> px(N + 1), pv(N + 1), pm(N + 1), pc(N + 1);
    std::vector<double> fx(N + 1), fv(N + 1), fm(N + 1), fc(N + 1);
    px[0] = pv[0] = fx[0] = fv[0] = 0.0;
    pm[0] = pc[0] = fm[0] = fc[0] = kNaN;
    for (int j = 0; j < N; ++j) {
        const double x = coarse[j];
        const double E = std::exp(I[refined_of(j)]);
        const double g = neg_curvature_ratio(theta, x);
        const double th1 = theta.eval(x, 1);
        const double th2 = theta.eval(x, 2);
        px[j + 1] = x;
        pv[j + 1] = Psi[refined_of(j)];
        pm[j + 1] = E;
        pc[j + 1] = E * g;
        fx[j + 1] = pv[j + 1];
        fv[j + 1] = theta.eval(x, 0);
        fm[j + 1] = th1 / E;
        fc[j + 1] = (th2 - th1 * g) / (E * E);
    }

    TabulatedMonotone psi(std::move(px), std::move(pv), std::move(pm),
                          std::move(pc));
    TabulatedMonotone phi(std::move(fx), std::move(fv), std::move(fm),
                          std::move(fc));

    // Normalization: when phi_check came out linear (theta concave on the
    // whole range up to quadrature noise), rescale so the pair becomes
    // (identity, theta).
    {
        const double c = phi.v_max() / phi.x_max();
        double dev = 0.0;
        const auto& s = phi.grid();
        const auto& v = phi.values();
        for (std::size_t k = 0; k < s.size(); ++k)
            dev = std::max(dev, std::abs(v[k] - c * s[k]));
        if (dev <= 1e-6 * phi.v_max()) {
            psi = psi.scaled_values(c);
            phi = phi.compressed_domain(1.0 / c);
        }
    }

    Factorization out{std::move(psi), std::move(phi), kNaN, theta, {}};
    out.check = run_check({out.psi_hat, out.phi_check, theta});
    if (out.phi_check.v_max() >= 1.0)
        out.phi_check_inv_at_1 = out.phi_check.inverse(1.0);
    return out;
}

ScaleSpec Factorization::psi_spec() const {
    return ScaleSpec::tabulated(
        std::make_shared<const TabulatedMonotone>(psi_hat),
        "psi_hat[" + source.label() + "]");
}

ScaleSpec Factorization::phi_spec() const {
    return ScaleSpec::tabulated(
        std::make_shared<const TabulatedMonotone>(phi_check),
        "phi_check[" + source.label() + "]");
}

Factorization Factorization::rescaled(double lambda) const {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw ValidationError("Factorization::rescaled: scale must be positive");
    Factorization out{psi_hat.scaled_values(1.0 / lambda),
                      phi_check.compressed_domain(lambda),
                      phi_check_inv_at_1 / lambda, source, check};
    return out;
}

Factorization compose_outer(const ScaleSpec& outer, const Factorization& fact) {
    const TabulatedMonotone& psi = fact.psi_hat;
    const TabulatedMonotone& phi = fact.phi_check;
    const double cap = outer.domain_cap();

    // Keep the leading block of nodes whose phi_check value the outer
    // function can accept.
    std::size_t keep = phi.size();
    while (keep > 0 && phi.values()[keep - 1] > cap) --keep;
    if (keep < 9)
        throw ValidationError(
            "compose_outer: domain cap " + fmt(cap) + " of '" + outer.label() +
            "' leaves fewer than 9 usable nodes of the convex factor");

    std::vector<double> lx(phi.grid().begin(), phi.grid().begin() + keep);
    std::vector<double> lv(keep), lm(keep, kNaN), lc(keep, kNaN);
    lv[0] = 0.0;
    for (std::size_t j = 1; j < keep; ++j) {
        const double v = phi.values()[j];
        const double d1 = outer.eval(v, 1);
        const double d2 = outer.eval(v, 2);
        if (!(d1 > 0.0) || !std::isfinite(d1))
            throw ValidationError(
                "compose_outer: '" + outer.label() +
                "' must be strictly increasing; derivative is " + fmt(d1) +
                " at " + fmt(v));
        if (d2 < -1e-8 * (1.0 + d1) || !std::isfinite(d2))
            throw ValidationError("compose_outer: '" + outer.label() +
                                  "' is not convex at " + fmt(v));
        const double m = phi.slopes()[j];
        const double c =
            phi.has_curvatures() ? phi.curvatures()[j] : phi.eval(lx[j], 2);
        lv[j] = outer.eval(v, 0);
        lm[j] = d1 * m;
        lc[j] = d2 * m * m + d1 * c;
    }
    TabulatedMonotone lifted(std::move(lx), std::move(lv), std::move(lm),
                             std::move(lc));

    TabulatedMonotone inner = psi;
    if (keep < psi.size()) {
        std::vector<double> ix(psi.grid().begin(), psi.grid().begin() + keep);
        std::vector<double> iv(psi.values().begin(),
                               psi.values().begin() + keep);
        std::vector<double> im(psi.slopes().begin(),
                               psi.slopes().begin() + keep);
        std::vector<double> ic;
        if (psi.has_curvatures())
            ic.assign(psi.curvatures().begin(),
                      psi.curvatures().begin() + keep);
        inner = TabulatedMonotone(std::move(ix), std::move(iv), std::move(im),
                                  std::move(ic));
    }

    Factorization out{std::move(inner), std::move(lifted), kNaN,
                      ScaleSpec::composed(outer, fact.source), {}};
    out.check = run_check({out.psi_hat, out.phi_check, out.source});
    if (out.phi_check.v_max() >= 1.0)
        out.phi_check_inv_at_1 = out.phi_check.inverse(1.0);
    return out;
}

ResidualReport verify_factorization(const ScaleSpec& theta,
                                    const ScaleSpec& phi, const ScaleSpec& psi,
                                    const std::vector<double>& grid) {
    if (grid.empty())
        throw ValidationError("verify_factorization: empty grid");
    ResidualReport rep;
    rep.grid = grid;
    rep.residuals.reserve(grid.size());
    rep.sup = -1.0;
    for (const double t : grid) {
        if (!(t > 0.0))
            throw ValidationError(
                "verify_factorization: grid points must be positive, got " +
                fmt(t));
        const double th1 = theta.eval(t, 1), th2 = theta.eval(t, 2);
        const double ps0 = psi.eval(t, 0), ps1 = psi.eval(t, 1),
                     ps2 = psi.eval(t, 2);
        if (!(th1 > 0.0) || !std::isfinite(th1) || !std::isfinite(th2))
            throw NumericError(
                "verify_factorization: degenerate theta derivative at t=" +
                fmt(t));
        if (!(ps1 > 0.0) || !std::isfinite(ps1) || !std::isfinite(ps2))
            throw NumericError(
                "verify_factorization: degenerate psi derivative at t=" +
                fmt(t));
        const double ph1 = phi.eval(ps0, 1), ph2 = phi.eval(ps0, 2);
        if (!(ph1 > 0.0) || !std::isfinite(ph1) || !std::isfinite(ph2))
            throw NumericError(
                "verify_factorization: degenerate phi derivative at psi(t)=" +
                fmt(ps0));
        const double r = th2 / th1 - (ph2 / ph1) * ps1 - ps2 / ps1;
        rep.residuals.push_back(r);
        if (std::abs(r) > rep.sup) {
            rep.sup = std::abs(r);
            rep.at_t = t;
        }
    }
    return rep;
}

MinimalityReport minimality_gap(const ScaleSpec& candidate_psi,
                                const Factorization& fact,
                                const std::vector<double>& grid) {
    if (grid.empty())
        throw ValidationError("minimality_gap: empty grid");
    MinimalityReport rep;
    rep.grid = grid;
    rep.gap.reserve(grid.size());
    rep.max_gap = -std::numeric_limits<double>::infinity();
    const ScaleSpec& theta = fact.source;
    for (const double t : grid) {
        if (!(t > 0.0))
            throw ValidationError(
                "minimality_gap: grid points must be positive, got " + fmt(t));
        const double c1 = candidate_psi.eval(t, 1);
        const double c2 = candidate_psi.eval(t, 2);
        if (!(c1 > 0.0) || !std::isfinite(c1))
            throw ValidationError(
                "minimality_gap: candidate must be strictly increasing; "
                "derivative is " + fmt(c1) + " at t=" + fmt(t));
        if (!std::isfinite(c2))
            throw ValidationError(
                "minimality_gap: candidate has non-finite curvature at t=" +
                fmt(t));
        if (c2 > 1e-8 * (1.0 + c1 / t))
            throw ValidationError("minimality_gap: candidate is not concave "
                                  "at t=" + fmt(t));
        const double th1 = theta.eval(t, 1), th2 = theta.eval(t, 2);
        // Convexity of theta o candidate^{-1} along the graph.
        const double h = th2 * c1 - th1 * c2;
        if (h < -1e-8 * (std::abs(th2 * c1) + std::abs(th1 * c2) + 1.0))
            throw ValidationError(
                "minimality_gap: induced outer factor is not convex at t=" +
                fmt(t));
        const double p1 = fact.psi_hat.eval(t, 1);
        const double p2 = fact.psi_hat.eval(t, 2);
        if (!(p1 > 0.0))
            throw NumericError(
                "minimality_gap: psi_hat derivative vanishes at t=" + fmt(t));
        const double gap = (-p2 / p1) - (-c2 / c1);
        rep.gap.push_back(gap);
        rep.max_gap = std::max(rep.max_gap, gap);
    }
    return rep;
}

std::vector<double> geometric_grid(double from, double to, int n) {
    if (!(from > 0.0) || !(to > from))
        throw ValidationError("geometric_grid: need 0 < from < to");
    if (n < 2) throw ValidationError("geometric_grid: need at least 2 points");
    std::vector<double> g(n);
    const double lr = std::log(to / from);
    for (int k = 0; k < n; ++k) g[k] = from * std::exp(lr * k / (n - 1));
    g[0] = from;
    g[n - 1] = to;
    return g;
}

}  // namespace ccc
