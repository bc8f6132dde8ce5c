#include "ccc/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ccc/errors.hpp"

namespace ccc {

namespace {

void check_sizes(const SampleFunction& f, const SampleFunction& g,
                 const WeightedSpace& space) {
    if (f.size() != space.size() || g.size() != space.size())
        throw ValidationError("gauge: sample functions have " +
                              std::to_string(f.size()) + "/" +
                              std::to_string(g.size()) +
                              " values for a space of size " +
                              std::to_string(space.size()));
}

struct ModularEval {
    double value;       // exact value, or a lower bound when saturated
    bool saturated;     // some phi_check argument fell beyond its table
    double worst_arg;   // largest phi_check argument encountered
};

/// Evaluate the modular, extending phi_check past its table by the linear
/// continuation with the terminal slope. Convexity makes that a lower
/// bound, so "value > 1" stays conclusive even when saturated.
ModularEval modular_eval(const std::vector<double>& s,
                         const std::vector<double>& w, double t,
                         const TabulatedMonotone& phi) {
    ModularEval out{0.0, false, 0.0};
    const double top = phi.x_max();
    const double end_slope = phi.slopes().back();
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double a = s[i] / t;
        out.worst_arg = std::max(out.worst_arg, a);
        if (a <= top) {
            out.value += w[i] * phi.eval(a, 0);
        } else {
            out.saturated = true;
            out.value += w[i] * (phi.v_max() + end_slope * (a - top));
        }
    }
    return out;
}

/// psi_hat of the positive-weight differences, and those weights.
void gather(const SampleFunction& f, const SampleFunction& g,
            const Factorization& fact, const WeightedSpace& space,
            std::vector<double>& s, std::vector<double>& w) {
    const double top = fact.psi_hat.x_max();
    for (std::size_t i = 0; i < space.size(); ++i) {
        if (!(space.weight(i) > 0.0)) continue;
        const double d = std::abs(f[i] - g[i]);
        if (d > top * (1.0 + 1e-12))
            throw ValidationError(
                "gauge: |f-g| = " + std::to_string(d) + " at index " +
                std::to_string(i) + " exceeds the tabulated range r_max=" +
                std::to_string(top) +
                "; rebuild the factorization with a larger r_max");
        if (d > 0.0) {
            s.push_back(fact.psi_hat.eval(std::min(d, top), 0));
            w.push_back(space.weight(i));
        }
    }
}

[[noreturn]] void throw_phi_overflow(double worst, const TabulatedMonotone& phi) {
    throw NumericError(
        "gauge: phi_check argument " + std::to_string(worst) +
        " exceeds its tabulated range " + std::to_string(phi.x_max()) +
        " and the linear bound cannot classify the probe; rebuild the "
        "factorization with a larger r_max");
}

}  // namespace

double modular(const SampleFunction& f, const SampleFunction& g, double t,
               const Factorization& fact, const WeightedSpace& space) {
    check_sizes(f, g, space);
    if (!(t > 0.0))
        throw ValidationError("gauge: modular parameter t must be positive");
    std::vector<double> s, w;
    gather(f, g, fact, space, s, w);
    const ModularEval ev = modular_eval(s, w, t, fact.phi_check);
    if (ev.saturated) throw_phi_overflow(ev.worst_arg, fact.phi_check);
    return ev.value;
}

GaugeResult orlicz_distance(const SampleFunction& f, const SampleFunction& g,
                            const Factorization& fact,
                            const WeightedSpace& space, double tol) {
    check_sizes(f, g, space);
    if (!(tol > 0.0 && tol < 1.0))
        throw ValidationError("gauge: tol must lie in (0, 1)");
    std::vector<double> s, w;
    gather(f, g, fact, space, s, w);
    if (s.empty()) return GaugeResult{0.0, 0.0, 0, 0.0, 0.0};

    const TabulatedMonotone& phi = fact.phi_check;
    const double s_max = *std::max_element(s.begin(), s.end());
    const double mass = space.total_mass();

    // Below t_sat some phi_check argument leaves the table and only the
    // linear lower bound is available; at and above t_sat every evaluation
    // is exact. A lower-bound probe is conclusive only when it exceeds 1.
    const double t_sat = s_max / phi.x_max();

    // An inconclusive probe below t_sat is decided at the boundary: a value
    // above 1 there pins the infimum into exact territory, anything else
    // means the infimum itself needs the table extended.
    auto saturation_floor = [&]() {
        const ModularEval at_sat = modular_eval(s, w, t_sat, phi);
        if (at_sat.value > 1.0) return t_sat;
        throw_phi_overflow(s_max / t_sat, phi);
    };

    // Start where the per-point bound caps the modular at 1; if phi_check
    // never reaches 1/mass, fall back to doubling. Keep doubling past
    // saturated probes: they cannot certify an upper endpoint.
    const double per_point = std::min(std::max(1.0, 1.0 / mass), phi.v_max());
    double hi = s_max / phi.inverse(per_point);
    ModularEval at_hi = modular_eval(s, w, hi, phi);
    int doublings = 0;
    while (at_hi.value > 1.0 || at_hi.saturated) {
        if (++doublings > 200)
            throw NumericError("gauge: modular stays above 1 after 200 "
                               "doublings of t");
        hi *= 2.0;
        at_hi = modular_eval(s, w, hi, phi);
    }

    // Walk the lower endpoint down until the modular exceeds 1.
    double lo = 0.5 * hi;
    int halvings = 0;
    while (true) {
        const ModularEval at_lo = modular_eval(s, w, lo, phi);
        if (at_lo.value > 1.0) break;
        if (at_lo.saturated) {
            lo = saturation_floor();
            break;
        }
        hi = lo;
        at_hi = at_lo;
        lo *= 0.5;
        if (++halvings > 1100)
            throw NumericError(
                "gauge: modular never exceeds 1; distance underflows");
    }

    int iters = 0;
    while (hi - lo > tol * hi) {
        const double mid = 0.5 * (lo + hi);
        const ModularEval at_mid = modular_eval(s, w, mid, phi);
        if (at_mid.value > 1.0) {
            lo = mid;
        } else if (!at_mid.saturated) {
            hi = mid;
            at_hi = at_mid;
        } else {
            lo = std::max(lo, saturation_floor());
        }
        if (++iters > 5000)
            throw NumericError("gauge: bisection failed to converge");
    }
    return GaugeResult{hi, at_hi.value, iters, lo, hi};
}

double orlicz_distance_concave(const SampleFunction& f,
                               const SampleFunction& g, const ScaleSpec& theta,
                               const WeightedSpace& space) {
    check_sizes(f, g, space);
    double d_max = 0.0;
    for (std::size_t i = 0; i < space.size(); ++i)
        if (space.weight(i) > 0.0)
            d_max = std::max(d_max, std::abs(f[i] - g[i]));
    if (d_max == 0.0) return 0.0;
    if (d_max > theta.domain_cap())
        throw ValidationError(
            "gauge: |f-g| = " + std::to_string(d_max) +
            " exceeds the domain cap of '" + theta.label() + "'");

    for (const double t : geometric_grid(d_max * 1e-6, d_max, 256)) {
        const double d2 = theta.eval(t, 2);
        if (d2 > 1e-8 * (1.0 + theta.eval(t, 1) / t))
            throw ValidationError("gauge: '" + theta.label() +
                                  "' is not concave (theta''=" +
                                  std::to_string(d2) + " at r=" +
                                  std::to_string(t) + ")");
    }

    double acc = 0.0;
    for (std::size_t i = 0; i < space.size(); ++i)
        if (space.weight(i) > 0.0)
            acc += space.weight(i) * theta.eval(std::abs(f[i] - g[i]), 0);
    return acc;
}

std::vector<ScaleSpec> jensen_outer_catalog() {
    // 2^r - 1 tabulated on [0, 16] with exact derivatives; 1 is a grid node,
    // so the unit fixed point holds exactly.
    const int n = 1025;
    std::vector<double> x(n), v(n), d1(n), d2(n);
    const double ln2 = std::log(2.0);
    for (int k = 0; k < n; ++k) {
        x[k] = 16.0 * k / (n - 1);
        const double p = std::exp2(x[k]);
        v[k] = p - 1.0;
        d1[k] = ln2 * p;
        d2[k] = ln2 * ln2 * p;
    }
    auto table = std::make_shared<const TabulatedMonotone>(
        std::move(x), std::move(v), std::move(d1), std::move(d2));
    std::vector<ScaleSpec> out;
    out.push_back(ScaleSpec::power(2.0));
    out.push_back(ScaleSpec::power(3.0));
    out.push_back(ScaleSpec::tabulated(std::move(table), "pow2_minus_one"));
    return out;
}

void require_unit_fixed_point(const ScaleSpec& spec) {
    const double v = spec.eval(1.0, 0);
    if (std::abs(v - 1.0) > 1e-12)
        throw ValidationError("outer function '" + spec.label() +
                              "' must fix 1; got " + std::to_string(v));
}

}  // namespace ccc
