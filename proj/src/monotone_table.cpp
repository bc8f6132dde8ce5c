#include "ccc/monotone_table.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ccc/errors.hpp"

namespace ccc {

namespace {

constexpr double kRelSlack = 1e-12;

[[noreturn]] void fail_validation(const std::string& what) {
    throw ValidationError("TabulatedMonotone: " + what);
}

}  // namespace

TabulatedMonotone::TabulatedMonotone(std::vector<double> grid,
                                     std::vector<double> values,
                                     std::vector<double> slopes,
                                     std::vector<double> curvatures)
    : x_(std::move(grid)), y_(std::move(values)), d2_(std::move(curvatures)) {
    if (x_.size() < 2) fail_validation("need at least two nodes");
    if (y_.size() != x_.size()) fail_validation("grid/values size mismatch");
    if (!slopes.empty() && slopes.size() != x_.size())
        fail_validation("slopes size mismatch");
    if (!d2_.empty() && d2_.size() != x_.size())
        fail_validation("curvatures size mismatch");
    if (x_.front() != 0.0) fail_validation("grid must start at 0");
    if (y_.front() != 0.0) fail_validation("values must start at 0");
    for (std::size_t k = 0; k + 1 < x_.size(); ++k) {
        if (!(x_[k + 1] > x_[k]))
            fail_validation("grid not strictly increasing at index " +
                            std::to_string(k + 1));
        if (!(y_[k + 1] > y_[k]))
            fail_validation("values not strictly increasing at index " +
                            std::to_string(k + 1));
    }
    for (double v : x_)
        if (!std::isfinite(v)) fail_validation("non-finite grid entry");
    for (double v : y_)
        if (!std::isfinite(v)) fail_validation("non-finite value entry");
    if (!d2_.empty()) {
        // Singular endpoint curvatures may be marked non-finite; flatten them
        // to the neighbouring node so order-2 evaluation stays defined.
        for (std::size_t k = 0; k < d2_.size(); ++k) {
            if (!std::isfinite(d2_[k]))
                d2_[k] = (k + 1 < d2_.size() && std::isfinite(d2_[k + 1]))
                             ? d2_[k + 1]
                             : (k > 0 ? d2_[k - 1] : 0.0);
        }
    }
    fill_slopes(slopes);
}

void TabulatedMonotone::fill_slopes(const std::vector<double>& provided) {
    const std::size_t n = x_.size();
    std::vector<double> sec(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k)
        sec[k] = (y_[k + 1] - y_[k]) / (x_[k + 1] - x_[k]);

    m_.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double m;
        if (!provided.empty() && std::isfinite(provided[k])) {
            m = provided[k];
        } else if (k == 0) {
            // Three-point one-sided estimate.
            const double h0 = x_[1] - x_[0];
            const double h1 = n > 2 ? x_[2] - x_[1] : h0;
            m = n > 2 ? ((2.0 * h0 + h1) * sec[0] - h0 * sec[1]) / (h0 + h1)
                      : sec[0];
        } else if (k == n - 1) {
            const double h1 = x_[n - 1] - x_[n - 2];
            const double h0 = n > 2 ? x_[n - 2] - x_[n - 3] : h1;
            m = n > 2 ? ((2.0 * h1 + h0) * sec[n - 2] - h1 * sec[n - 3]) /
                            (h0 + h1)
                      : sec[n - 2];
        } else {
            const double h0 = x_[k] - x_[k - 1];
            const double h1 = x_[k + 1] - x_[k];
            m = (h1 * sec[k - 1] + h0 * sec[k]) / (h0 + h1);
        }
        // Fritsch-Carlson clamp keeps every cubic piece nondecreasing.
        double cap = 3.0 * (k == 0 ? sec[0]
                            : k == n - 1 ? sec[n - 2]
                                         : std::min(sec[k - 1], sec[k]));
        m_[k] = std::clamp(m, 0.0, cap);
    }
}

std::size_t TabulatedMonotone::locate(double x) const {
    // Index k with x_[k] <= x <= x_[k+1].
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t k = static_cast<std::size_t>(it - x_.begin());
    if (k == 0) return 0;
    if (k >= x_.size()) return x_.size() - 2;
    return k - 1;
}

double TabulatedMonotone::eval(double x, int order) const {
    if (order < 0 || order > 2)
        fail_validation("eval order must be 0, 1 or 2");
    const double slack = kRelSlack * x_.back();
    if (!(x >= -slack && x <= x_.back() + slack))
        throw ValidationError(
            "TabulatedMonotone: argument " + std::to_string(x) +
            " outside tabulated domain [0, " + std::to_string(x_.back()) + "]");
    x = std::clamp(x, 0.0, x_.back());

    const std::size_t k = locate(x);
    const double h = x_[k + 1] - x_[k];
    const double t = x - x_[k];
    const double sec = (y_[k + 1] - y_[k]) / h;
    const double c2 = (3.0 * sec - 2.0 * m_[k] - m_[k + 1]) / h;
    const double c3 = (m_[k] + m_[k + 1] - 2.0 * sec) / (h * h);
    switch (order) {
        case 0:
            return y_[k] + t * (m_[k] + t * (c2 + t * c3));
        case 1:
            return m_[k] + t * (2.0 * c2 + 3.0 * c3 * t);
        default:
            if (!d2_.empty())
                return d2_[k] + (d2_[k + 1] - d2_[k]) * (t / h);
            return 2.0 * c2 + 6.0 * c3 * t;
    }
}

double TabulatedMonotone::inverse(double v) const {
    const double slack = kRelSlack * y_.back();
    if (!(v >= -slack && v <= y_.back() + slack))
        throw ValidationError(
            "TabulatedMonotone: inverse argument " + std::to_string(v) +
            " outside value range [0, " + std::to_string(y_.back()) + "]");
    v = std::clamp(v, 0.0, y_.back());
    if (v == 0.0) return 0.0;
    if (v == y_.back()) return x_.back();

    auto it = std::upper_bound(y_.begin(), y_.end(), v);
    std::size_t k = static_cast<std::size_t>(it - y_.begin());
    if (k == 0) return 0.0;
    if (k >= y_.size()) return x_.back();
    --k;

    double lo = x_[k], hi = x_[k + 1];
    // The piece is nondecreasing, so plain bisection converges.
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (eval(mid, 0) < v)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

TabulatedMonotone TabulatedMonotone::scaled_values(double c) const {
    if (!(c > 0.0)) fail_validation("value scale must be positive");
    std::vector<double> y(y_), m(m_), d2(d2_);
    for (double& v : y) v *= c;
    for (double& v : m) v *= c;
    for (double& v : d2) v *= c;
    return TabulatedMonotone(x_, std::move(y), std::move(m), std::move(d2));
}

TabulatedMonotone TabulatedMonotone::compressed_domain(double lambda) const {
    if (!(lambda > 0.0)) fail_validation("domain scale must be positive");
    std::vector<double> x(x_), m(m_), d2(d2_);
    for (double& v : x) v /= lambda;
    for (double& v : m) v *= lambda;
    for (double& v : d2) v *= lambda * lambda;
    return TabulatedMonotone(std::move(x), y_, std::move(m), std::move(d2));
}

}  // namespace ccc
