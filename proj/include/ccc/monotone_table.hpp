#ifndef CCC_MONOTONE_TABLE_HPP
#define CCC_MONOTONE_TABLE_HPP

#include <cstddef>
#include <vector>

namespace ccc {

/// Strictly increasing function tabulated on [0, x_max], evaluated by a
/// monotonicity-preserving piecewise cubic Hermite interpolant.
///
/// Node slopes may be supplied by the caller (e.g. analytic derivatives);
/// otherwise they are estimated from three-point finite differences. Either
/// way the slopes are clamped to the Fritsch-Carlson region [0, 3*min of the
/// adjacent secants], which keeps the interpolant nondecreasing on every
/// interval. Optional per-node second derivatives back order-2 evaluation;
/// without them the cubic's own second derivative is used.
///
/// Invariants: grid[0] == 0, values[0] == 0, both arrays strictly increasing.
class TabulatedMonotone {
public:
    /// Build from nodes. `slopes` and `curvatures` are optional (pass empty
    /// vectors); non-finite entries in a supplied `slopes` array are replaced
    /// by finite-difference estimates before clamping, so singular endpoint
    /// derivatives can be marked with infinity.
    TabulatedMonotone(std::vector<double> grid, std::vector<double> values,
                      std::vector<double> slopes = {},
                      std::vector<double> curvatures = {});

    double operator()(double x) const { return eval(x, 0); }

    /// Evaluate the interpolant or one of its derivatives. `order` is 0, 1
    /// or 2. Arguments outside [0, x_max] beyond a small roundoff slack are
    /// a ValidationError.
    double eval(double x, int order) const;

    /// Inverse by bisection on the interpolant, to 1e-12 absolute accuracy.
    /// `v` must lie in [0, v_max] up to roundoff slack.
    double inverse(double v) const;

    double x_max() const { return x_.back(); }
    double v_max() const { return y_.back(); }
    std::size_t size() const { return x_.size(); }

    const std::vector<double>& grid() const { return x_; }
    const std::vector<double>& values() const { return y_; }
    const std::vector<double>& slopes() const { return m_; }
    /// Empty when no second derivatives were supplied.
    const std::vector<double>& curvatures() const { return d2_; }
    bool has_curvatures() const { return !d2_.empty(); }

    /// Table of x -> c * f(x). Requires c > 0.
    TabulatedMonotone scaled_values(double c) const;
    /// Table of x -> f(lambda * x), tabulated on [0, x_max / lambda].
    /// Requires lambda > 0.
    TabulatedMonotone compressed_domain(double lambda) const;

private:
    std::vector<double> x_, y_, m_, d2_;

    std::size_t locate(double x) const;
    void fill_slopes(const std::vector<double>& provided);
};

}  // namespace ccc

#endif
