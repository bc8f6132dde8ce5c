#ifndef CCC_SCALE_HPP
#define CCC_SCALE_HPP

#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>

#include "ccc/monotone_table.hpp"

namespace ccc {

enum class ScaleKind { Power, ExpMinusOne, Log1p, ExpSqrt, Composed, Tabulated };

/// A scale function: strictly increasing, continuous, with value 0 at 0.
/// Instances come from a fixed catalog (powers, exp(r)-1, log(1+r),
/// exp(sqrt(r))-1), from composition of two catalog members, or from a
/// tabulated function with supplied derivatives.
///
/// Evaluation supports derivative orders 0, 1, 2. Catalog members use closed
/// forms; tabulated members interpolate. Every spec carries a domain cap;
/// evaluating beyond it is a ValidationError, which keeps overflow and
/// extrapolation failures at the boundary where they can be reported cleanly.
class ScaleSpec {
public:
    static ScaleSpec power(double p);
    static ScaleSpec exp_minus_one();
    static ScaleSpec log1p();
    static ScaleSpec exp_sqrt();
    static ScaleSpec composed(ScaleSpec outer, ScaleSpec inner);
    static ScaleSpec tabulated(std::shared_ptr<const TabulatedMonotone> table,
                               std::string label = "tabulated");

    /// Parse the textual mini-language:
    ///   power:<p> | exp_minus_one | log1p | exp_sqrt
    ///   | tabulated:<csv path> | compose:<outer>,<inner>
    /// Composition nests, e.g. compose:power:2,compose:log1p,exp_sqrt.
    /// Paths given to tabulated: may not contain commas.
    static ScaleSpec parse(std::string_view text);

    double operator()(double r) const { return eval(r, 0); }
    /// Value (order 0) or derivative (order 1, 2) at r >= 0. Derivatives at
    /// r = 0 may be infinite for singular catalog members.
    double eval(double r, int order) const;

    ScaleKind kind() const { return kind_; }
    /// Exponent for Power kind.
    double param() const { return p_; }
    /// Largest admissible argument.
    double domain_cap() const { return cap_; }
    /// Canonical textual form, parseable by parse().
    const std::string& label() const { return label_; }

    const ScaleSpec& outer() const;
    const ScaleSpec& inner() const;
    const TabulatedMonotone& table() const;

private:
    ScaleSpec() = default;

    ScaleKind kind_ = ScaleKind::Power;
    double p_ = 0.0;
    double cap_ = 0.0;
    std::string label_;
    std::shared_ptr<const ScaleSpec> outer_, inner_;
    std::shared_ptr<const TabulatedMonotone> table_;
};

/// Free-function form of ScaleSpec::eval.
double eval_scale(const ScaleSpec& spec, double r, int order = 0);

/// Load a tabulated scale function from CSV with header "r,theta,d1,d2".
/// Columns: grid point, value, first and second derivative. The supplied
/// derivatives are cross-checked against finite differences of neighbouring
/// rows; a relative deviation above fd_tol fails validation with the row
/// named. First row must be 0,0; d1 must be positive from the second row on.
ScaleSpec load_tabulated_scale_csv(const std::string& path,
                                   double fd_tol = 0.05);
ScaleSpec load_tabulated_scale_csv(std::istream& in, const std::string& name,
                                   double fd_tol = 0.05);

/// Write a table in the same CSV format, full double precision.
void write_scale_csv(std::ostream& out, const TabulatedMonotone& table);

}  // namespace ccc

#endif
