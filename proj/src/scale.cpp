#include "ccc/scale.hpp"

#include <cassert>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "ccc/errors.hpp"

namespace ccc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCapSlack = 1e-12;

std::string fmt_double(double v) {
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

double parse_number(std::string_view tok, const std::string& what) {
    double v = 0.0;
    const auto* first = tok.data();
    const auto* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last)
        throw ValidationError("scale spec: bad " + what + " '" +
                              std::string(tok) + "'");
    return v;
}

}  // namespace

ScaleSpec ScaleSpec::power(double p) {
    if (!(p > 0.0) || !std::isfinite(p))
        throw ValidationError("scale spec: power exponent must be positive, got " +
                              fmt_double(p));
    ScaleSpec s;
    s.kind_ = ScaleKind::Power;
    s.p_ = p;
    // Keep r^p representable with headroom for downstream arithmetic.
    s.cap_ = std::min(1e9, std::pow(1e300, 1.0 / p));
    s.label_ = "power:" + fmt_double(p);
    return s;
}

ScaleSpec ScaleSpec::exp_minus_one() {
    ScaleSpec s;
    s.kind_ = ScaleKind::ExpMinusOne;
    s.cap_ = 700.0;
    s.label_ = "exp_minus_one";
    return s;
}

ScaleSpec ScaleSpec::log1p() {
    ScaleSpec s;
    s.kind_ = ScaleKind::Log1p;
    s.cap_ = 1e9;
    s.label_ = "log1p";
    return s;
}

ScaleSpec ScaleSpec::exp_sqrt() {
    ScaleSpec s;
    s.kind_ = ScaleKind::ExpSqrt;
    s.cap_ = 4.9e5;  // sqrt(cap) stays below exp overflow
    s.label_ = "exp_sqrt";
    return s;
}

ScaleSpec ScaleSpec::composed(ScaleSpec outer, ScaleSpec inner) {
    ScaleSpec s;
    s.kind_ = ScaleKind::Composed;
    s.label_ = "compose:" + outer.label_ + "," + inner.label_;
    // Composite domain: stay inside the inner cap and keep the inner value
    // inside the outer cap.
    double cap = inner.cap_;
    if (inner.eval(cap, 0) > outer.cap_) {
        double lo = 0.0, hi = cap;
        while (hi - lo > 1e-12 * hi) {
            const double mid = 0.5 * (lo + hi);
            if (inner.eval(mid, 0) <= outer.cap_)
                lo = mid;
            else
                hi = mid;
        }
        cap = lo;
    }
    s.cap_ = cap;
    s.outer_ = std::make_shared<const ScaleSpec>(std::move(outer));
    s.inner_ = std::make_shared<const ScaleSpec>(std::move(inner));
    return s;
}

ScaleSpec ScaleSpec::tabulated(std::shared_ptr<const TabulatedMonotone> table,
                               std::string label) {
    if (!table) throw ValidationError("scale spec: null table");
    ScaleSpec s;
    s.kind_ = ScaleKind::Tabulated;
    s.cap_ = table->x_max();
    s.label_ = std::move(label);
    s.table_ = std::move(table);
    return s;
}

const ScaleSpec& ScaleSpec::outer() const {
    if (kind_ != ScaleKind::Composed)
        throw ValidationError("scale spec: outer() on non-composed spec");
    return *outer_;
}

const ScaleSpec& ScaleSpec::inner() const {
    if (kind_ != ScaleKind::Composed)
        throw ValidationError("scale spec: inner() on non-composed spec");
    return *inner_;
}

const TabulatedMonotone& ScaleSpec::table() const {
    if (kind_ != ScaleKind::Tabulated)
        throw ValidationError("scale spec: table() on non-tabulated spec");
    return *table_;
}

double ScaleSpec::eval(double r, int order) const {
    if (order < 0 || order > 2)
        throw ValidationError("scale spec: derivative order must be 0, 1 or 2");
    if (!(r >= 0.0))
        throw ValidationError("scale spec: argument must be nonnegative, got " +
                              fmt_double(r));
    if (r > cap_ * (1.0 + kCapSlack))
        throw ValidationError("scale spec '" + label_ + "': argument " +
                              fmt_double(r) + " exceeds domain cap " +
                              fmt_double(cap_));
    r = std::min(r, cap_);

    switch (kind_) {
        case ScaleKind::Power: {
            if (r == 0.0) {
                if (order == 0) return 0.0;
                if (order == 1) return p_ > 1.0 ? 0.0 : (p_ == 1.0 ? 1.0 : kInf);
                if (p_ > 2.0 || p_ == 1.0) return 0.0;
                if (p_ == 2.0) return 2.0;
                return p_ > 1.0 ? kInf : -kInf;
            }
            if (order == 0) return std::pow(r, p_);
            if (order == 1) return p_ * std::pow(r, p_ - 1.0);
            return p_ * (p_ - 1.0) * std::pow(r, p_ - 2.0);
        }
        case ScaleKind::ExpMinusOne: {
            if (order == 0) return std::expm1(r);
            return std::exp(r);
        }
        case ScaleKind::Log1p: {
            if (order == 0) return std::log1p(r);
            const double d = 1.0 + r;
            if (order == 1) return 1.0 / d;
            return -1.0 / (d * d);
        }
        case ScaleKind::ExpSqrt: {
            if (r == 0.0) {
                if (order == 0) return 0.0;
                return order == 1 ? kInf : -kInf;
            }
            const double s = std::sqrt(r);
            const double e = std::exp(s);
            if (order == 0) return e - 1.0;
            if (order == 1) return e / (2.0 * s);
            return e * (s - 1.0) / (4.0 * r * s);
        }
        case ScaleKind::Composed: {
            const double v = std::min(inner_->eval(r, 0), outer_->cap_);
            if (order == 0) return outer_->eval(v, 0);
            const double i1 = inner_->eval(r, 1);
            const double o1 = outer_->eval(v, 1);
            if (order == 1) return o1 * i1;
            const double i2 = inner_->eval(r, 2);
            const double o2 = outer_->eval(v, 2);
            return o2 * i1 * i1 + o1 * i2;
        }
        case ScaleKind::Tabulated:
            return table_->eval(r, order);
    }
    return 0.0;  // unreachable
}

double eval_scale(const ScaleSpec& spec, double r, int order) {
    return spec.eval(r, order);
}

namespace {

std::string_view take_name(std::string_view s, std::size_t& pos) {
    const std::size_t start = pos;
    while (pos < s.size() && s[pos] != ':' && s[pos] != ',') ++pos;
    return s.substr(start, pos - start);
}

std::string_view take_arg(std::string_view s, std::size_t& pos) {
    const std::size_t start = pos;
    while (pos < s.size() && s[pos] != ',') ++pos;
    return s.substr(start, pos - start);
}

void expect_colon(std::string_view s, std::size_t& pos, std::string_view name) {
    if (pos >= s.size() || s[pos] != ':')
        throw ValidationError("scale spec: '" + std::string(name) +
                              "' requires a ':<argument>'");
    ++pos;
}

ScaleSpec parse_impl(std::string_view s, std::size_t& pos) {
    const std::string_view name = take_name(s, pos);
    if (name == "power") {
        expect_colon(s, pos, name);
        return ScaleSpec::power(parse_number(take_arg(s, pos), "power exponent"));
    }
    if (name == "exp_minus_one") return ScaleSpec::exp_minus_one();
    if (name == "log1p") return ScaleSpec::log1p();
    if (name == "exp_sqrt") return ScaleSpec::exp_sqrt();
    if (name == "tabulated") {
        expect_colon(s, pos, name);
        const std::string_view path = take_arg(s, pos);
        if (path.empty())
            throw ValidationError("scale spec: tabulated requires a file path");
        return load_tabulated_scale_csv(std::string(path));
    }
    if (name == "compose") {
        expect_colon(s, pos, name);
        ScaleSpec outer = parse_impl(s, pos);
        if (pos >= s.size() || s[pos] != ',')
            throw ValidationError(
                "scale spec: compose requires two comma-separated parts");
        ++pos;
        ScaleSpec inner = parse_impl(s, pos);
        return ScaleSpec::composed(std::move(outer), std::move(inner));
    }
    throw ValidationError("scale spec: unknown function '" + std::string(name) +
                          "'");
}

}  // namespace

ScaleSpec ScaleSpec::parse(std::string_view text) {
    if (text.empty()) throw ValidationError("scale spec: empty string");
    std::size_t pos = 0;
    ScaleSpec spec = parse_impl(text, pos);
    if (pos != text.size())
        throw ValidationError("scale spec: trailing characters '" +
                              std::string(text.substr(pos)) + "'");
    return spec;
}

namespace {

struct CsvRow {
    double r, theta, d1, d2;
};

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    for (auto& f : out) {
        const auto b = f.find_first_not_of(" \t");
        const auto e = f.find_last_not_of(" \t");
        f = (b == std::string::npos) ? std::string() : f.substr(b, e - b + 1);
    }
    return out;
}

double parse_field(const std::string& f, int row, const char* col) {
    char* end = nullptr;
    const double v = std::strtod(f.c_str(), &end);
    if (f.empty() || end != f.c_str() + f.size())
        throw ValidationError("scale csv row " + std::to_string(row) +
                              ": field '" + col + "' is not a number: '" + f +
                              "'");
    return v;
}

}  // namespace

ScaleSpec load_tabulated_scale_csv(std::istream& in, const std::string& name,
                                   double fd_tol) {
    std::string line;
    if (!std::getline(in, line))
        throw ValidationError("scale csv '" + name + "': empty file");
    {
        auto h = split_fields(line);
        if (h != std::vector<std::string>{"r", "theta", "d1", "d2"})
            throw ValidationError("scale csv '" + name +
                                  "': header must be 'r,theta,d1,d2'");
    }

    std::vector<CsvRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto f = split_fields(line);
        if (f.size() != 4)
            throw ValidationError("scale csv row " + std::to_string(lineno) +
                                  ": expected 4 fields, got " +
                                  std::to_string(f.size()));
        rows.push_back({parse_field(f[0], lineno, "r"),
                        parse_field(f[1], lineno, "theta"),
                        parse_field(f[2], lineno, "d1"),
                        parse_field(f[3], lineno, "d2")});
    }
    if (rows.size() < 2)
        throw ValidationError("scale csv '" + name +
                              "': need at least two data rows");
    if (rows[0].r != 0.0 || rows[0].theta != 0.0)
        throw ValidationError("scale csv '" + name +
                              "': first row must be r=0, theta=0");

    const std::size_t n = rows.size();
    for (std::size_t k = 0; k < n; ++k) {
        const int row = static_cast<int>(k) + 2;  // 1-based, after header
        if (k > 0) {
            if (!(rows[k].r > rows[k - 1].r))
                throw ValidationError("scale csv row " + std::to_string(row) +
                                      ": r not strictly increasing");
            if (!(rows[k].theta > rows[k - 1].theta))
                throw ValidationError("scale csv row " + std::to_string(row) +
                                      ": theta not strictly increasing");
            if (!(rows[k].d1 > 0.0) || !std::isfinite(rows[k].d1))
                throw ValidationError("scale csv row " + std::to_string(row) +
                                      ": d1 must be positive");
        }
        if (k > 0 && k + 1 < n) {
            const double span = rows[k + 1].r - rows[k - 1].r;
            const double c1 = (rows[k + 1].theta - rows[k - 1].theta) / span;
            const double dev1 =
                std::abs(rows[k].d1 - c1) / std::max(std::max(rows[k].d1, c1), 1e-300);
            if (dev1 > fd_tol)
                throw ValidationError(
                    "scale csv row " + std::to_string(row) + ": d1=" +
                    fmt_double(rows[k].d1) +
                    " inconsistent with central difference " + fmt_double(c1) +
                    " (relative deviation " + fmt_double(dev1) + ")");
            const double c2 = (rows[k + 1].d1 - rows[k - 1].d1) / span;
            const double tol2 = 1e-8 * (1.0 + std::abs(rows[k].d1)) +
                                fd_tol * std::max(std::abs(rows[k].d2), std::abs(c2));
            if (std::abs(rows[k].d2 - c2) > tol2)
                throw ValidationError(
                    "scale csv row " + std::to_string(row) + ": d2=" +
                    fmt_double(rows[k].d2) +
                    " inconsistent with central difference of d1 (" +
                    fmt_double(c2) + ")");
        }
    }

    std::vector<double> r(n), v(n), d1(n), d2(n);
    for (std::size_t k = 0; k < n; ++k) {
        r[k] = rows[k].r;
        v[k] = rows[k].theta;
        d1[k] = rows[k].d1;
        d2[k] = rows[k].d2;
    }
    auto table = std::make_shared<const TabulatedMonotone>(
        std::move(r), std::move(v), std::move(d1), std::move(d2));
    return ScaleSpec::tabulated(std::move(table), "tabulated:" + name);
}

ScaleSpec load_tabulated_scale_csv(const std::string& path, double fd_tol) {
    std::ifstream in(path);
    if (!in)
        throw ValidationError("scale csv: cannot open '" + path + "'");
    return load_tabulated_scale_csv(in, path, fd_tol);
}

void write_scale_csv(std::ostream& out, const TabulatedMonotone& table) {
    out << "r,theta,d1,d2\n";
    const auto& x = table.grid();
    for (std::size_t k = 0; k < table.size(); ++k) {
        const double d2 = table.has_curvatures() ? table.curvatures()[k]
                                                 : table.eval(x[k], 2);
        out << fmt_double(x[k]) << ',' << fmt_double(table.values()[k]) << ','
            << fmt_double(table.slopes()[k]) << ',' << fmt_double(d2) << '\n';
    }
}

}  // namespace ccc
