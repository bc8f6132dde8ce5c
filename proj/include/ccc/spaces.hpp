#ifndef CCC_SPACES_HPP
#define CCC_SPACES_HPP

#include <cstddef>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace ccc {

using Json = nlohmann::ordered_json;

/// Finite set of points carrying nonnegative weights (not necessarily
/// normalized). total_mass is the plain left-to-right sum of the weights.
class WeightedSpace {
public:
    explicit WeightedSpace(std::vector<double> weights);

    std::size_t size() const { return w_.size(); }
    double weight(std::size_t i) const { return w_[i]; }
    const std::vector<double>& weights() const { return w_; }
    double total_mass() const { return mass_; }

private:
    std::vector<double> w_;
    double mass_;
};

/// Real-valued function on the points of a weighted space, stored by index.
class SampleFunction {
public:
    explicit SampleFunction(std::vector<double> values);

    std::size_t size() const { return v_.size(); }
    double operator[](std::size_t i) const { return v_[i]; }
    const std::vector<double>& values() const { return v_; }

private:
    std::vector<double> v_;
};

/// Symmetric distance matrix with zero diagonal. Construction validates
/// symmetry (relative 1e-12) and nonnegativity, and optionally the triangle
/// inequality (O(n^3), on by default); violations are reported with the
/// witness indices. Zero off-diagonal entries are allowed, so duplicated
/// points are representable.
class FiniteMetricSpace {
public:
    FiniteMetricSpace(std::size_t n, std::vector<double> dist_row_major,
                      bool check_triangle = true);

    /// Euclidean distances of a point cloud; all points must share one
    /// dimension.
    static FiniteMetricSpace from_points(
        const std::vector<std::vector<double>>& points,
        bool check_triangle = true);

    std::size_t size() const { return n_; }
    double dist(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
    const std::vector<double>& data() const { return d_; }
    double max_dist() const { return max_; }

private:
    std::size_t n_;
    std::vector<double> d_;
    double max_;
};

/// Probability vector on indexed points. Weights within 1e-6 of unit mass
/// are renormalized; a larger deviation fails validation.
class DiscreteMeasure {
public:
    explicit DiscreteMeasure(std::vector<double> weights);

    std::size_t size() const { return w_.size(); }
    double mass(std::size_t i) const { return w_[i]; }
    const std::vector<double>& weights() const { return w_; }

private:
    std::vector<double> w_;
};

/// Coupling of two discrete measures: nonnegative matrix whose row sums are
/// mu and column sums are nu, both within 1e-9 absolute.
class TransportPlan {
public:
    TransportPlan(std::size_t rows, std::size_t cols,
                  std::vector<double> entries_row_major,
                  const DiscreteMeasure& mu, const DiscreteMeasure& nu);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double operator()(std::size_t i, std::size_t j) const {
        return q_[i * cols_ + j];
    }
    const std::vector<double>& data() const { return q_; }

private:
    std::size_t rows_, cols_;
    std::vector<double> q_;
};

// JSON schemas:
//   weighted space / measure : {"weights": [w0, w1, ...]}
//   sample function          : {"values": [v0, v1, ...]}
//   metric, explicit         : {"n": k, "dist": [[...], ...]}
//   metric, Euclidean points : {"points": [[x, y, ...], ...]}
WeightedSpace load_weighted_space(const Json& doc);
DiscreteMeasure load_measure(const Json& doc);
SampleFunction load_sample_function(const Json& doc);
FiniteMetricSpace load_metric_space(const Json& doc,
                                    bool check_triangle = true);

/// Square numeric CSV without header, one matrix row per line.
FiniteMetricSpace load_metric_csv(std::istream& in, const std::string& name,
                                  bool check_triangle = true);

/// Detect the document type by its keys: "dist"/"points" give a metric
/// space, "weights" a weighted space. Measures must be loaded explicitly
/// via load_measure since they share the weights schema.
using SpaceDocument =
    std::variant<WeightedSpace, FiniteMetricSpace, DiscreteMeasure>;
SpaceDocument load_space(const Json& doc, bool check_triangle = true,
                         bool as_measure = false);

Json to_json(const WeightedSpace& s);
Json to_json(const DiscreteMeasure& m);
Json to_json(const SampleFunction& f);
Json to_json(const FiniteMetricSpace& m);
Json to_json(const TransportPlan& p);

/// Parse with errors converted to ValidationError naming `what`.
Json parse_json(std::istream& in, const std::string& what);
Json parse_json_file(const std::string& path);

}  // namespace ccc

#endif
