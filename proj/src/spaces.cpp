#include "ccc/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ccc/errors.hpp"

namespace ccc {

namespace {

std::vector<double> numeric_array(const Json& doc, const char* key,
                                  std::size_t min_len = 1) {
    if (!doc.is_object() || !doc.contains(key))
        throw ValidationError(std::string("bad schema: missing key '") + key +
                              "'");
    const Json& a = doc.at(key);
    if (!a.is_array() || a.size() < min_len)
        throw ValidationError(std::string("bad schema: '") + key +
                              "' must be an array of at least " +
                              std::to_string(min_len) + " numbers");
    std::vector<double> out;
    out.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a[i].is_number())
            throw ValidationError(std::string("bad schema: '") + key + "[" +
                                  std::to_string(i) + "]' is not a number");
        out.push_back(a[i].get<double>());
    }
    return out;
}

}  // namespace

WeightedSpace::WeightedSpace(std::vector<double> weights)
    : w_(std::move(weights)) {
    if (w_.empty())
        throw ValidationError("weighted space: needs at least one point");
    bool any_positive = false;
    for (std::size_t i = 0; i < w_.size(); ++i) {
        if (!std::isfinite(w_[i]) || w_[i] < 0.0)
            throw ValidationError("weighted space: weight[" +
                                  std::to_string(i) +
                                  "] must be finite and nonnegative");
        any_positive = any_positive || w_[i] > 0.0;
    }
    if (!any_positive)
        throw ValidationError("weighted space: all weights are zero");
    mass_ = 0.0;
    for (double w : w_) mass_ += w;
}

SampleFunction::SampleFunction(std::vector<double> values)
    : v_(std::move(values)) {
    if (v_.empty())
        throw ValidationError("sample function: needs at least one value");
    for (std::size_t i = 0; i < v_.size(); ++i)
        if (!std::isfinite(v_[i]))
            throw ValidationError("sample function: value[" +
                                  std::to_string(i) + "] is not finite");
}

FiniteMetricSpace::FiniteMetricSpace(std::size_t n,
                                     std::vector<double> dist_row_major,
                                     bool check_triangle)
    : n_(n), d_(std::move(dist_row_major)) {
    if (n_ == 0) throw ValidationError("metric space: n must be positive");
    if (d_.size() != n_ * n_)
        throw ValidationError("metric space: matrix size " +
                              std::to_string(d_.size()) + " does not match n=" +
                              std::to_string(n_));
    max_ = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
        for (std::size_t j = 0; j < n_; ++j) {
            const double v = d_[i * n_ + j];
            if (!std::isfinite(v) || v < 0.0)
                throw ValidationError("metric space: entry (" +
                                      std::to_string(i) + "," +
                                      std::to_string(j) +
                                      ") must be finite and nonnegative");
            max_ = std::max(max_, v);
        }
        if (d_[i * n_ + i] != 0.0)
            throw ValidationError("metric space: diagonal entry (" +
                                  std::to_string(i) + "," + std::to_string(i) +
                                  ") must be 0");
    }
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = i + 1; j < n_; ++j) {
            const double a = d_[i * n_ + j], b = d_[j * n_ + i];
            if (std::abs(a - b) > 1e-12 * std::max({a, b, 1.0}))
                throw ValidationError("metric space: asymmetric at (" +
                                      std::to_string(i) + "," +
                                      std::to_string(j) + "): " +
                                      std::to_string(a) + " vs " +
                                      std::to_string(b));
        }
    if (check_triangle) {
        const double eps = 1e-12 * std::max(max_, 1.0);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j)
                for (std::size_t k = 0; k < n_; ++k)
                    if (dist(i, k) > dist(i, j) + dist(j, k) + eps)
                        throw ValidationError(
                            "metric space: triangle inequality fails at (" +
                            std::to_string(i) + "," + std::to_string(j) + "," +
                            std::to_string(k) + "): d(i,k)=" +
                            std::to_string(dist(i, k)) + " > d(i,j)+d(j,k)=" +
                            std::to_string(dist(i, j) + dist(j, k)));
    }
}

FiniteMetricSpace FiniteMetricSpace::from_points(
    const std::vector<std::vector<double>>& points, bool check_triangle) {
    const std::size_t n = points.size();
    if (n == 0) throw ValidationError("metric space: empty point list");
    const std::size_t dim = points[0].size();
    if (dim == 0) throw ValidationError("metric space: zero-dimensional points");
    for (std::size_t i = 0; i < n; ++i) {
        if (points[i].size() != dim)
            throw ValidationError("metric space: point " + std::to_string(i) +
                                  " has dimension " +
                                  std::to_string(points[i].size()) +
                                  ", expected " + std::to_string(dim));
        for (double c : points[i])
            if (!std::isfinite(c))
                throw ValidationError("metric space: point " +
                                      std::to_string(i) +
                                      " has a non-finite coordinate");
    }
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (std::size_t c = 0; c < dim; ++c) {
                const double t = points[i][c] - points[j][c];
                s += t * t;
            }
            d[i * n + j] = d[j * n + i] = std::sqrt(s);
        }
    return FiniteMetricSpace(n, std::move(d), check_triangle);
}

DiscreteMeasure::DiscreteMeasure(std::vector<double> weights)
    : w_(std::move(weights)) {
    if (w_.empty())
        throw ValidationError("measure: needs at least one point");
    double sum = 0.0;
    for (std::size_t i = 0; i < w_.size(); ++i) {
        if (!std::isfinite(w_[i]) || w_[i] < 0.0)
            throw ValidationError("measure: weight[" + std::to_string(i) +
                                  "] must be finite and nonnegative");
        sum += w_[i];
    }
    if (std::abs(sum - 1.0) > 1e-6)
        throw ValidationError("measure: total mass " + std::to_string(sum) +
                              " deviates from 1 by more than 1e-6");
    for (double& w : w_) w /= sum;
}

TransportPlan::TransportPlan(std::size_t rows, std::size_t cols,
                             std::vector<double> entries_row_major,
                             const DiscreteMeasure& mu,
                             const DiscreteMeasure& nu)
    : rows_(rows), cols_(cols), q_(std::move(entries_row_major)) {
    if (rows_ != mu.size() || cols_ != nu.size() || q_.size() != rows_ * cols_)
        throw ValidationError("transport plan: shape mismatch");
    for (std::size_t i = 0; i < q_.size(); ++i) {
        if (!std::isfinite(q_[i]) || q_[i] < -1e-12)
            throw ValidationError("transport plan: entry " + std::to_string(i) +
                                  " must be finite and nonnegative");
        if (q_[i] < 0.0) q_[i] = 0.0;  // clear roundoff dust
    }
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < cols_; ++j) s += q_[i * cols_ + j];
        if (std::abs(s - mu.mass(i)) > 1e-9)
            throw ValidationError("transport plan: row " + std::to_string(i) +
                                  " sums to " + std::to_string(s) +
                                  ", expected " + std::to_string(mu.mass(i)));
    }
    for (std::size_t j = 0; j < cols_; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) s += q_[i * cols_ + j];
        if (std::abs(s - nu.mass(j)) > 1e-9)
            throw ValidationError("transport plan: column " +
                                  std::to_string(j) + " sums to " +
                                  std::to_string(s) + ", expected " +
                                  std::to_string(nu.mass(j)));
    }
}

WeightedSpace load_weighted_space(const Json& doc) {
    return WeightedSpace(numeric_array(doc, "weights"));
}

DiscreteMeasure load_measure(const Json& doc) {
    return DiscreteMeasure(numeric_array(doc, "weights"));
}

SampleFunction load_sample_function(const Json& doc) {
    return SampleFunction(numeric_array(doc, "values"));
}

FiniteMetricSpace load_metric_space(const Json& doc, bool check_triangle) {
    if (!doc.is_object())
        throw ValidationError("bad schema: metric document must be an object");
    if (doc.contains("points")) {
        const Json& pts = doc.at("points");
        if (!pts.is_array() || pts.empty())
            throw ValidationError(
                "bad schema: 'points' must be a nonempty array");
        std::vector<std::vector<double>> p;
        p.reserve(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (!pts[i].is_array())
                throw ValidationError("bad schema: 'points[" +
                                      std::to_string(i) +
                                      "]' is not an array");
            std::vector<double> row;
            for (const auto& c : pts[i]) {
                if (!c.is_number())
                    throw ValidationError("bad schema: 'points[" +
                                          std::to_string(i) +
                                          "]' has a non-numeric coordinate");
                row.push_back(c.get<double>());
            }
            p.push_back(std::move(row));
        }
        return FiniteMetricSpace::from_points(p, check_triangle);
    }
    if (!doc.contains("dist"))
        throw ValidationError("bad schema: metric needs 'dist' or 'points'");
    if (!doc.contains("n") || !doc.at("n").is_number_integer())
        throw ValidationError("bad schema: metric needs integer 'n'");
    const auto n = doc.at("n").get<long long>();
    if (n <= 0) throw ValidationError("bad schema: 'n' must be positive");
    const Json& rows = doc.at("dist");
    if (!rows.is_array() || rows.size() != static_cast<std::size_t>(n))
        throw ValidationError("bad schema: 'dist' must have n rows");
    std::vector<double> d;
    d.reserve(static_cast<std::size_t>(n * n));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].is_array() || rows[i].size() != static_cast<std::size_t>(n))
            throw ValidationError("bad schema: 'dist[" + std::to_string(i) +
                                  "]' must have n entries");
        for (const auto& e : rows[i]) {
            if (!e.is_number())
                throw ValidationError("bad schema: 'dist[" +
                                      std::to_string(i) +
                                      "]' has a non-numeric entry");
            d.push_back(e.get<double>());
        }
    }
    return FiniteMetricSpace(static_cast<std::size_t>(n), std::move(d),
                             check_triangle);
}

FiniteMetricSpace load_metric_csv(std::istream& in, const std::string& name,
                                  bool check_triangle) {
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::vector<double> row;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ',')) {
            char* end = nullptr;
            const double v = std::strtod(field.c_str(), &end);
            while (end && (*end == ' ' || *end == '\t' || *end == '\r')) ++end;
            if (field.empty() || !end || *end != '\0')
                throw ValidationError("metric csv '" + name + "' line " +
                                      std::to_string(lineno) +
                                      ": not a number: '" + field + "'");
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw ValidationError("metric csv '" + name + "': empty file");
    const std::size_t n = rows.size();
    std::vector<double> d;
    d.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != n)
            throw ValidationError("metric csv '" + name + "' line " +
                                  std::to_string(i + 1) + ": expected " +
                                  std::to_string(n) + " entries, got " +
                                  std::to_string(rows[i].size()));
        for (double v : rows[i]) d.push_back(v);
    }
    return FiniteMetricSpace(n, std::move(d), check_triangle);
}

SpaceDocument load_space(const Json& doc, bool check_triangle,
                         bool as_measure) {
    if (!doc.is_object())
        throw ValidationError("bad schema: document must be an object");
    if (doc.contains("dist") || doc.contains("points"))
        return load_metric_space(doc, check_triangle);
    if (doc.contains("weights")) {
        if (as_measure) return load_measure(doc);
        return load_weighted_space(doc);
    }
    throw ValidationError(
        "bad schema: expected one of the keys 'weights', 'dist', 'points'");
}

Json to_json(const WeightedSpace& s) { return Json{{"weights", s.weights()}}; }

Json to_json(const DiscreteMeasure& m) {
    return Json{{"weights", m.weights()}};
}

Json to_json(const SampleFunction& f) { return Json{{"values", f.values()}}; }

Json to_json(const FiniteMetricSpace& m) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < m.size(); ++i) {
        Json row = Json::array();
        for (std::size_t j = 0; j < m.size(); ++j) row.push_back(m.dist(i, j));
        rows.push_back(std::move(row));
    }
    return Json{{"n", m.size()}, {"dist", std::move(rows)}};
}

Json to_json(const TransportPlan& p) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < p.rows(); ++i) {
        Json row = Json::array();
        for (std::size_t j = 0; j < p.cols(); ++j) row.push_back(p(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Json parse_json(std::istream& in, const std::string& what) {
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("bad schema: cannot parse " + what + ": " +
                              e.what());
    }
}

Json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file '" + path + "'");
    return parse_json(in, "'" + path + "'");
}

}  // namespace ccc
