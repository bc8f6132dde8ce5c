#include "ccc/spaces.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "ccc/errors.hpp"

namespace {

using ccc::DiscreteMeasure;
using ccc::FiniteMetricSpace;
using ccc::Json;
using ccc::SampleFunction;
using ccc::TransportPlan;
using ccc::WeightedSpace;

std::string message_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const ccc::ValidationError& e) {
        return e.what();
    }
    return "";
}

TEST(WeightedSpaceTest, AcceptsAndSums) {
    const WeightedSpace s({0.5, 0.0, 2.0});
    EXPECT_EQ(s.size(), 3u);
    EXPECT_DOUBLE_EQ(s.total_mass(), 2.5);
    EXPECT_DOUBLE_EQ(s.weight(1), 0.0);
}

TEST(WeightedSpaceTest, RejectsBadWeights) {
    EXPECT_THROW(WeightedSpace({}), ccc::ValidationError);
    EXPECT_THROW(WeightedSpace({0.0, 0.0}), ccc::ValidationError);
    EXPECT_THROW(WeightedSpace({1.0, -0.1}), ccc::ValidationError);
    const std::string msg = message_of([] {
        WeightedSpace({1.0, std::nan("")});
    });
    EXPECT_NE(msg.find("weight[1]"), std::string::npos) << msg;
}

TEST(MeasureTest, RenormalizesNearUnitMass) {
    const DiscreteMeasure m({0.25, 0.25 + 3e-7, 0.5});
    double sum = 0.0;
    for (double w : m.weights()) sum += w;
    EXPECT_NEAR(sum, 1.0, 1e-15);
    EXPECT_THROW(DiscreteMeasure({0.25, 0.25, 0.51}), ccc::ValidationError);
    EXPECT_THROW(DiscreteMeasure({0.5, -0.5, 1.0}), ccc::ValidationError);
}

TEST(MetricTest, ValidatesShapeAndAxioms) {
    const FiniteMetricSpace m(3, {0, 1, 2, 1, 0, 1.5, 2, 1.5, 0});
    EXPECT_EQ(m.size(), 3u);
    EXPECT_DOUBLE_EQ(m.dist(0, 2), 2.0);
    EXPECT_DOUBLE_EQ(m.max_dist(), 2.0);

    EXPECT_THROW(FiniteMetricSpace(2, {0, 1, 1}), ccc::ValidationError);
    // Nonzero diagonal.
    EXPECT_THROW(FiniteMetricSpace(2, {0.1, 1, 1, 0}), ccc::ValidationError);
    // Asymmetry beyond the relative slack.
    EXPECT_THROW(FiniteMetricSpace(2, {0, 1, 1.001, 0}), ccc::ValidationError);
    // Negative entry.
    EXPECT_THROW(FiniteMetricSpace(2, {0, -1, -1, 0}), ccc::ValidationError);
}

TEST(MetricTest, TriangleViolationNamesWitness) {
    // d(0,2) = 5 > d(0,1) + d(1,2) = 2.
    const std::string msg = message_of([] {
        FiniteMetricSpace(3, {0, 1, 5, 1, 0, 1, 5, 1, 0});
    });
    EXPECT_NE(msg.find("triangle"), std::string::npos) << msg;
    EXPECT_NE(msg.find("(0"), std::string::npos) << msg;
    // The same matrix passes with the check disabled.
    EXPECT_NO_THROW(FiniteMetricSpace(3, {0, 1, 5, 1, 0, 1, 5, 1, 0}, false));
}

TEST(MetricTest, DuplicatedPointsAllowed) {
    EXPECT_NO_THROW(FiniteMetricSpace(3, {0, 0, 1, 0, 0, 1, 1, 1, 0}));
}

TEST(MetricTest, FromPointsIsEuclidean) {
    const auto m = FiniteMetricSpace::from_points({{0, 0}, {3, 4}, {0, 1}});
    EXPECT_DOUBLE_EQ(m.dist(0, 1), 5.0);
    EXPECT_DOUBLE_EQ(m.dist(0, 2), 1.0);
    EXPECT_DOUBLE_EQ(m.dist(1, 1), 0.0);
    EXPECT_THROW(FiniteMetricSpace::from_points({{0, 0}, {1}}),
                 ccc::ValidationError);
    EXPECT_THROW(FiniteMetricSpace::from_points({}), ccc::ValidationError);
}

TEST(PlanTest, ChecksMarginals) {
    const DiscreteMeasure mu({0.5, 0.5});
    const DiscreteMeasure nu({0.25, 0.75});
    EXPECT_NO_THROW(TransportPlan(2, 2, {0.25, 0.25, 0.0, 0.5}, mu, nu));
    // Tiny negative entries from arithmetic noise are clamped to zero.
    const TransportPlan p(2, 2, {0.25, 0.25, -1e-13, 0.5 + 1e-13}, mu, nu);
    EXPECT_DOUBLE_EQ(p(1, 0), 0.0);
    // Wrong row sum.
    EXPECT_THROW(TransportPlan(2, 2, {0.3, 0.25, 0.0, 0.45}, mu, nu),
                 ccc::ValidationError);
    // Wrong column sum.
    EXPECT_THROW(TransportPlan(2, 2, {0.3, 0.2, 0.0, 0.5}, mu, nu),
                 ccc::ValidationError);
    // Genuinely negative entry.
    EXPECT_THROW(TransportPlan(2, 2, {0.6, -0.1, -0.1, 0.6}, mu, nu),
                 ccc::ValidationError);
}

TEST(JsonIo, WeightedSpaceRoundTrip) {
    const Json doc = {{"weights", {0.5, 1.5, 0.0}}};
    const WeightedSpace s = ccc::load_weighted_space(doc);
    EXPECT_EQ(ccc::to_json(s)["weights"], doc["weights"]);
    EXPECT_THROW(ccc::load_weighted_space(Json{{"values", {1.0}}}),
                 ccc::ValidationError);
    EXPECT_THROW(ccc::load_weighted_space(Json{{"weights", {"a"}}}),
                 ccc::ValidationError);
}

TEST(JsonIo, MetricRoundTrips) {
    const Json doc = {{"n", 2}, {"dist", {{0.0, 2.0}, {2.0, 0.0}}}};
    const FiniteMetricSpace m = ccc::load_metric_space(doc);
    EXPECT_DOUBLE_EQ(m.dist(0, 1), 2.0);
    const Json out = ccc::to_json(m);
    EXPECT_EQ(out["n"], 2);
    EXPECT_EQ(out["dist"], doc["dist"]);

    // Mismatched n.
    EXPECT_THROW(
        ccc::load_metric_space(Json{{"n", 3}, {"dist", {{0.0, 2.0}, {2.0, 0.0}}}}),
        ccc::ValidationError);

    const Json pts = {{"points", {{0.0, 0.0}, {3.0, 4.0}}}};
    EXPECT_DOUBLE_EQ(ccc::load_metric_space(pts).dist(0, 1), 5.0);
}

TEST(JsonIo, SampleFunctionAndMeasure) {
    const SampleFunction f =
        ccc::load_sample_function(Json{{"values", {1.0, -2.0}}});
    EXPECT_DOUBLE_EQ(f[1], -2.0);
    EXPECT_EQ(ccc::to_json(f)["values"].size(), 2u);
    const DiscreteMeasure m = ccc::load_measure(Json{{"weights", {0.5, 0.5}}});
    EXPECT_EQ(ccc::to_json(m)["weights"].size(), 2u);
}

TEST(JsonIo, SpaceDocumentDetection) {
    const auto a = ccc::load_space(Json{{"weights", {1.0, 2.0}}});
    EXPECT_TRUE(std::holds_alternative<WeightedSpace>(a));
    const auto b = ccc::load_space(Json{{"weights", {0.5, 0.5}}}, true, true);
    EXPECT_TRUE(std::holds_alternative<DiscreteMeasure>(b));
    const auto c =
        ccc::load_space(Json{{"n", 2}, {"dist", {{0.0, 1.0}, {1.0, 0.0}}}});
    EXPECT_TRUE(std::holds_alternative<FiniteMetricSpace>(c));
    const auto d = ccc::load_space(Json{{"points", {{0.0}, {1.0}}}});
    EXPECT_TRUE(std::holds_alternative<FiniteMetricSpace>(d));
    EXPECT_THROW(ccc::load_space(Json{{"foo", 1}}), ccc::ValidationError);
}

TEST(JsonIo, MetricCsv) {
    std::istringstream in("0,1,2\n1,0,1\n2,1,0\n");
    const FiniteMetricSpace m = ccc::load_metric_csv(in, "grid");
    EXPECT_EQ(m.size(), 3u);
    EXPECT_DOUBLE_EQ(m.dist(0, 2), 2.0);

    std::istringstream ragged("0,1\n1,0,2\n");
    EXPECT_THROW(ccc::load_metric_csv(ragged, "bad"), ccc::ValidationError);
    std::istringstream empty("");
    EXPECT_THROW(ccc::load_metric_csv(empty, "empty"), ccc::ValidationError);
}

TEST(JsonIo, ParseErrorsBecomeValidation) {
    std::istringstream in("{not json");
    EXPECT_THROW(ccc::parse_json(in, "stdin"), ccc::ValidationError);
    EXPECT_THROW(ccc::parse_json_file("/nonexistent/file.json"),
                 ccc::ValidationError);
}

TEST(JsonIo, PlanSerialization) {
    const DiscreteMeasure mu({1.0});
    const DiscreteMeasure nu({0.5, 0.5});
    const TransportPlan p(1, 2, {0.5, 0.5}, mu, nu);
    // Serialized as a bare matrix; callers embed it under their own key.
    const Json out = ccc::to_json(p);
    ASSERT_TRUE(out.is_array());
    ASSERT_EQ(out.size(), 1u);
    ASSERT_EQ(out[0].size(), 2u);
    EXPECT_DOUBLE_EQ(out[0][1].get<double>(), 0.5);
}

}  // namespace
