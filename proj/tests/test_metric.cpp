#include <cmath>
#include <random>

#include <doctest.h>

#include "ikm/errors.hpp"
#include "ikm/kmeans.hpp"
#include "test_helpers.hpp"

using namespace ikm;

TEST_CASE("manhattan distance matches hand-checked values") {
    CHECK(distance({15.0}, {5.0}, Metric::Manhattan) == 10.0);
    CHECK(distance({3.0}, {5.0}, Metric::Manhattan) == 2.0);
    CHECK(distance({1.0, -2.0, 3.0}, {-1.0, 2.0, 0.0}, Metric::Manhattan) == 9.0);
}

TEST_CASE("euclidean distance on the 4-attribute insertion example") {
    const FeatureVector x = {21.0, 8.0, 9.0, 12.0};
    CHECK(distance(x, {24.0, 22.0, 12.0, 14.0}, Metric::Euclidean) ==
          doctest::Approx(std::sqrt(218.0)).epsilon(1e-12));
    CHECK(distance(x, {32.0, 42.0, 32.0, 27.0}, Metric::Euclidean) ==
          doctest::Approx(std::sqrt(2031.0)).epsilon(1e-12));
    CHECK(distance(x, {15.0, 20.0, 9.0, 12.0}, Metric::Euclidean) ==
          doctest::Approx(std::sqrt(180.0)).epsilon(1e-12));
    CHECK(distance(x, {15.0, 20.0, 9.0, 12.0}, Metric::Euclidean) ==
          doctest::Approx(13.4164).epsilon(1e-4));
}

TEST_CASE("identical points are at distance zero under both metrics") {
    const FeatureVector v = {1.5, -2.25, 0.0};
    CHECK(distance(v, v, Metric::Manhattan) == 0.0);
    CHECK(distance(v, v, Metric::Euclidean) == 0.0);
}

TEST_CASE("dimension mismatch names both dimensions") {
    CHECK_THROWS_WITH_AS(distance({1.0, 2.0, 3.0}, {1.0, 2.0, 3.0, 4.0}, Metric::Euclidean),
                         "dimension mismatch: 3 vs 4", DataError);
}

TEST_CASE("counter ticks once per evaluation") {
    CostCounter counter;
    distance({1.0}, {2.0}, Metric::Manhattan, &counter);
    distance({1.0}, {2.0}, Metric::Euclidean, &counter);
    CHECK(counter.distance_evaluations == 2);
    distance({1.0}, {2.0}, Metric::Euclidean);  // no counter attached
    CHECK(counter.distance_evaluations == 2);
}

TEST_CASE("metric axioms hold on random triples") {
    std::mt19937_64 rng(20260809);
    for (int iter = 0; iter < 250; ++iter) {
        const std::size_t dim = 1 + rng() % 6;
        const auto pts = helpers::random_vectors(rng, 3, dim);
        for (Metric metric : {Metric::Manhattan, Metric::Euclidean}) {
            const double xy = distance(pts[0], pts[1], metric);
            const double yx = distance(pts[1], pts[0], metric);
            const double xz = distance(pts[0], pts[2], metric);
            const double yz = distance(pts[1], pts[2], metric);
            CHECK(distance(pts[0], pts[0], metric) == 0.0);
            CHECK(xy == yx);
            CHECK(xy >= 0.0);
            CHECK(xz <= xy + yz + 1e-9);
        }
    }
}

TEST_CASE("metric tags parse and render") {
    CHECK(metric_name(Metric::Manhattan) == "manhattan");
    CHECK(metric_name(Metric::Euclidean) == "euclidean");
    CHECK(parse_metric("manhattan") == Metric::Manhattan);
    CHECK(parse_metric("euclidean") == Metric::Euclidean);
    CHECK_THROWS_AS(parse_metric("chebyshev"), DataError);
}
