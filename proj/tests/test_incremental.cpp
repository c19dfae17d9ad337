#include <cmath>
#include <random>
#include <set>
#include <unordered_map>

#include <doctest.h>

#include "ikm/errors.hpp"
#include "ikm/kmeans.hpp"
#include "test_helpers.hpp"

using namespace ikm;

namespace {

const std::vector<FeatureVector> kPoints = {{15.0}, {7.0}, {8.0}, {11.0},
                                            {5.0},  {14.0}, {3.0}, {1.0}};
const Init kInit = Init::centers({{15.0}, {5.0}, {1.0}});

ClusterModel fitted_model() { return lloyd_fit(kPoints, 3, kInit, Metric::Manhattan); }

// The same model with means rounded to one decimal; the reference
// distances 3.7/4.3/2.3 are exact against these.
ClusterModel printed_model() {
    ClusterModel m = fitted_model();
    m.clusters[0].centroid = {13.3};
    m.clusters[1].centroid = {6.7};
    m.clusters[2].centroid = {2.0};
    return m;
}

RecordLookup lookup_for(const std::vector<FeatureVector>& data) {
    return [&data](RecordId id) -> const FeatureVector* {
        const auto i = static_cast<std::size_t>(id);
        return i < data.size() ? &data[i] : nullptr;
    };
}

}  // namespace

TEST_CASE("inserting 17 and 9 lands them in clusters 0 and 1") {
    auto [model, assignments] =
        incremental_insert({{8, {17.0}}, {9, {9.0}}}, fitted_model(), false);
    REQUIRE(assignments.size() == 2);
    CHECK(assignments[0].cluster_index == 0);
    CHECK(assignments[0].distance == doctest::Approx(11.0 / 3.0).epsilon(1e-12));
    CHECK(assignments[1].cluster_index == 1);
    CHECK(assignments[1].distance == doctest::Approx(7.0 / 3.0).epsilon(1e-12));

    CHECK(model.clusters[0].members == std::set<RecordId>{0, 3, 5, 8});
    CHECK(model.clusters[1].members == std::set<RecordId>{1, 2, 4, 9});
    CHECK(model.clusters[2].members == std::set<RecordId>{6, 7});

    // the published distances use the one-decimal means
    auto [pm, passignments] =
        incremental_insert({{8, {17.0}}, {9, {9.0}}}, printed_model(), false);
    CHECK(passignments[0].cluster_index == 0);
    CHECK(std::abs(passignments[0].distance - 3.7) < 1e-9);
    CHECK(passignments[1].cluster_index == 1);
    CHECK(std::abs(passignments[1].distance - 2.3) < 1e-9);
    CHECK(helpers::membership(pm) == helpers::membership(model));
}

TEST_CASE("insertion then full refit give the same membership on this instance") {
    auto [inc_model, assignments] =
        incremental_insert({{8, {17.0}}, {9, {9.0}}}, fitted_model(), false);

    std::vector<FeatureVector> all = kPoints;
    all.push_back({17.0});
    all.push_back({9.0});
    ClusterModel refit = lloyd_fit(all, 3, kInit, Metric::Manhattan);
    CHECK(helpers::membership(inc_model) == helpers::membership(refit));
}

TEST_CASE("empty batch is a no-op") {
    const ClusterModel before = fitted_model();
    auto [after, assignments] = incremental_insert({}, before, false);
    CHECK(assignments.empty());
    CHECK(helpers::bitwise_equal(before, after));
}

TEST_CASE("4-attribute record goes to the nearest stored centroid") {
    ClusterModel model;
    model.metric = Metric::Euclidean;
    model.dimension = 4;
    model.clusters.resize(3);
    model.clusters[0] = {{24.0, 22.0, 12.0, 14.0}, {0}};
    model.clusters[1] = {{32.0, 42.0, 32.0, 27.0}, {1}};
    model.clusters[2] = {{15.0, 20.0, 9.0, 12.0}, {2}};

    auto [updated, assignments] = incremental_insert({{10, {21.0, 8.0, 9.0, 12.0}}}, model, false);
    REQUIRE(assignments.size() == 1);
    CHECK(assignments[0].cluster_index == 2);
    CHECK(assignments[0].distance == doctest::Approx(std::sqrt(180.0)).epsilon(1e-12));
    CHECK(updated.clusters[2].members.count(10) == 1);
}

TEST_CASE("insert errors") {
    CHECK_THROWS_WITH_AS(incremental_insert({{0, {4.0}}}, fitted_model(), false),
                         "duplicate record id 0", DataError);
    CHECK_THROWS_AS(incremental_insert({{20, {1.0, 2.0}}}, fitted_model(), false), DataError);
    CHECK_THROWS_AS(incremental_insert({{20, {std::nan("")}}}, fitted_model(), false), DataError);
    // same id twice within one batch
    CHECK_THROWS_AS(incremental_insert({{20, {4.0}}, {20, {5.0}}}, fitted_model(), false),
                    DataError);
}

TEST_CASE("update_means keeps the receiving centroid at the member mean") {
    std::mt19937_64 rng(41);
    const auto data = helpers::random_vectors(rng, 24, 3);
    ClusterModel model = lloyd_fit(data, 3, Init::first_k_distinct(), Metric::Euclidean);

    std::unordered_map<RecordId, FeatureVector> all;
    for (std::size_t i = 0; i < data.size(); ++i) all[static_cast<RecordId>(i)] = data[i];

    std::vector<std::pair<RecordId, FeatureVector>> batch;
    const auto extra = helpers::random_vectors(rng, 6, 3);
    for (std::size_t i = 0; i < extra.size(); ++i) {
        batch.emplace_back(static_cast<RecordId>(100 + i), extra[i]);
        all[static_cast<RecordId>(100 + i)] = extra[i];
    }

    auto [updated, assignments] = incremental_insert(batch, model, true);
    for (const auto& cluster : updated.clusters) {
        if (cluster.empty()) continue;
        FeatureVector mean(3, 0.0);
        for (RecordId id : cluster.members) {
            for (std::size_t j = 0; j < 3; ++j) mean[j] += all.at(id)[j];
        }
        for (std::size_t j = 0; j < 3; ++j) {
            mean[j] /= static_cast<double>(cluster.member_count());
            CHECK(cluster.centroid[j] == doctest::Approx(mean[j]).epsilon(1e-9));
        }
    }

    // without the flag, centroids stay bitwise frozen and the stored square
    // error remains the exact sum
    auto [frozen, fa] = incremental_insert(batch, model, false);
    for (std::size_t c = 0; c < model.k(); ++c) {
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(frozen.clusters[c].centroid[j] == model.clusters[c].centroid[j]);
        }
    }
    auto lookup = [&all](RecordId id) -> const FeatureVector* {
        auto it = all.find(id);
        return it == all.end() ? nullptr : &it->second;
    };
    CHECK(frozen.square_error == doctest::Approx(square_error(frozen, lookup)).epsilon(1e-12));
}

TEST_CASE("insert counts exactly k evaluations per record") {
    CostCounter counter;
    std::vector<std::pair<RecordId, FeatureVector>> batch;
    for (int i = 0; i < 7; ++i) batch.emplace_back(100 + i, FeatureVector{double(i)});
    incremental_insert(batch, fitted_model(), false, &counter);
    CHECK(counter.distance_evaluations == 3 * 7);
    CHECK(counter.lloyd_iterations == 0);
}

TEST_CASE("deleting 11 and 14 leaves means 15, 20/3, 2") {
    ClusterModel model = fitted_model();
    ClusterModel after = incremental_delete({3, 5}, model, lookup_for(kPoints));

    CHECK(after.clusters[0].members == std::set<RecordId>{0});
    CHECK(after.clusters[1].members == std::set<RecordId>{1, 2, 4});
    CHECK(after.clusters[2].members == std::set<RecordId>{6, 7});
    CHECK(after.clusters[0].centroid[0] == doctest::Approx(15.0).epsilon(1e-12));
    CHECK(after.clusters[1].centroid[0] == doctest::Approx(20.0 / 3.0).epsilon(1e-12));
    CHECK(after.clusters[2].centroid[0] == doctest::Approx(2.0).epsilon(1e-12));

    CHECK(after.square_error ==
          doctest::Approx(square_error(after, lookup_for(kPoints))).epsilon(1e-12));
}

TEST_CASE("deleting nothing changes nothing") {
    const ClusterModel model = fitted_model();
    ClusterModel after = incremental_delete({}, model, lookup_for(kPoints));
    CHECK(helpers::bitwise_equal(model, after));
}

TEST_CASE("deleting a whole cluster flags it empty and leaves the rest alone") {
    ClusterModel model = fitted_model();
    ClusterModel after = incremental_delete({6, 7}, model, lookup_for(kPoints));
    CHECK(after.clusters[2].empty());
    CHECK(after.clusters[2].centroid[0] == 2.0);  // keeps its last centroid
    for (std::size_t c : {std::size_t{0}, std::size_t{1}}) {
        CHECK(after.clusters[c].members == model.clusters[c].members);
        CHECK(after.clusters[c].centroid[0] == model.clusters[c].centroid[0]);
    }

    // an empty cluster no longer receives assignments
    const Assignment a = assign_point({2.0}, after);
    CHECK(a.cluster_index == 1);
}

TEST_CASE("delete errors") {
    ClusterModel model = fitted_model();
    CHECK_THROWS_WITH_AS(incremental_delete({42}, model, lookup_for(kPoints)),
                         "unknown record id 42", DataError);
    // unresolvable member during mean recomputation names the id
    auto broken = [](RecordId) -> const FeatureVector* { return nullptr; };
    CHECK_THROWS_AS(incremental_delete({3}, model, broken), DataError);
}

TEST_CASE("square error stays exact through frozen inserts and deletes") {
    std::mt19937_64 rng(67);
    const auto data = helpers::random_vectors(rng, 30, 2);
    std::unordered_map<RecordId, FeatureVector> all;
    for (std::size_t i = 0; i < data.size(); ++i) all[static_cast<RecordId>(i)] = data[i];
    auto lookup = [&all](RecordId id) -> const FeatureVector* {
        auto it = all.find(id);
        return it == all.end() ? nullptr : &it->second;
    };

    ClusterModel model = lloyd_fit(data, 4, Init::first_k_distinct(), Metric::Euclidean);
    std::vector<std::pair<RecordId, FeatureVector>> batch;
    const auto extra = helpers::random_vectors(rng, 5, 2);
    for (std::size_t i = 0; i < extra.size(); ++i) {
        const RecordId id = static_cast<RecordId>(500 + i);
        batch.emplace_back(id, extra[i]);
        all[id] = extra[i];
    }
    auto [inserted, assignments] = incremental_insert(batch, model, false);
    CHECK(inserted.square_error ==
          doctest::Approx(square_error(inserted, lookup)).epsilon(1e-12));

    // deleting from one cluster must not disturb the frozen centroids of the
    // others, and the stored square error must track the survivors exactly
    const RecordId victim = *inserted.clusters[assignments[0].cluster_index].members.begin();
    ClusterModel pruned = incremental_delete({victim}, inserted, lookup);
    CHECK(pruned.square_error == doctest::Approx(square_error(pruned, lookup)).epsilon(1e-12));
    for (std::size_t c = 0; c < pruned.k(); ++c) {
        if (c == assignments[0].cluster_index) continue;
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(pruned.clusters[c].centroid[j] == inserted.clusters[c].centroid[j]);
        }
    }
}

TEST_CASE("assign_point contract") {
    ClusterModel model = fitted_model();
    const Assignment a = assign_point(model.clusters[2].centroid, model);
    CHECK(a.cluster_index == 2);
    CHECK(a.distance == 0.0);

    CHECK_THROWS_AS(assign_point({1.0, 2.0}, model), DataError);

    ClusterModel empty = model;
    for (auto& c : empty.clusters) c.members.clear();
    CHECK_THROWS_WITH_AS(assign_point({1.0}, empty), "cannot assign: all clusters are empty",
                         DataError);
}

TEST_CASE("recompute_means restores mean consistency and square error") {
    ClusterModel model = fitted_model();
    // skew the centroids, then ask for a recompute
    model.clusters[0].centroid = {0.0};
    model.clusters[1].centroid = {100.0};
    ClusterModel fixed = recompute_means(model, lookup_for(kPoints));
    CHECK(fixed.clusters[0].centroid[0] == doctest::Approx(40.0 / 3.0).epsilon(1e-12));
    CHECK(fixed.clusters[1].centroid[0] == doctest::Approx(20.0 / 3.0).epsilon(1e-12));
    CHECK(fixed.square_error ==
          doctest::Approx(square_error(fixed, lookup_for(kPoints))).epsilon(1e-12));

    // single-member and empty clusters
    ClusterModel tiny;
    tiny.metric = Metric::Manhattan;
    tiny.dimension = 1;
    tiny.clusters.resize(2);
    tiny.clusters[0] = {{0.0}, {0}};
    tiny.clusters[1] = {{99.0}, {}};
    std::vector<FeatureVector> one = {{15.0}};
    ClusterModel out = recompute_means(tiny, lookup_for(one));
    CHECK(out.clusters[0].centroid[0] == 15.0);
    CHECK(out.clusters[1].centroid[0] == 99.0);  // empty: unchanged
    CHECK(out.clusters[1].empty());

    auto broken = [](RecordId) -> const FeatureVector* { return nullptr; };
    CHECK_THROWS_WITH_AS(recompute_means(tiny, broken), "unresolvable record id 0", DataError);
}

TEST_CASE("square_error oracle cases") {
    ClusterModel single;
    single.metric = Metric::Euclidean;
    single.dimension = 1;
    single.clusters.resize(1);
    single.clusters[0] = {{1.0}, {0, 1}};
    std::vector<FeatureVector> pts = {{0.0}, {2.0}};
    CHECK(square_error(single, lookup_for(pts)) == doctest::Approx(2.0).epsilon(1e-12));

    // every record exactly at its centroid
    ClusterModel exact;
    exact.metric = Metric::Manhattan;
    exact.dimension = 1;
    exact.clusters.resize(2);
    exact.clusters[0] = {{0.0}, {0}};
    exact.clusters[1] = {{2.0}, {1}};
    CHECK(square_error(exact, lookup_for(pts)) == 0.0);
}
