#include "ikm/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "ikm/errors.hpp"

namespace ikm {

std::string metric_name(Metric metric) {
    return metric == Metric::Manhattan ? "manhattan" : "euclidean";
}

Metric parse_metric(const std::string& name) {
    if (name == "manhattan") return Metric::Manhattan;
    if (name == "euclidean") return Metric::Euclidean;
    throw DataError("unknown metric tag '" + name + "' (expected manhattan or euclidean)");
}

namespace {

// Uncounted kernel; the public distance() adds precondition checks and the
// counter tick.
double metric_dist(const FeatureVector& a, const FeatureVector& b, Metric metric) {
    double acc = 0.0;
    if (metric == Metric::Manhattan) {
        for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
        return acc;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

void check_finite(const FeatureVector& v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) throw DataError(std::string(what) + " contains a non-finite value");
    }
}

FeatureVector mean_of(const std::set<RecordId>& members, const RecordLookup& lookup,
                      std::size_t dimension) {
    FeatureVector sum(dimension, 0.0);
    for (RecordId id : members) {
        const FeatureVector* v = lookup(id);
        if (!v) throw DataError("unresolvable record id " + std::to_string(id));
        if (v->size() != dimension) {
            throw DataError("record " + std::to_string(id) + " has dimension " +
                            std::to_string(v->size()) + ", model has " + std::to_string(dimension));
        }
        for (std::size_t j = 0; j < dimension; ++j) sum[j] += (*v)[j];
    }
    for (std::size_t j = 0; j < dimension; ++j) sum[j] /= static_cast<double>(members.size());
    return sum;
}

double cluster_sse(const Cluster& cluster, const ClusterModel& model, const RecordLookup& lookup) {
    double acc = 0.0;
    for (RecordId id : cluster.members) {
        const FeatureVector* v = lookup(id);
        if (!v) throw DataError("unresolvable record id " + std::to_string(id));
        const double d = metric_dist(*v, cluster.centroid, model.metric);
        acc += d * d;
    }
    return acc;
}

std::vector<FeatureVector> initial_centers(std::span<const FeatureVector> data, std::size_t k,
                                           const Init& init, std::size_t dimension) {
    if (init.kind() == Init::Kind::ExplicitCenters) {
        const auto& centers = init.explicit_centers();
        if (centers.size() != k) {
            throw DataError("explicit init supplies " + std::to_string(centers.size()) +
                            " centers, k is " + std::to_string(k));
        }
        for (const auto& c : centers) {
            if (c.size() != dimension) {
                throw DataError("explicit center has dimension " + std::to_string(c.size()) +
                                ", data has " + std::to_string(dimension));
            }
            check_finite(c, "explicit center");
        }
        return centers;
    }
    std::vector<FeatureVector> centers;
    for (const auto& v : data) {
        if (std::find(centers.begin(), centers.end(), v) == centers.end()) {
            centers.push_back(v);
            if (centers.size() == k) break;
        }
    }
    if (centers.size() < k) {
        throw DataError("first-k-distinct init found only " + std::to_string(centers.size()) +
                        " distinct vectors, k is " + std::to_string(k));
    }
    return centers;
}

}  // namespace

double distance(const FeatureVector& a, const FeatureVector& b, Metric metric,
                CostCounter* counter) {
    if (a.size() != b.size()) {
        throw DataError("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()));
    }
    if (counter) ++counter->distance_evaluations;
    return metric_dist(a, b, metric);
}

Assignment assign_point(const FeatureVector& x, const ClusterModel& model, CostCounter* counter) {
    if (x.size() != model.dimension) {
        throw DataError("dimension mismatch: record has " + std::to_string(x.size()) +
                        ", model has " + std::to_string(model.dimension));
    }
    check_finite(x, "record");
    Assignment best;
    bool any = false;
    for (std::size_t i = 0; i < model.clusters.size(); ++i) {
        const Cluster& cluster = model.clusters[i];
        if (cluster.empty()) continue;
        const double d = distance(x, cluster.centroid, model.metric, counter);
        if (!any || d <= best.distance) {
            best = {i, d};
            any = true;
        }
    }
    if (!any) throw DataError("cannot assign: all clusters are empty");
    return best;
}

ClusterModel lloyd_fit(std::span<const FeatureVector> data, std::span<const RecordId> ids,
                       std::size_t k, const Init& init, Metric metric, int max_iterations,
                       CostCounter* counter, FitTrace* trace) {
    const std::size_t n = data.size();
    if (n == 0) throw DataError("cannot fit: empty data");
    if (k < 1) throw DataError("k must be at least 1");
    if (k > n) {
        throw DataError("k (" + std::to_string(k) + ") exceeds record count (" +
                        std::to_string(n) + ")");
    }
    if (max_iterations < 1) throw DataError("max_iterations must be at least 1");
    if (ids.size() != n) throw DataError("ids and data differ in length");

    const std::size_t dimension = data[0].size();
    if (dimension == 0) throw DataError("records must have dimension >= 1");
    for (const auto& v : data) {
        if (v.size() != dimension) {
            throw DataError("mixed dimensions in data: " + std::to_string(v.size()) + " vs " +
                            std::to_string(dimension));
        }
        check_finite(v, "record");
    }
    {
        std::set<RecordId> seen(ids.begin(), ids.end());
        if (seen.size() != n) throw DataError("duplicate record ids in fit data");
    }

    std::vector<FeatureVector> centroids = initial_centers(data, k, init, dimension);
    std::vector<std::size_t> assignment(n, 0), prev;
    std::vector<double> best_dist(n, 0.0);
    int iterations = 0;
    bool converged = false;

    while (iterations < max_iterations) {
        // Assignment pass. Every centroid competes, including those of
        // currently empty clusters; ties go to the later centroid.
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t best = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double d = distance(data[i], centroids[c], metric, counter);
                if (d <= bd) {
                    bd = d;
                    best = c;
                }
            }
            assignment[i] = best;
            best_dist[i] = bd;
        }
        ++iterations;
        if (counter) ++counter->lloyd_iterations;
        if (trace) {
            trace->assignments.push_back(assignment);
            double sse = 0.0;
            for (double d : best_dist) sse += d * d;
            trace->sse.push_back(sse);
        }
        if (!prev.empty() && assignment == prev) {
            converged = true;
            break;
        }
        prev = assignment;

        // Mean update; an empty cluster keeps its previous centroid.
        std::vector<FeatureVector> sums(k, FeatureVector(dimension, 0.0));
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t c = assignment[i];
            ++counts[c];
            for (std::size_t j = 0; j < dimension; ++j) sums[c][j] += data[i][j];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            for (std::size_t j = 0; j < dimension; ++j) {
                centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
            }
        }
    }

    ClusterModel model;
    model.metric = metric;
    model.dimension = dimension;
    model.iterations = iterations;
    model.clusters.resize(k);
    for (std::size_t c = 0; c < k; ++c) model.clusters[c].centroid = centroids[c];
    for (std::size_t i = 0; i < n; ++i) model.clusters[assignment[i]].members.insert(ids[i]);

    if (converged) {
        // The last pass ran against centroids that already equal the member
        // means, so its best distances give the final square error directly.
        double sse = 0.0;
        for (double d : best_dist) sse += d * d;
        model.square_error = sse;
    } else {
        // Stopped at max_iterations right after a mean update; recompute
        // against the moved centroids. Not counted: the counter tracks
        // assignment-pass evaluations.
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = metric_dist(data[i], model.clusters[assignment[i]].centroid, metric);
            sse += d * d;
        }
        model.square_error = sse;
    }
    return model;
}

ClusterModel lloyd_fit(std::span<const FeatureVector> data, std::size_t k, const Init& init,
                       Metric metric, int max_iterations, CostCounter* counter, FitTrace* trace) {
    std::vector<RecordId> ids(data.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<RecordId>(i);
    return lloyd_fit(data, ids, k, init, metric, max_iterations, counter, trace);
}

ClusterModel recompute_means(const ClusterModel& model, const RecordLookup& lookup) {
    ClusterModel out = model;
    for (auto& cluster : out.clusters) {
        if (cluster.empty()) continue;
        cluster.centroid = mean_of(cluster.members, lookup, out.dimension);
    }
    double sse = 0.0;
    for (const auto& cluster : out.clusters) sse += cluster_sse(cluster, out, lookup);
    out.square_error = sse;
    return out;
}

std::pair<ClusterModel, std::vector<Assignment>>
incremental_insert(const std::vector<std::pair<RecordId, FeatureVector>>& batch,
                   ClusterModel model, bool update_means, CostCounter* counter) {
    ClusterModel out = std::move(model);
    std::vector<Assignment> assignments;
    assignments.reserve(batch.size());
    for (const auto& [id, vec] : batch) {
        if (vec.size() != out.dimension) {
            throw DataError("record " + std::to_string(id) + " has dimension " +
                            std::to_string(vec.size()) + ", model has " +
                            std::to_string(out.dimension));
        }
        check_finite(vec, "record");
        if (out.contains(id)) throw DataError("duplicate record id " + std::to_string(id));

        const Assignment a = assign_point(vec, out, counter);
        Cluster& cluster = out.clusters[a.cluster_index];
        cluster.members.insert(id);
        if (update_means) {
            const double count = static_cast<double>(cluster.members.size());
            for (std::size_t j = 0; j < out.dimension; ++j) {
                cluster.centroid[j] += (vec[j] - cluster.centroid[j]) / count;
            }
        }
        out.square_error += a.distance * a.distance;
        assignments.push_back(a);
    }
    return {std::move(out), std::move(assignments)};
}

ClusterModel incremental_delete(const std::vector<RecordId>& ids, const ClusterModel& model,
                                const RecordLookup& lookup) {
    ClusterModel out = model;
    if (ids.empty()) return out;

    std::set<std::size_t> affected;
    for (RecordId id : ids) {
        const std::size_t c = out.cluster_of(id);
        if (c == ClusterModel::npos) throw DataError("unknown record id " + std::to_string(id));
        affected.insert(c);
        out.clusters[c].members.erase(id);
    }

    double old_contribution = 0.0;
    for (std::size_t c : affected) old_contribution += cluster_sse(model.clusters[c], model, lookup);

    double new_contribution = 0.0;
    for (std::size_t c : affected) {
        Cluster& cluster = out.clusters[c];
        if (cluster.empty()) continue;  // keeps its last centroid, flagged by count 0
        cluster.centroid = mean_of(cluster.members, lookup, out.dimension);
        new_contribution += cluster_sse(cluster, out, lookup);
    }
    out.square_error = std::max(0.0, out.square_error - old_contribution + new_contribution);
    return out;
}

double square_error(const ClusterModel& model, const RecordLookup& lookup, CostCounter* counter) {
    double acc = 0.0;
    for (const auto& cluster : model.clusters) {
        for (RecordId id : cluster.members) {
            const FeatureVector* v = lookup(id);
            if (!v) throw DataError("unresolvable record id " + std::to_string(id));
            const double d = distance(*v, cluster.centroid, model.metric, counter);
            acc += d * d;
        }
    }
    return acc;
}

}  // namespace ikm
