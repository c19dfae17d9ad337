#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "ikm/model.hpp"

namespace ikm {

// Resolves a record id to its vector; returns nullptr for unknown ids.
// Callers own the storage behind the returned pointer.
using RecordLookup = std::function<const FeatureVector*(RecordId)>;

// Per-pass snapshots of the Lloyd loop, for step-level comparison against an
// independent implementation. sse[i] is the sum of squared best distances in
// pass i (non-increasing under the Euclidean metric).
struct FitTrace {
    std::vector<std::vector<std::size_t>> assignments;
    std::vector<double> sse;
};

double distance(const FeatureVector& a, const FeatureVector& b, Metric metric,
                CostCounter* counter = nullptr);

// Nearest non-empty centroid; ties go to the later cluster. Does not mutate
// the model. Errors if every cluster is empty or dimensions differ.
Assignment assign_point(const FeatureVector& x, const ClusterModel& model,
                        CostCounter* counter = nullptr);

// Batch K-means. Alternates nearest-centroid assignment and mean updates
// until the assignment vector repeats or max_iterations passes have run.
// Record ids in the returned model are data positions 0..n-1; the ids
// overload substitutes caller-supplied ids.
ClusterModel lloyd_fit(std::span<const FeatureVector> data, std::size_t k, const Init& init,
                       Metric metric, int max_iterations = 100,
                       CostCounter* counter = nullptr, FitTrace* trace = nullptr);

ClusterModel lloyd_fit(std::span<const FeatureVector> data, std::span<const RecordId> ids,
                       std::size_t k, const Init& init, Metric metric, int max_iterations = 100,
                       CostCounter* counter = nullptr, FitTrace* trace = nullptr);

// Replaces every non-empty cluster's centroid with the arithmetic mean of its
// members and recomputes square_error. Empty clusters keep their centroid.
ClusterModel recompute_means(const ClusterModel& model, const RecordLookup& lookup);

// Assigns each batch record to its nearest cluster, in order, against the
// model state current at its turn. With update_means the receiving centroid
// is moved to the running member mean after each insert; without it (the
// default policy) centroids are left untouched. square_error grows by each
// record's at-assignment squared distance, which keeps it exact while
// centroids are frozen and makes it a running estimate when they move.
// The model is taken by value; pass std::move to update in place.
std::pair<ClusterModel, std::vector<Assignment>>
incremental_insert(const std::vector<std::pair<RecordId, FeatureVector>>& batch,
                   ClusterModel model, bool update_means, CostCounter* counter = nullptr);

// Removes the ids from their clusters, recomputes the affected clusters'
// means, and adjusts square_error by the affected clusters' contribution
// only. A cluster losing all members keeps its centroid and becomes empty.
ClusterModel incremental_delete(const std::vector<RecordId>& ids, const ClusterModel& model,
                                const RecordLookup& lookup);

// Sum over all records of squared distance to their assigned centroid.
double square_error(const ClusterModel& model, const RecordLookup& lookup,
                    CostCounter* counter = nullptr);

}  // namespace ikm
