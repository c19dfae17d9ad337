#pragma once

#include <cstddef>
#include <set>
#include <vector>

#include "ikm/types.hpp"

namespace ikm {

// A cluster is its centroid (per-attribute mean) plus the ids of the records
// it holds. A cluster with no members is "empty": it keeps its last centroid
// and is skipped when assigning new records.
struct Cluster {
    FeatureVector centroid;
    std::set<RecordId> members;

    std::size_t member_count() const { return members.size(); }
    bool empty() const { return members.empty(); }
};

struct ClusterModel {
    std::vector<Cluster> clusters;
    Metric metric = Metric::Euclidean;
    int iterations = 0;
    double square_error = 0.0;
    std::size_t dimension = 0;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    std::size_t k() const { return clusters.size(); }

    std::size_t total_records() const {
        std::size_t n = 0;
        for (const auto& c : clusters) n += c.members.size();
        return n;
    }

    // Index of the cluster holding id, or npos.
    std::size_t cluster_of(RecordId id) const {
        for (std::size_t i = 0; i < clusters.size(); ++i) {
            if (clusters[i].members.count(id)) return i;
        }
        return npos;
    }

    bool contains(RecordId id) const { return cluster_of(id) != npos; }
};

}  // namespace ikm
