#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ikm {

using RecordId = std::int64_t;

// One database row's numeric attributes. All values finite; every vector in
// a dataset shares the same dimension.
using FeatureVector = std::vector<double>;

enum class Metric { Manhattan, Euclidean };

std::string metric_name(Metric metric);
Metric parse_metric(const std::string& name);  // throws DataError on unknown tag

struct Assignment {
    std::size_t cluster_index = 0;
    double distance = 0.0;
};

// Hardware-independent cost proxy: one tick per metric evaluation, one per
// assignment pass of the Lloyd loop.
struct CostCounter {
    std::uint64_t distance_evaluations = 0;
    std::uint64_t lloyd_iterations = 0;
};

// Centroid initialization. first_k_distinct() takes the first k pairwise
// distinct vectors in input order; centers() uses the given vectors verbatim.
// Both are deterministic.
class Init {
public:
    enum class Kind { FirstKDistinct, ExplicitCenters };

    static Init first_k_distinct() { return Init(Kind::FirstKDistinct, {}); }
    static Init centers(std::vector<FeatureVector> centers) {
        return Init(Kind::ExplicitCenters, std::move(centers));
    }

    Kind kind() const { return kind_; }
    const std::vector<FeatureVector>& explicit_centers() const { return centers_; }

private:
    Init(Kind kind, std::vector<FeatureVector> centers)
        : kind_(kind), centers_(std::move(centers)) {}

    Kind kind_;
    std::vector<FeatureVector> centers_;
};

}  // namespace ikm
