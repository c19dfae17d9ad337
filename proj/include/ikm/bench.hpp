#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ikm/dataset.hpp"
#include "ikm/types.hpp"

namespace ikm {

// One measured clustering call. Wall time is hardware-bound and kept for
// comparability with stopwatch-style measurements; distance_evaluations is
// the reproducible cost basis.
struct Cost {
    double wall_ms = 0.0;
    std::uint64_t distance_evaluations = 0;
    int iterations = 0;
};

struct DeltaPoint {
    std::size_t batch_size = 0;
    double delta_percent = 0.0;  // always derived from (base, base + batch)
    Cost full_cost;              // refit over base + batch
    Cost incremental_cost;       // direct assignment of the batch
};

enum class CostBasis { WallTime, DistanceEvals };

std::string basis_name(CostBasis basis);

struct BenchConfig {
    int repetitions = 5;
    std::uint64_t seed = 42;
    double noise = 0.05;  // +/- fraction applied when resampling base rows
    int max_iterations = 100;
    bool update_means = false;
    bool measure_wall_time = true;  // false zeroes the wall columns (reproducible reports)
    const Dataset* extension = nullptr;  // batches come from here instead of resampling
};

struct DeltaSeries {
    std::size_t base_size = 0;
    Cost base_fit;  // fitting the base model alone (first row of the full-path table)
    std::vector<DeltaPoint> points;  // strictly increasing delta_percent
    BenchConfig config;              // as run; extension pointer cleared
};

struct ThresholdEstimate {
    CostBasis basis = CostBasis::WallTime;
    bool found = false;
    double crossover_percent = 0.0;
    double bracket_low = 0.0;
    double bracket_high = 0.0;
};

// Percentage growth (new - old) / old * 100. Shrinking databases are not
// measured on this scale.
double delta_percent(std::size_t old_size, std::size_t new_size);

// Draw `count` records by resampling base rows with multiplicative noise in
// [1-noise, 1+noise]; ids run from first_id. Deterministic in seed.
std::vector<std::pair<RecordId, FeatureVector>> resample_batch(const Dataset& base,
                                                               std::size_t count,
                                                               std::uint64_t seed, double noise,
                                                               RecordId first_id);

// For each batch size m: measure a full refit over base+batch and an
// incremental insert of the batch against the pre-fitted base model, each
// repeated config.repetitions times with the median wall time reported.
// Both paths share first-k-distinct initialization. Strictly sequential.
DeltaSeries run_benchmark(const Dataset& base, const std::vector<std::size_t>& deltas,
                          std::size_t k, Metric metric, const BenchConfig& config);

// First adjacent pair where incremental <= full flips to incremental > full,
// resolved by linear interpolation between the grid points. Not found is a
// valid outcome.
ThresholdEstimate estimate_threshold(const DeltaSeries& series, CostBasis basis);

// Writes full_times.csv, incremental_times.csv, combined.csv,
// combined_evals.csv, plot.dat, and summary.txt into out_dir. Byte-identical
// for identical inputs.
void emit_report(const DeltaSeries& series, const ThresholdEstimate& estimate,
                 const std::string& out_dir);

}  // namespace ikm
