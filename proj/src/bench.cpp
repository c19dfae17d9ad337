#include "ikm/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "ikm/errors.hpp"
#include "ikm/kmeans.hpp"

namespace ikm {

namespace {

double median(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double now_ms_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed ^ (salt + 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::string fmt(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

double cost_value(const Cost& c, CostBasis basis) {
    return basis == CostBasis::WallTime ? c.wall_ms : static_cast<double>(c.distance_evaluations);
}

}  // namespace

std::string basis_name(CostBasis basis) {
    return basis == CostBasis::WallTime ? "wall-time" : "distance-evaluations";
}

double delta_percent(std::size_t old_size, std::size_t new_size) {
    if (old_size < 1) throw DataError("delta_percent: old size must be at least 1");
    if (new_size < old_size) {
        throw DataError("delta_percent: new size " + std::to_string(new_size) +
                        " is below old size " + std::to_string(old_size) +
                        " (deletions are not measured on this scale)");
    }
    // multiply before dividing so grid sizes land on exact percentages
    return static_cast<double>(new_size - old_size) * 100.0 / static_cast<double>(old_size);
}

std::vector<std::pair<RecordId, FeatureVector>> resample_batch(const Dataset& base,
                                                               std::size_t count,
                                                               std::uint64_t seed, double noise,
                                                               RecordId first_id) {
    if (base.empty()) throw DataError("cannot resample from an empty dataset");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, base.records.size() - 1);
    std::uniform_real_distribution<double> jitter(1.0 - noise, 1.0 + noise);
    std::vector<std::pair<RecordId, FeatureVector>> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        FeatureVector v = base.records[pick(rng)].values;
        for (double& x : v) x *= jitter(rng);
        out.emplace_back(first_id + static_cast<RecordId>(i), std::move(v));
    }
    return out;
}

DeltaSeries run_benchmark(const Dataset& base, const std::vector<std::size_t>& deltas,
                          std::size_t k, Metric metric, const BenchConfig& config) {
    if (deltas.empty()) throw DataError("empty delta grid");
    for (std::size_t i = 0; i < deltas.size(); ++i) {
        if (deltas[i] == 0) throw DataError("delta batch sizes must be positive");
        if (i > 0 && deltas[i] <= deltas[i - 1]) {
            throw DataError("delta batch sizes must be strictly increasing");
        }
    }
    const std::size_t n = base.records.size();
    if (k < 1) throw DataError("k must be at least 1");
    if (k > n) {
        throw DataError("k (" + std::to_string(k) + ") exceeds base size (" + std::to_string(n) +
                        ")");
    }
    if (config.repetitions < 1) throw DataError("repetitions must be at least 1");
    if (config.extension && deltas.back() > config.extension->records.size()) {
        throw DataError("batch of " + std::to_string(deltas.back()) +
                        " exceeds available extension data (" +
                        std::to_string(config.extension->records.size()) + " records)");
    }

    const auto base_vectors = base.vectors();
    const Init init = Init::first_k_distinct();

    DeltaSeries series;
    series.base_size = n;
    series.config = config;
    series.config.extension = nullptr;

    // Base fit: the model the incremental path updates, measured on its own
    // as the opening row of the full-path table.
    ClusterModel base_model;
    {
        std::vector<double> walls;
        CostCounter counter;
        for (int rep = 0; rep < config.repetitions; ++rep) {
            counter = {};
            const auto t0 = std::chrono::steady_clock::now();
            base_model = lloyd_fit(base_vectors, k, init, metric, config.max_iterations, &counter);
            walls.push_back(now_ms_since(t0));
        }
        series.base_fit.wall_ms = config.measure_wall_time ? median(walls) : 0.0;
        series.base_fit.distance_evaluations = counter.distance_evaluations;
        series.base_fit.iterations = static_cast<int>(counter.lloyd_iterations);
    }

    RecordId next_id = static_cast<RecordId>(n);
    for (std::size_t pi = 0; pi < deltas.size(); ++pi) {
        const std::size_t m = deltas[pi];

        std::vector<std::pair<RecordId, FeatureVector>> batch;
        if (config.extension) {
            for (std::size_t i = 0; i < m; ++i) {
                batch.emplace_back(next_id + static_cast<RecordId>(i),
                                   config.extension->records[i].values);
            }
        } else {
            batch = resample_batch(base, m, mix_seed(config.seed, m), config.noise, next_id);
        }

        DeltaPoint point;
        point.batch_size = m;
        point.delta_percent = delta_percent(n, n + m);

        // Full path: refit from the same init over base + batch.
        {
            std::vector<FeatureVector> all = base_vectors;
            for (const auto& [id, v] : batch) all.push_back(v);
            std::vector<double> walls;
            CostCounter counter;
            for (int rep = 0; rep < config.repetitions; ++rep) {
                counter = {};
                const auto t0 = std::chrono::steady_clock::now();
                ClusterModel refit =
                    lloyd_fit(all, k, init, metric, config.max_iterations, &counter);
                walls.push_back(now_ms_since(t0));
                (void)refit;
            }
            point.full_cost.wall_ms = config.measure_wall_time ? median(walls) : 0.0;
            point.full_cost.distance_evaluations = counter.distance_evaluations;
            point.full_cost.iterations = static_cast<int>(counter.lloyd_iterations);
        }

        // Incremental path: direct assignment against the pre-fitted model.
        {
            std::vector<double> walls;
            CostCounter counter;
            for (int rep = 0; rep < config.repetitions; ++rep) {
                counter = {};
                ClusterModel copy = base_model;  // copied outside the timed window
                const auto t0 = std::chrono::steady_clock::now();
                auto [updated, assignments] =
                    incremental_insert(batch, std::move(copy), config.update_means, &counter);
                walls.push_back(now_ms_since(t0));
                (void)updated;
                (void)assignments;
            }
            point.incremental_cost.wall_ms = config.measure_wall_time ? median(walls) : 0.0;
            point.incremental_cost.distance_evaluations = counter.distance_evaluations;
            point.incremental_cost.iterations = 0;
        }

        series.points.push_back(std::move(point));
    }
    return series;
}

ThresholdEstimate estimate_threshold(const DeltaSeries& series, CostBasis basis) {
    ThresholdEstimate est;
    est.basis = basis;
    for (std::size_t i = 0; i + 1 < series.points.size(); ++i) {
        const DeltaPoint& a = series.points[i];
        const DeltaPoint& b = series.points[i + 1];
        const double diff0 = cost_value(a.incremental_cost, basis) - cost_value(a.full_cost, basis);
        const double diff1 = cost_value(b.incremental_cost, basis) - cost_value(b.full_cost, basis);
        if (diff0 <= 0.0 && diff1 > 0.0) {
            const double s = (0.0 - diff0) / (diff1 - diff0);
            est.found = true;
            est.bracket_low = a.delta_percent;
            est.bracket_high = b.delta_percent;
            est.crossover_percent = a.delta_percent + s * (b.delta_percent - a.delta_percent);
            return est;
        }
    }
    return est;
}

void emit_report(const DeltaSeries& series, const ThresholdEstimate& estimate,
                 const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create directory " + out_dir + ": " + ec.message());

    auto write = [&](const std::string& name, const std::string& content) {
        const std::string path = out_dir + "/" + name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write file: " + path);
        out << content;
        if (!out) throw IoError("write failed: " + path);
    };

    {
        std::ostringstream csv;
        csv << "size,median_ms,distance_evaluations,iterations\n";
        csv << series.base_size << ',' << fmt(series.base_fit.wall_ms) << ','
            << series.base_fit.distance_evaluations << ',' << series.base_fit.iterations << "\n";
        for (const DeltaPoint& p : series.points) {
            csv << (series.base_size + p.batch_size) << ',' << fmt(p.full_cost.wall_ms) << ','
                << p.full_cost.distance_evaluations << ',' << p.full_cost.iterations << "\n";
        }
        write("full_times.csv", csv.str());
    }
    {
        std::ostringstream csv;
        csv << "batch_size,median_ms,distance_evaluations\n";
        for (const DeltaPoint& p : series.points) {
            csv << p.batch_size << ',' << fmt(p.incremental_cost.wall_ms) << ','
                << p.incremental_cost.distance_evaluations << "\n";
        }
        write("incremental_times.csv", csv.str());
    }
    {
        std::ostringstream csv;
        csv << "delta_percent,full_ms,incremental_ms\n";
        for (const DeltaPoint& p : series.points) {
            csv << fmt(p.delta_percent) << ',' << fmt(p.full_cost.wall_ms) << ','
                << fmt(p.incremental_cost.wall_ms) << "\n";
        }
        write("combined.csv", csv.str());
    }
    {
        std::ostringstream csv;
        csv << "delta_percent,full_evals,incremental_evals\n";
        for (const DeltaPoint& p : series.points) {
            csv << fmt(p.delta_percent) << ',' << p.full_cost.distance_evaluations << ','
                << p.incremental_cost.distance_evaluations << "\n";
        }
        write("combined_evals.csv", csv.str());
    }
    {
        std::ostringstream dat;
        dat << "# delta_percent full_ms incremental_ms\n";
        for (const DeltaPoint& p : series.points) {
            dat << fmt(p.delta_percent) << ' ' << fmt(p.full_cost.wall_ms) << ' '
                << fmt(p.incremental_cost.wall_ms) << "\n";
        }
        write("plot.dat", dat.str());
    }
    {
        std::ostringstream txt;
        txt << "base size: " << series.base_size << "\n";
        txt << "delta points: " << series.points.size();
        if (!series.points.empty()) {
            txt << " (" << fmt(series.points.front().delta_percent) << "% .. "
                << fmt(series.points.back().delta_percent) << "%)";
        }
        txt << "\n";
        txt << "cost basis: " << basis_name(estimate.basis) << "\n";
        if (estimate.found) {
            txt << "crossover: " << fmt(estimate.crossover_percent) << "% (bracket "
                << fmt(estimate.bracket_low) << "% .. " << fmt(estimate.bracket_high) << "%)\n";
            txt << "policy: at or below " << fmt(estimate.crossover_percent)
                << "% database growth, use the previous result (assign new records against the "
                   "stored centroids); above it, rerun the full clustering.\n";
        } else {
            txt << "crossover: no crossover observed in range\n";
            const bool incremental_ahead =
                series.points.empty() ||
                cost_value(series.points.back().incremental_cost, estimate.basis) <=
                    cost_value(series.points.back().full_cost, estimate.basis);
            if (incremental_ahead) {
                txt << "policy: within the measured range the incremental path stayed at or "
                       "below the full rerun; keep using the previous result and re-benchmark "
                       "at larger growth.\n";
            } else {
                txt << "policy: the incremental path was already more expensive at the measured "
                       "growth points; rerun the full clustering.\n";
            }
        }
        write("summary.txt", txt.str());
    }
}

}  // namespace ikm
