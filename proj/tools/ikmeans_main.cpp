// ikmeans: fit, incrementally update, prune, and benchmark K-means models
// whose centroids persist between runs.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ikm/bench.hpp"
#include "ikm/errors.hpp"
#include "ikm/ingest.hpp"
#include "ikm/kmeans.hpp"
#include "ikm/store.hpp"

namespace {

using namespace ikm;

struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f%%", v);
    return buf;
}

std::string num6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

bool is_arff_path(const std::string& path) {
    std::string ext = std::filesystem::path(path).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext == ".arff";
}

struct IngestFlags {
    std::string format;  // "", "arff", "csv"
    std::vector<std::string> features;
    std::string id_column;
    bool skip_missing = false;
    bool no_header = false;
};

void add_ingest_flags(CLI::App* cmd, IngestFlags& flags) {
    cmd->add_option("--format", flags.format, "Input format: arff or csv (default: by extension)")
        ->check(CLI::IsMember({"arff", "csv"}));
    cmd->add_option("--features", flags.features,
                    "Comma-separated numeric columns to use as features")
        ->delimiter(',');
    cmd->add_option("--id-column", flags.id_column,
                    "Integer column supplying record ids (default: row order)");
    cmd->add_flag("--skip-missing", flags.skip_missing, "Drop rows containing '?'");
    cmd->add_flag("--no-header", flags.no_header, "CSV has no header row");
}

Dataset load_dataset(const std::string& path, const IngestFlags& flags) {
    ParseOptions options;
    options.feature_columns = flags.features;
    options.id_column = flags.id_column;
    options.skip_missing = flags.skip_missing;
    options.has_header = !flags.no_header;
    const bool arff = flags.format.empty() ? is_arff_path(path) : flags.format == "arff";
    Dataset ds = arff ? parse_arff(path, options) : parse_csv(path, options);
    if (ds.skipped_missing > 0) {
        std::cerr << "note: skipped " << ds.skipped_missing << " rows with missing values\n";
    }
    return ds;
}

double parse_double(const std::string& token, const std::string& what) {
    std::string t = token;
    while (!t.empty() && (t.front() == ' ' || t.front() == '\t')) t.erase(t.begin());
    while (!t.empty() && (t.back() == ' ' || t.back() == '\t' || t.back() == '\r')) t.pop_back();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
        throw UsageError("bad " + what + " '" + token + "'");
    }
    return value;
}

std::vector<FeatureVector> parse_centers(const std::string& text) {
    std::vector<FeatureVector> centers;
    std::istringstream by_center(text);
    std::string one;
    while (std::getline(by_center, one, ';')) {
        FeatureVector v;
        std::istringstream by_coord(one);
        std::string coord;
        while (std::getline(by_coord, coord, ',')) {
            v.push_back(parse_double(coord, "--centers coordinate"));
        }
        if (v.empty()) throw UsageError("empty center in --centers");
        centers.push_back(std::move(v));
    }
    if (centers.empty()) throw UsageError("--centers is empty");
    return centers;
}

void print_cluster_table(const ClusterModel& model, const std::vector<std::string>& names,
                         std::ostream& out) {
    char cell[48];
    out << "cluster    count";
    for (const auto& name : names) {
        std::snprintf(cell, sizeof(cell), "  %12s", name.c_str());
        out << cell;
    }
    out << "\n";
    for (std::size_t c = 0; c < model.k(); ++c) {
        std::snprintf(cell, sizeof(cell), "%7zu  %7zu", c, model.clusters[c].member_count());
        out << cell;
        for (double v : model.clusters[c].centroid) {
            std::snprintf(cell, sizeof(cell), "  %12.6f", v);
            out << cell;
        }
        if (model.clusters[c].empty()) out << "  (empty)";
        out << "\n";
    }
}

void write_cluster_csv(const ClusterModel& model, const std::vector<std::string>& names,
                       const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path);
    out << "cluster,count";
    for (const auto& name : names) out << ',' << name;
    out << "\n";
    for (std::size_t c = 0; c < model.k(); ++c) {
        out << c << ',' << model.clusters[c].member_count();
        for (double v : model.clusters[c].centroid) out << ',' << num6(v);
        out << "\n";
    }
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

// ---------------------------------------------------------------- fit ----

struct FitArgs {
    std::string data_path;
    std::string model_out = "model.json";
    std::size_t k = 5;
    std::string metric = "euclidean";
    std::string centers;
    int max_iterations = 100;
    std::string out_dir;
    IngestFlags ingest;
};

int cmd_fit(const FitArgs& args) {
    const Dataset ds = load_dataset(args.data_path, args.ingest);
    if (ds.empty()) throw DataError("no records in " + args.data_path);

    const Init init = args.centers.empty() ? Init::first_k_distinct()
                                           : Init::centers(parse_centers(args.centers));
    const Metric metric = parse_metric(args.metric);
    const ClusterModel model =
        lloyd_fit(ds.vectors(), ds.ids(), args.k, init, metric, args.max_iterations);

    StoredModel stored;
    stored.model = model;
    stored.attribute_names = ds.attribute_names;
    stored.dataset_fingerprint = fingerprint(ds);
    stored.created_at = now_iso8601_utc();
    stored.record_count = model.total_records();
    stored.base_record_count = stored.record_count;
    save_model(stored, args.model_out);

    std::cout << "fitted " << model.k() << " clusters on " << ds.records.size() << " records ("
              << ds.dimension() << " attributes) from " << args.data_path << "\n";
    print_cluster_table(model, ds.attribute_names, std::cout);
    std::cout << "metric: " << metric_name(metric) << "   iterations: " << model.iterations
              << "   square error: " << model.square_error << "\n";
    std::cout << "model written to " << args.model_out << " (membership sidecar "
              << membership_path(args.model_out) << ")\n";

    if (!args.out_dir.empty()) {
        ensure_dir(args.out_dir);
        write_cluster_csv(model, ds.attribute_names, args.out_dir + "/clusters.csv");
        std::ofstream out(args.out_dir + "/assignments.csv", std::ios::binary);
        if (!out) throw IoError("cannot write file: " + args.out_dir + "/assignments.csv");
        out << "id,label,cluster,distance\n";
        for (const Record& rec : ds.records) {
            const std::size_t c = model.cluster_of(rec.id);
            const double d = distance(rec.values, model.clusters[c].centroid, metric);
            out << rec.id << ',' << rec.label << ',' << c << ',' << num6(d) << "\n";
        }
    }
    return 0;
}

// ------------------------------------------------------------- update ----

struct UpdateArgs {
    std::string model_path;
    std::string data_path;
    bool update_means = false;
    double threshold = -1.0;
    std::string threshold_file;
    bool strict_fingerprint = false;
    std::string out_dir;
    IngestFlags ingest;
};

std::optional<double> threshold_from_file(const std::string& path, const std::string& model_fp,
                                          bool strict) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open threshold file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed threshold file " + path + ": " + e.what());
    }
    const std::string fp = doc.value("dataset_fingerprint", "");
    if (fp != model_fp) {
        const std::string msg = "threshold file " + path + " was computed for fingerprint " + fp +
                                ", model has " + model_fp;
        if (strict) throw DataError(msg);
        std::cerr << "warning: " << msg << "\n";
    }
    if (!doc.value("found", false)) return std::nullopt;
    return doc.value("crossover_percent", 0.0);
}

int cmd_update(const UpdateArgs& args) {
    StoredModel stored = load_model(args.model_path);
    const Dataset fresh = load_dataset(args.data_path, args.ingest);

    std::cout << "loaded model " << args.model_path << " (k=" << stored.model.k() << ", metric="
              << metric_name(stored.model.metric) << ", " << stored.record_count << " records)\n";

    if (fresh.empty()) {
        std::cout << "0 records assigned; model unchanged\n";
        return 0;
    }
    if (fresh.dimension() != stored.model.dimension) {
        throw DataError("new data has dimension " + std::to_string(fresh.dimension()) +
                        ", model has " + std::to_string(stored.model.dimension));
    }
    if (fresh.attribute_names != stored.attribute_names) {
        std::cerr << "warning: attribute names differ from the model's\n";
    }

    // Re-key new records above the model's existing ids.
    RecordId next_id = 0;
    for (const auto& cluster : stored.model.clusters) {
        for (RecordId id : cluster.members) next_id = std::max(next_id, id + 1);
    }
    std::vector<std::pair<RecordId, FeatureVector>> batch;
    batch.reserve(fresh.records.size());
    for (std::size_t i = 0; i < fresh.records.size(); ++i) {
        batch.emplace_back(next_id + static_cast<RecordId>(i), fresh.records[i].values);
    }

    auto [updated, assignments] =
        incremental_insert(batch, std::move(stored.model), args.update_means);
    stored.model = std::move(updated);

    std::cout << "record  ->  cluster  distance\n";
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        std::cout << fresh.records[i].label << "  ->  " << assignments[i].cluster_index << "  "
                  << num6(assignments[i].distance) << "\n";
    }

    const std::size_t before = stored.record_count;
    stored.record_count = stored.model.total_records();
    std::cout << "inserted " << assignments.size() << " records; record count " << before
              << " -> " << stored.record_count << "\n";

    if (stored.record_count < stored.base_record_count) {
        std::cout << "record count is below the fit-time base of " << stored.base_record_count
                  << "; delta growth not applicable\n";
    } else if (stored.base_record_count >= 1) {
        const double delta = delta_percent(stored.base_record_count, stored.record_count);
        std::cout << "cumulative delta growth: " << pct(delta) << " ("
                  << stored.base_record_count << " -> " << stored.record_count << " records)\n";

        std::optional<double> threshold;
        if (!args.threshold_file.empty()) {
            threshold = threshold_from_file(args.threshold_file, stored.dataset_fingerprint,
                                            args.strict_fingerprint);
            if (!threshold) std::cerr << "note: threshold file records no crossover in range\n";
        } else if (args.threshold >= 0.0) {
            threshold = args.threshold;
        }
        if (threshold) {
            if (delta > *threshold) {
                std::cout << "advice: rerun the full clustering (growth " << pct(delta)
                          << " exceeds the " << pct(*threshold) << " threshold)\n";
            } else {
                std::cout << "advice: keep using the stored model (growth " << pct(delta)
                          << " is within the " << pct(*threshold) << " threshold)\n";
            }
        } else {
            std::cout << "no threshold configured; pass --threshold or --threshold-file "
                         "(produced by bench)\n";
        }
    }

    save_model(stored, args.model_path);
    std::cout << "model written to " << args.model_path << "\n";

    if (!args.out_dir.empty()) {
        ensure_dir(args.out_dir);
        std::ofstream out(args.out_dir + "/assignments.csv", std::ios::binary);
        if (!out) throw IoError("cannot write file: " + args.out_dir + "/assignments.csv");
        out << "id,label,cluster,distance\n";
        for (std::size_t i = 0; i < assignments.size(); ++i) {
            out << batch[i].first << ',' << fresh.records[i].label << ','
                << assignments[i].cluster_index << ',' << num6(assignments[i].distance) << "\n";
        }
    }
    return 0;
}

// ------------------------------------------------------------- delete ----

struct DeleteArgs {
    std::string model_path;
    std::vector<std::string> targets;
    std::vector<std::string> data_paths;
    bool strict_fingerprint = false;
    std::string out_dir;
    IngestFlags ingest;
};

int cmd_delete(const DeleteArgs& args) {
    StoredModel stored = load_model(args.model_path);
    if (args.data_paths.empty()) {
        throw UsageError("delete needs --data pointing at the records the model was fitted on");
    }

    std::vector<Dataset> datasets;
    RecordId next_id = 0;
    for (std::size_t i = 0; i < args.data_paths.size(); ++i) {
        Dataset ds = load_dataset(args.data_paths[i], args.ingest);
        if (i > 0 && args.ingest.id_column.empty()) {
            // later files continue the id sequence, matching how update keys them
            for (auto& rec : ds.records) rec.id += next_id;
        }
        for (const auto& rec : ds.records) next_id = std::max(next_id, rec.id + 1);
        datasets.push_back(std::move(ds));
    }

    const std::string fp = fingerprint(datasets.front());
    if (fp != stored.dataset_fingerprint) {
        const std::string msg = "data fingerprint " + fp + " does not match the model's " +
                                stored.dataset_fingerprint;
        if (args.strict_fingerprint) throw DataError(msg);
        std::cerr << "warning: " << msg << "\n";
    }

    std::vector<RecordId> doomed;
    for (const std::string& token : args.targets) {
        RecordId id = 0;
        auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), id);
        if (ec == std::errc() && ptr == token.data() + token.size()) {
            doomed.push_back(id);
            continue;
        }
        std::vector<RecordId> matches;
        for (const Dataset& ds : datasets) {
            for (const Record& rec : ds.records) {
                if (rec.label == token) matches.push_back(rec.id);
            }
        }
        if (matches.empty()) throw DataError("unknown record or label '" + token + "'");
        if (matches.size() > 1) {
            throw DataError("label '" + token + "' matches " + std::to_string(matches.size()) +
                            " records; delete by id instead");
        }
        doomed.push_back(matches.front());
    }

    if (doomed.empty()) {
        std::cout << "nothing to delete; model unchanged\n";
        return 0;
    }

    stored.model = incremental_delete(doomed, stored.model, make_lookup(datasets));
    const std::size_t before = stored.record_count;
    stored.record_count = stored.model.total_records();
    save_model(stored, args.model_path);

    std::cout << "deleted " << doomed.size() << " records; record count " << before << " -> "
              << stored.record_count << "\n";
    print_cluster_table(stored.model, stored.attribute_names, std::cout);
    std::cout << "model written to " << args.model_path << "\n";

    if (!args.out_dir.empty()) {
        ensure_dir(args.out_dir);
        write_cluster_csv(stored.model, stored.attribute_names, args.out_dir + "/clusters.csv");
    }
    return 0;
}

// -------------------------------------------------------------- bench ----

struct BenchArgs {
    std::string data_path;
    std::size_t k = 5;
    std::string metric = "euclidean";
    std::size_t base_size = 1000;
    std::vector<std::size_t> deltas;
    int repetitions = 5;
    std::uint64_t seed = 42;
    int max_iterations = 100;
    double noise = 0.05;
    bool synthesize = false;
    bool counters_only = false;
    bool update_means = false;
    std::string extension_path;
    std::string replay_path;
    std::string out_dir = "ikmeans-report";
    IngestFlags ingest;
};

DeltaSeries load_replay(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open replay file: " + path);
    DeltaSeries series;
    series.base_size = 100;  // delta percent == batch size on this scale
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.rfind("delta_percent", 0) == 0 || line[0] == '#') continue;
        std::istringstream row(line);
        std::string cell;
        std::vector<double> cells;
        while (std::getline(row, cell, ',')) {
            try {
                cells.push_back(parse_double(cell, "replay value"));
            } catch (const UsageError&) {
                throw DataError("bad replay value '" + cell + "' (line " +
                                std::to_string(line_no) + ") in " + path);
            }
        }
        if (cells.size() != 3) {
            throw DataError("replay rows need delta_percent,full_ms,incremental_ms (line " +
                            std::to_string(line_no) + ") in " + path);
        }
        DeltaPoint p;
        p.batch_size = static_cast<std::size_t>(std::llround(cells[0]));
        p.delta_percent = delta_percent(series.base_size, series.base_size + p.batch_size);
        p.full_cost.wall_ms = cells[1];
        p.incremental_cost.wall_ms = cells[2];
        if (!series.points.empty() && p.delta_percent <= series.points.back().delta_percent) {
            throw DataError("replay delta_percent must be strictly increasing (line " +
                            std::to_string(line_no) + ") in " + path);
        }
        series.points.push_back(p);
    }
    if (series.points.empty()) throw DataError("replay file has no rows: " + path);
    return series;
}

void print_threshold(const ThresholdEstimate& est) {
    std::cout << "threshold (" << basis_name(est.basis) << "): ";
    if (est.found) {
        std::cout << pct(est.crossover_percent) << " (bracket " << pct(est.bracket_low) << " .. "
                  << pct(est.bracket_high) << ")\n";
    } else {
        std::cout << "no crossover observed in range\n";
    }
}

int cmd_bench(const BenchArgs& args) {
    DeltaSeries series;
    std::string fp;
    ThresholdEstimate featured;

    if (!args.replay_path.empty()) {
        series = load_replay(args.replay_path);
        featured = estimate_threshold(series, CostBasis::WallTime);
        print_threshold(featured);
    } else {
        if (args.data_path.empty()) throw UsageError("bench needs a dataset or --replay");
        Dataset ds = load_dataset(args.data_path, args.ingest);
        if (ds.empty()) throw DataError("no records in " + args.data_path);

        Dataset base = ds;
        if (args.base_size < ds.records.size()) {
            base.records.assign(ds.records.begin(),
                                ds.records.begin() + static_cast<long>(args.base_size));
        } else if (args.base_size > ds.records.size()) {
            if (!args.synthesize) {
                throw DataError("base size " + std::to_string(args.base_size) + " exceeds the " +
                                std::to_string(ds.records.size()) +
                                " available records; pass --synthesize to grow the base by "
                                "resampling");
            }
            const std::size_t missing = args.base_size - ds.records.size();
            const auto extra = resample_batch(ds, missing, args.seed ^ 0x5eedbeefULL, args.noise,
                                              static_cast<RecordId>(ds.records.size()));
            for (const auto& [id, values] : extra) {
                Record rec;
                rec.id = id;
                rec.label = std::to_string(id);
                rec.values = values;
                base.records.push_back(std::move(rec));
            }
        }
        fp = fingerprint(base);

        std::vector<std::size_t> deltas = args.deltas;
        if (deltas.empty()) {
            for (std::size_t j = 1; j <= 6; ++j) {
                const std::size_t m = std::max<std::size_t>(1, args.base_size * j / 10);
                if (deltas.empty() || m > deltas.back()) deltas.push_back(m);
            }
        }

        Dataset extension;
        BenchConfig config;
        config.repetitions = args.repetitions;
        config.seed = args.seed;
        config.noise = args.noise;
        config.max_iterations = args.max_iterations;
        config.update_means = args.update_means;
        config.measure_wall_time = !args.counters_only;
        if (!args.extension_path.empty()) {
            extension = load_dataset(args.extension_path, args.ingest);
            config.extension = &extension;
        }

        std::cout << "benchmark: base " << base.records.size() << " records, k=" << args.k
                  << ", metric=" << args.metric << ", repetitions=" << config.repetitions
                  << ", seed=" << config.seed << "\n";
        series = run_benchmark(base, deltas, args.k, parse_metric(args.metric), config);

        std::cout << "delta%  batch   full_ms  inc_ms  full_evals  inc_evals  full_iters\n";
        for (const DeltaPoint& p : series.points) {
            char row[160];
            std::snprintf(row, sizeof(row), "%6.1f %6zu %9.3f %7.3f %11llu %10llu %11d",
                          p.delta_percent, p.batch_size, p.full_cost.wall_ms,
                          p.incremental_cost.wall_ms,
                          static_cast<unsigned long long>(p.full_cost.distance_evaluations),
                          static_cast<unsigned long long>(p.incremental_cost.distance_evaluations),
                          p.full_cost.iterations);
            std::cout << row << "\n";
        }

        const ThresholdEstimate by_time = estimate_threshold(series, CostBasis::WallTime);
        const ThresholdEstimate by_evals = estimate_threshold(series, CostBasis::DistanceEvals);
        if (!args.counters_only) print_threshold(by_time);
        print_threshold(by_evals);
        featured = args.counters_only ? by_evals : by_time;
    }

    if (!args.out_dir.empty()) {
        emit_report(series, featured, args.out_dir);
        nlohmann::ordered_json doc;
        doc["dataset_fingerprint"] = fp;
        doc["basis"] = basis_name(featured.basis);
        doc["found"] = featured.found;
        if (featured.found) {
            doc["crossover_percent"] = featured.crossover_percent;
            doc["bracket_low"] = featured.bracket_low;
            doc["bracket_high"] = featured.bracket_high;
        }
        std::ofstream out(args.out_dir + "/threshold.json", std::ios::binary);
        if (!out) throw IoError("cannot write file: " + args.out_dir + "/threshold.json");
        out << doc.dump(2) << "\n";
        std::cout << "report written to " << args.out_dir << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"K-means with persisted centroids: fit once, then absorb inserts and deletes "
                 "without refitting, and measure when a refit pays off"};
    app.require_subcommand(1);

    FitArgs fit;
    CLI::App* fit_cmd = app.add_subcommand("fit", "Cluster a dataset and persist the model");
    fit_cmd->add_option("data", fit.data_path, "Dataset file (.arff or .csv)")->required();
    fit_cmd->add_option("-k,--clusters", fit.k, "Number of clusters")->check(CLI::PositiveNumber);
    fit_cmd->add_option("--metric", fit.metric, "manhattan or euclidean")
        ->check(CLI::IsMember({"manhattan", "euclidean"}));
    fit_cmd->add_option("--centers", fit.centers,
                        "Explicit initial centers, e.g. '15;5;1' or '1,2;3,4'");
    fit_cmd->add_option("--max-iterations", fit.max_iterations, "Lloyd pass limit")
        ->check(CLI::PositiveNumber);
    fit_cmd->add_option("-o,--model-out", fit.model_out, "Model file to write");
    fit_cmd->add_option("--out-dir", fit.out_dir, "Also write clusters.csv and assignments.csv");
    add_ingest_flags(fit_cmd, fit.ingest);

    UpdateArgs update;
    CLI::App* update_cmd =
        app.add_subcommand("update", "Assign new records against a stored model");
    update_cmd->add_option("model", update.model_path, "Model file from fit")->required();
    update_cmd->add_option("data", update.data_path, "New records to insert")->required();
    update_cmd->add_flag("--update-means", update.update_means,
                         "Move each receiving centroid to the running member mean");
    update_cmd->add_option("--threshold", update.threshold,
                           "Growth percentage above which a refit is advised");
    update_cmd->add_option("--threshold-file", update.threshold_file,
                           "threshold.json produced by bench");
    update_cmd->add_flag("--strict-fingerprint", update.strict_fingerprint,
                         "Fail instead of warning on fingerprint mismatches");
    update_cmd->add_option("--out-dir", update.out_dir, "Also write assignments.csv");
    add_ingest_flags(update_cmd, update.ingest);

    DeleteArgs del;
    CLI::App* delete_cmd =
        app.add_subcommand("delete", "Remove records from a stored model and refresh its means");
    delete_cmd->add_option("model", del.model_path, "Model file from fit")->required();
    delete_cmd->add_option("targets", del.targets, "Record ids or labels to remove");
    delete_cmd->add_option("--data", del.data_paths,
                           "Dataset files resolving record ids (repeatable, fit data first)")
        ->required();
    delete_cmd->add_flag("--strict-fingerprint", del.strict_fingerprint,
                         "Fail instead of warning on fingerprint mismatches");
    delete_cmd->add_option("--out-dir", del.out_dir, "Also write clusters.csv");
    add_ingest_flags(delete_cmd, del.ingest);

    BenchArgs bench;
    CLI::App* bench_cmd = app.add_subcommand(
        "bench", "Compare full refits against incremental inserts across growth levels");
    bench_cmd->add_option("data", bench.data_path, "Dataset file providing the base");
    bench_cmd->add_option("-k,--clusters", bench.k, "Number of clusters")
        ->check(CLI::PositiveNumber);
    bench_cmd->add_option("--metric", bench.metric, "manhattan or euclidean")
        ->check(CLI::IsMember({"manhattan", "euclidean"}));
    bench_cmd->add_option("--base-size", bench.base_size, "Records in the base database")
        ->check(CLI::PositiveNumber);
    bench_cmd->add_option("--deltas", bench.deltas,
                          "Comma-separated batch sizes (default: 10%..60% of the base)")
        ->delimiter(',');
    bench_cmd->add_option("--repetitions", bench.repetitions, "Timing repetitions per point")
        ->check(CLI::PositiveNumber);
    bench_cmd->add_option("--seed", bench.seed, "Seed for batch generation");
    bench_cmd->add_option("--noise", bench.noise, "Resampling noise fraction")
        ->check(CLI::Range(0.0, 1.0));
    bench_cmd->add_option("--max-iterations", bench.max_iterations, "Lloyd pass limit")
        ->check(CLI::PositiveNumber);
    bench_cmd->add_flag("--synthesize", bench.synthesize,
                        "Grow the base to --base-size by resampling when the file is smaller");
    bench_cmd->add_flag("--counters-only", bench.counters_only,
                        "Skip wall-clock timing; reports become seed-reproducible");
    bench_cmd->add_flag("--update-means", bench.update_means,
                        "Benchmark the mean-updating insertion variant");
    bench_cmd->add_option("--extension", bench.extension_path,
                          "Draw batches from this file instead of resampling");
    bench_cmd->add_option("--replay", bench.replay_path,
                          "Estimate the threshold from an existing delta_percent,full_ms,"
                          "incremental_ms table instead of measuring");
    bench_cmd->add_option("--out-dir", bench.out_dir, "Report directory");
    add_ingest_flags(bench_cmd, bench.ingest);

    try {
        app.parse(argc, argv);
        if (fit_cmd->parsed()) return cmd_fit(fit);
        if (update_cmd->parsed()) return cmd_update(update);
        if (delete_cmd->parsed()) return cmd_delete(del);
        if (bench_cmd->parsed()) return cmd_bench(bench);
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
