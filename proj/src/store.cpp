#include "ikm/store.hpp"

#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ikm/errors.hpp"
#include "ikm/kmeans.hpp"

namespace ikm {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kModelFormat = "ikmeans-model";
constexpr const char* kMembersFormat = "ikmeans-members";
constexpr int kFormatVersion = 1;

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write file: " + tmp);
        out << content;
        out.flush();
        if (!out) throw IoError("write failed: " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot replace " + path + ": " + ec.message());
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void require_finite(double v, const std::string& what) {
    if (!std::isfinite(v)) throw DataError("unserializable non-finite value in " + what);
}

const ordered_json& field(const ordered_json& obj, const char* name, const std::string& where) {
    auto it = obj.find(name);
    if (it == obj.end()) throw DataError("missing field '" + std::string(name) + "' in " + where);
    return *it;
}

}  // namespace

std::string membership_path(const std::string& model_path) { return model_path + ".members"; }

std::string now_iso8601_utc() {
    std::time_t t = 0;
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
        t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
    } else {
        t = std::time(nullptr);
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void save_model(const StoredModel& stored, const std::string& path) {
    const ClusterModel& model = stored.model;
    if (model.clusters.empty()) throw DataError("cannot save a model with no clusters");
    if (stored.attribute_names.size() != model.dimension) {
        throw DataError("attribute_names length " + std::to_string(stored.attribute_names.size()) +
                        " does not match dimension " + std::to_string(model.dimension));
    }
    if (stored.record_count != model.total_records()) {
        throw DataError("record_count " + std::to_string(stored.record_count) +
                        " does not match membership total " +
                        std::to_string(model.total_records()));
    }
    require_finite(model.square_error, "square_error");
    for (const Cluster& c : model.clusters) {
        if (c.centroid.size() != model.dimension) {
            throw DataError("cluster centroid dimension " + std::to_string(c.centroid.size()) +
                            " does not match model dimension " + std::to_string(model.dimension));
        }
        for (double v : c.centroid) require_finite(v, "centroid");
    }

    ordered_json meta;
    meta["format"] = kModelFormat;
    meta["version"] = kFormatVersion;
    meta["k"] = model.k();
    meta["metric"] = metric_name(model.metric);
    meta["iterations"] = model.iterations;
    meta["square_error"] = model.square_error;
    meta["record_count"] = stored.record_count;
    meta["base_record_count"] = stored.base_record_count;
    meta["dimension"] = model.dimension;
    meta["attribute_names"] = stored.attribute_names;
    meta["dataset_fingerprint"] = stored.dataset_fingerprint;
    meta["created_at"] = stored.created_at;

    ordered_json clusters = ordered_json::array();
    for (std::size_t i = 0; i < model.clusters.size(); ++i) {
        ordered_json c;
        c["index"] = i;
        c["member_count"] = model.clusters[i].member_count();
        c["centroid"] = model.clusters[i].centroid;
        clusters.push_back(std::move(c));
    }

    ordered_json doc;
    doc["meta"] = std::move(meta);
    doc["clusters"] = std::move(clusters);

    ordered_json members_doc;
    members_doc["format"] = kMembersFormat;
    members_doc["version"] = kFormatVersion;
    members_doc["dataset_fingerprint"] = stored.dataset_fingerprint;
    ordered_json member_lists = ordered_json::array();
    for (const Cluster& c : model.clusters) {
        member_lists.push_back(std::vector<RecordId>(c.members.begin(), c.members.end()));
    }
    members_doc["members"] = std::move(member_lists);

    atomic_write(path, doc.dump(2) + "\n");
    atomic_write(membership_path(path), members_doc.dump(2) + "\n");
}

StoredModel load_model(const std::string& path) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed model file " + path + ": " + e.what());
    }

    StoredModel stored;
    try {
        const ordered_json& meta = field(doc, "meta", path);
        if (field(meta, "format", path).get<std::string>() != kModelFormat) {
            throw DataError("not a model file: " + path);
        }
        stored.model.metric = parse_metric(field(meta, "metric", path).get<std::string>());
        stored.model.iterations = field(meta, "iterations", path).get<int>();
        stored.model.square_error = field(meta, "square_error", path).get<double>();
        stored.model.dimension = field(meta, "dimension", path).get<std::size_t>();
        stored.attribute_names =
            field(meta, "attribute_names", path).get<std::vector<std::string>>();
        stored.dataset_fingerprint = field(meta, "dataset_fingerprint", path).get<std::string>();
        stored.created_at = field(meta, "created_at", path).get<std::string>();
        stored.record_count = field(meta, "record_count", path).get<std::size_t>();
        stored.base_record_count = field(meta, "base_record_count", path).get<std::size_t>();

        const std::size_t k = field(meta, "k", path).get<std::size_t>();
        const ordered_json& clusters = field(doc, "clusters", path);
        if (!clusters.is_array() || clusters.size() != k) {
            throw DataError("cluster list does not match k in " + path);
        }
        stored.model.clusters.resize(k);
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t i = 0; i < k; ++i) {
            const ordered_json& c = clusters[i];
            if (field(c, "index", path).get<std::size_t>() != i) {
                throw DataError("cluster " + std::to_string(i) + " is out of order in " + path);
            }
            counts[i] = field(c, "member_count", path).get<std::size_t>();
            auto centroid = field(c, "centroid", path).get<FeatureVector>();
            if (centroid.size() != stored.model.dimension) {
                throw DataError("cluster " + std::to_string(i) + " centroid has dimension " +
                                std::to_string(centroid.size()) + ", expected " +
                                std::to_string(stored.model.dimension) + " in " + path);
            }
            for (double v : centroid) {
                if (!std::isfinite(v)) {
                    throw DataError("cluster " + std::to_string(i) + " has a non-finite centroid " +
                                    "value in " + path);
                }
            }
            stored.model.clusters[i].centroid = std::move(centroid);
        }
        if (stored.attribute_names.size() != stored.model.dimension) {
            throw DataError("attribute_names length does not match dimension in " + path);
        }
        if (!std::isfinite(stored.model.square_error)) {
            throw DataError("non-finite square_error in " + path);
        }

        const std::string mpath = membership_path(path);
        std::ifstream probe(mpath);
        if (!probe) throw IoError("membership sidecar not found: " + mpath);
        probe.close();
        ordered_json mdoc;
        try {
            mdoc = ordered_json::parse(read_file(mpath));
        } catch (const nlohmann::json::exception& e) {
            throw DataError("malformed membership file " + mpath + ": " + e.what());
        }
        if (field(mdoc, "format", mpath).get<std::string>() != kMembersFormat) {
            throw DataError("not a membership file: " + mpath);
        }
        if (field(mdoc, "dataset_fingerprint", mpath).get<std::string>() !=
            stored.dataset_fingerprint) {
            throw DataError("membership sidecar fingerprint does not match model: " + mpath);
        }
        const ordered_json& lists = field(mdoc, "members", mpath);
        if (!lists.is_array() || lists.size() != k) {
            throw DataError("membership list count does not match k in " + mpath);
        }
        std::set<RecordId> all_ids;
        std::size_t total = 0;
        for (std::size_t i = 0; i < k; ++i) {
            auto ids = lists[i].get<std::vector<RecordId>>();
            if (ids.size() != counts[i]) {
                throw DataError("cluster " + std::to_string(i) + " member_count " +
                                std::to_string(counts[i]) + " does not match sidecar list size " +
                                std::to_string(ids.size()));
            }
            for (RecordId id : ids) {
                if (!all_ids.insert(id).second) {
                    throw DataError("record id " + std::to_string(id) +
                                    " appears in more than one cluster in " + mpath);
                }
            }
            stored.model.clusters[i].members = std::set<RecordId>(ids.begin(), ids.end());
            total += ids.size();
        }
        if (total != stored.record_count) {
            throw DataError("record_count does not match sidecar membership total in " + path);
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed field in " + path + ": " + e.what());
    }
    return stored;
}

}  // namespace ikm
