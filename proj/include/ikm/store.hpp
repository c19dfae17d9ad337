#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ikm/model.hpp"

namespace ikm {

// A persisted clustering result: the model plus enough provenance to drive
// incremental updates later. record_count tracks the current membership;
// base_record_count stays at the fit-time size and anchors delta-growth
// reporting.
struct StoredModel {
    ClusterModel model;
    std::vector<std::string> attribute_names;
    std::string dataset_fingerprint;
    std::string created_at;  // ISO-8601 UTC
    std::size_t record_count = 0;
    std::size_t base_record_count = 0;
};

// Model file layout (JSON):
//   meta:     format/version, k, metric, iterations, square_error,
//             record_count, base_record_count, dimension, attribute_names,
//             dataset_fingerprint, created_at
//   clusters: [{index, member_count, centroid}, ...] in attribute order
// Member ids live in a sidecar at membership_path(path), keyed by the same
// fingerprint. Both files are replaced atomically (temp file + rename).
void save_model(const StoredModel& stored, const std::string& path);

// Loads model + sidecar and validates: recognized metric tag, consistent
// dimensions, finite values, matching fingerprints and member counts.
StoredModel load_model(const std::string& path);

std::string membership_path(const std::string& model_path);

// Current UTC time, or SOURCE_DATE_EPOCH when that is set (keeps repeated
// fits byte-identical).
std::string now_iso8601_utc();

}  // namespace ikm
