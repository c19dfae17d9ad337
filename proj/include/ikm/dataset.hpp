#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ikm/kmeans.hpp"
#include "ikm/types.hpp"

namespace ikm {

struct Record {
    RecordId id = 0;
    std::string label;  // joined non-feature columns, or the decimal id
    FeatureVector values;
};

struct Dataset {
    std::vector<Record> records;          // file order
    std::vector<std::string> attribute_names;  // feature columns, length = dimension
    std::vector<std::string> label_names;      // non-feature columns kept as labels
    std::string relation;                 // ARFF @relation, or the file stem
    std::string source;
    std::size_t skipped_missing = 0;      // rows dropped under skip_missing

    std::size_t dimension() const { return attribute_names.size(); }
    bool empty() const { return records.empty(); }

    std::vector<FeatureVector> vectors() const {
        std::vector<FeatureVector> out;
        out.reserve(records.size());
        for (const auto& r : records) out.push_back(r.values);
        return out;
    }

    std::vector<RecordId> ids() const {
        std::vector<RecordId> out;
        out.reserve(records.size());
        for (const auto& r : records) out.push_back(r.id);
        return out;
    }
};

// Owns a copy of the records, so the dataset need not outlive the lookup.
RecordLookup make_lookup(const Dataset& dataset);
RecordLookup make_lookup(const std::vector<Dataset>& datasets);

}  // namespace ikm
