#pragma once

#include <string>
#include <vector>

#include "ikm/dataset.hpp"

namespace ikm {

struct ParseOptions {
    // Names of the numeric columns to use as features; empty means all
    // numeric columns.
    std::vector<std::string> feature_columns;
    // Integer-valued column supplying record ids; ids are 0-based file order
    // when unset.
    std::string id_column;
    // Drop rows containing '?' instead of failing; the count lands in
    // Dataset::skipped_missing.
    bool skip_missing = false;
    // CSV only: first row carries column names. Headerless columns are named
    // col0..col(d-1).
    bool has_header = true;
};

// ARFF subset: @relation, @attribute (numeric/real/integer, string,
// date [format]), @data with comma-separated rows. '%' comments and blank
// lines are skipped; keywords are case-insensitive; names and string values
// may be quoted with ' or ". Nominal, relational, and sparse ARFF are
// rejected. String/date columns become record labels, never features.
Dataset parse_arff(const std::string& path, const ParseOptions& options = {});
Dataset parse_arff_text(const std::string& text, const std::string& source_name,
                        const ParseOptions& options = {});

// RFC-4180-style CSV: comma separator, double-quote quoting with "" escapes,
// quoted fields may contain commas and newlines. Without feature_columns
// every column must be numeric; with it the remaining columns become labels.
Dataset parse_csv(const std::string& path, const ParseOptions& options = {});
Dataset parse_csv_text(const std::string& text, const std::string& source_name,
                       const ParseOptions& options = {});

std::string render_arff(const Dataset& dataset);
std::string render_csv(const Dataset& dataset);
void write_arff(const Dataset& dataset, const std::string& path);
void write_csv(const Dataset& dataset, const std::string& path);

// Canonical rendering hashed by fingerprint(): header line plus one
// id,label...,value... row per record, doubles in shortest round-trip form.
std::string canonical_csv(const Dataset& dataset);

// FNV-1a 64 over canonical_csv, as "fnv1a:" + 16 hex digits. Identifies the
// base dataset a stored model was fitted on.
std::string fingerprint(const Dataset& dataset);

}  // namespace ikm
