#pragma once

#include <stdexcept>
#include <string>

namespace ikm {

// Bad input content: dimension mismatches, unparseable files, unknown ids,
// invalid parameters. Maps to CLI exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem-level failures: missing files, unwritable paths. Exit code 3.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ikm
