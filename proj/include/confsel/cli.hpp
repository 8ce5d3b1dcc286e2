#pragma once

#include "confsel/core_types.hpp"

#include "json.hpp"

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace confsel::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

/// Malformed input file. `line` is the 1-based line in the file (the header
/// is line 1); `column` is empty when the problem is not tied to one column.
class CsvError : public std::runtime_error {
public:
    CsvError(std::string path, std::size_t line, std::string column, const std::string& what);

    const std::string& path() const { return path_; }
    std::size_t line() const { return line_; }
    const std::string& column() const { return column_; }

private:
    std::string path_;
    std::size_t line_;
    std::string column_;
};

/// Bad flag combination or value detected after parsing.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Calibration CSV: header with columns `score,weight` (any order).
WeightedCalibration read_calibration_csv(const std::filesystem::path& path);

/// Test CSV: `score,weight` plus an optional `null_flag` column of 0/1.
WeightedTest read_test_csv(const std::filesystem::path& path);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

/// Lowercase hex SHA-256 of the file's bytes.
std::string sha256_file(const std::filesystem::path& path);

struct RunManifest {
    std::string command;
    nlohmann::json config = nlohmann::json::object();
    std::optional<std::uint64_t> seed;
    /// (path, sha256) per input file, in flag order.
    std::vector<std::pair<std::string, std::string>> input_digests;
    std::string version = CONFSEL_VERSION;
    double duration_seconds = 0.0;

    /// Everything except the wall-clock duration, so outputs embedding it
    /// stay bit-identical across repeated runs.
    nlohmann::json reproducible_json() const;
    nlohmann::json full_json() const;
};

/// Sidecar written next to every output file: `<out>.manifest.json`.
std::filesystem::path manifest_path_for(const std::filesystem::path& out);
void write_manifest(const RunManifest& manifest, const std::filesystem::path& out);

/// Parses argv-style arguments (without the program name) and runs one
/// subcommand. Never throws; returns 0, 1 (internal error) or 2 (usage or
/// input error).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace confsel::cli
