#include "confsel/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace confsel::cli {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

struct Table {
    std::vector<std::string> header;
    /// Parsed rows with their file line numbers.
    std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
};

Table read_table(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvError(path.string(), 0, "", "cannot open file");
    Table t;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<std::string> cells;
        for (auto cell : split(line)) cells.emplace_back(cell);
        if (!have_header) {
            t.header = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() != t.header.size()) {
            throw CsvError(path.string(), line_no, "",
                           "expected " + std::to_string(t.header.size()) + " fields, found " +
                               std::to_string(cells.size()));
        }
        t.rows.emplace_back(line_no, std::move(cells));
    }
    return t;
}

std::optional<std::size_t> column_of(const Table& t, std::string_view name) {
    const auto it = std::find(t.header.begin(), t.header.end(), name);
    if (it == t.header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - t.header.begin());
}

void check_header(const Table& t, const std::filesystem::path& path,
                  std::initializer_list<std::string_view> allowed) {
    for (const auto& name : t.header) {
        if (std::find(allowed.begin(), allowed.end(), name) == allowed.end()) {
            throw CsvError(path.string(), 1, name, "unknown column '" + name + "'");
        }
        if (std::count(t.header.begin(), t.header.end(), name) > 1) {
            throw CsvError(path.string(), 1, name, "duplicate column '" + name + "'");
        }
    }
}

std::size_t require_column(const Table& t, const std::filesystem::path& path, std::string_view name) {
    const auto col = column_of(t, name);
    if (!col) throw CsvError(path.string(), 1, std::string(name), "missing required column");
    return *col;
}

double parse_number(const std::string& cell, const std::filesystem::path& path, std::size_t line,
                    const std::string& column) {
    double value = 0.0;
    const char* end = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
    if (cell.empty() || ec != std::errc() || ptr != end) {
        throw CsvError(path.string(), line, column, "not a number: '" + cell + "'");
    }
    if (!std::isfinite(value)) throw CsvError(path.string(), line, column, "value is not finite");
    return value;
}

struct ScoreColumns {
    std::vector<double> scores;
    std::vector<double> weights;
};

ScoreColumns read_scores(const Table& t, const std::filesystem::path& path) {
    const std::size_t sc = require_column(t, path, "score");
    const std::size_t wc = require_column(t, path, "weight");
    ScoreColumns out;
    for (const auto& [line, cells] : t.rows) {
        out.scores.push_back(parse_number(cells[sc], path, line, "score"));
        const double w = parse_number(cells[wc], path, line, "weight");
        if (!(w > 0.0)) throw CsvError(path.string(), line, "weight", "weight must be > 0");
        out.weights.push_back(w);
    }
    return out;
}

std::string describe(const std::string& path, std::size_t line, const std::string& column,
                     const std::string& what) {
    std::ostringstream os;
    os << path;
    if (line > 0) os << ":" << line;
    if (!column.empty()) os << " (column " << column << ")";
    os << ": " << what;
    return os.str();
}

} // namespace

CsvError::CsvError(std::string path, std::size_t line, std::string column, const std::string& what)
    : std::runtime_error(describe(path, line, column, what)),
      path_(std::move(path)),
      line_(line),
      column_(std::move(column)) {}

WeightedCalibration read_calibration_csv(const std::filesystem::path& path) {
    const Table t = read_table(path);
    if (t.header.empty()) return {};
    check_header(t, path, {"score", "weight"});
    ScoreColumns cols = read_scores(t, path);
    return WeightedCalibration(std::move(cols.scores), std::move(cols.weights));
}

WeightedTest read_test_csv(const std::filesystem::path& path) {
    const Table t = read_table(path);
    if (t.header.empty()) return {};
    check_header(t, path, {"score", "weight", "null_flag"});
    ScoreColumns cols = read_scores(t, path);
    const auto nc = column_of(t, "null_flag");
    if (!nc) return WeightedTest(std::move(cols.scores), std::move(cols.weights));
    std::vector<bool> flags;
    for (const auto& [line, cells] : t.rows) {
        const std::string& cell = cells[*nc];
        if (cell != "0" && cell != "1") {
            throw CsvError(path.string(), line, "null_flag", "expected 0 or 1, found '" + cell + "'");
        }
        flags.push_back(cell == "1");
    }
    return WeightedTest(std::move(cols.scores), std::move(cols.weights), std::move(flags));
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

} // namespace confsel::cli
