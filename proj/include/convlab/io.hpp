#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace convlab {

// Shortest decimal that round-trips; '.' separator regardless of locale.
std::string format_double(double x);

std::string format_optional(const std::optional<double>& x);

// Accumulates a CSV table with LF line endings. Fields are written verbatim;
// callers pass already-formatted cells.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    void add_row(std::vector<std::string> cells);
    std::size_t rows() const { return rows_.size(); }
    std::string str() const;
    // Array of objects keyed by header; numeric cells become numbers, empty cells null.
    nlohmann::json records() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// Writes to a sibling temp file, then renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string sha256_hex(std::string_view data);

}  // namespace convlab
