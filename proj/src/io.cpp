#include "convlab/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <fstream>
#include <stdexcept>

#include "convlab/errors.hpp"

namespace convlab {

std::string format_double(double x) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    if (ec != std::errc{}) throw std::logic_error("to_chars failed");
    return std::string(buf.data(), end);
}

std::string format_optional(const std::optional<double>& x) {
    return x ? format_double(*x) : std::string{};
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
    if (cells.size() != header_.size()) throw std::logic_error("csv row width mismatch");
    rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out += ',';
            out += cells[i];
        }
        out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
}

nlohmann::json CsvTable::records() const {
    auto cell = [](const std::string& c) -> nlohmann::json {
        if (c.empty()) return nullptr;
        double v = 0.0;
        auto [end, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
        if (ec == std::errc{} && end == c.data() + c.size()) return v;
        return c;
    };
    auto out = nlohmann::json::array();
    for (const auto& r : rows_) {
        nlohmann::json obj = nlohmann::json::object();
        for (std::size_t i = 0; i < header_.size(); ++i) obj[header_[i]] = cell(r[i]);
        out.push_back(std::move(obj));
    }
    return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw Error("cannot open " + tmp.string() + " for writing");
        os.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!os) throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 0xf];
    }
    return out;
}

}  // namespace convlab
