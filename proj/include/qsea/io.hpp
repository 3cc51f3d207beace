#pragma once

// CSV and manifest plumbing. CSV is the single numeric interchange format:
// mandatory headers, UTF-8, LF newlines, '.' decimal separator, floating
// values at 17 significant digits so reruns are byte-identical and values
// round-trip exactly. Manifests are JSON (schema v1) with SHA-256 content
// digests of every output file.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "qsea/errors.hpp"

namespace qsea {

inline std::string format_g17(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// Column-checked CSV accumulator; the body is built in memory and written
/// in one shot so partially-written files never carry a valid header.
class CsvFile {
public:
    explicit CsvFile(std::vector<std::string> columns) : columns_(std::move(columns)) {
        for (size_t i = 0; i < columns_.size(); ++i) {
            if (i) body_ += ',';
            body_ += columns_[i];
        }
        body_ += '\n';
    }

    void row(const std::vector<std::string>& cells) {
        if (cells.size() != columns_.size())
            throw Error("CsvFile: row width " + std::to_string(cells.size()) +
                        " != header width " + std::to_string(columns_.size()));
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) body_ += ',';
            body_ += cells[i];
        }
        body_ += '\n';
    }

    const std::string& body() const { return body_; }

    void write(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot open " + path.string() + " for writing");
        out << body_;
        if (!out) throw IoError("write failed for " + path.string());
    }

private:
    std::vector<std::string> columns_;
    std::string body_;
};

inline std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 ||
        EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
        EVP_MD_CTX_free(ctx);
        throw Error("sha256 digest failed");
    }
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xF];
    }
    return out;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Minimal CSV reader for user-supplied overlay files: header + numeric rows.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    int column(const std::string& name) const {
        for (size_t i = 0; i < columns.size(); ++i)
            if (columns[i] == name) return static_cast<int>(i);
        return -1;
    }
};

inline CsvTable parse_csv(const std::string& text, const std::string& what) {
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line.empty()) throw IoError(what + ": empty or missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream header(line);
    for (std::string cell; std::getline(header, cell, ',');) table.columns.push_back(cell);
    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream row(line);
        std::vector<double> vals;
        for (std::string cell; std::getline(row, cell, ',');) {
            try {
                if (cell == "inf") vals.push_back(std::numeric_limits<double>::infinity());
                else vals.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw IoError(what + ": non-numeric cell '" + cell + "' at line " +
                              std::to_string(lineno));
            }
        }
        if (vals.size() != table.columns.size())
            throw IoError(what + ": row width mismatch at line " + std::to_string(lineno));
        table.rows.push_back(std::move(vals));
    }
    if (table.rows.empty()) throw IoError(what + ": no data rows");
    return table;
}

}  // namespace qsea
