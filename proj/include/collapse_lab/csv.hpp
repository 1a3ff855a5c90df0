#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

namespace collapse_lab {

// Floating-point values are printed with 17 significant digits so that a
// reparse reproduces the double bit-for-bit.
inline std::string format_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    return hash;
}

inline std::string to_hex(std::uint64_t value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(value));
    return buffer;
}

// In-memory CSV with LF newlines and a fixed header row.
class CsvBuilder {
public:
    explicit CsvBuilder(const std::string& header) : content_(header + "\n") {}

    void add_row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i > 0) content_ += ',';
            content_ += format_double(values[i]);
        }
        content_ += '\n';
        ++rows_;
    }

    void add_row_raw(const std::string& row) {
        content_ += row;
        content_ += '\n';
        ++rows_;
    }

    const std::string& content() const { return content_; }
    std::size_t rows() const { return rows_; }

private:
    std::string content_;
    std::size_t rows_ = 0;
};

}  // namespace collapse_lab
