#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

namespace dkick {

/// Shortest round-trip decimal, locale independent.
inline std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    if (res.ec != std::errc()) throw std::runtime_error("format_number failed");
    return std::string(buf, res.ptr);
}

inline std::string format_number(long long v) { return std::to_string(v); }
inline std::string format_number(int v) { return std::to_string(v); }
inline std::string format_number(std::size_t v) { return std::to_string(v); }

/// Minimal CSV writer with a fixed header.
class CsvWriter {
public:
    CsvWriter(std::ostream& os, std::initializer_list<std::string> header) : os_(os) {
        bool first = true;
        for (const auto& h : header) {
            if (!first) os_ << ',';
            os_ << h;
            first = false;
        }
        os_ << '\n';
        columns_ = header.size();
    }

    template <class... T>
    void row(const T&... values) {
        if (sizeof...(T) != columns_) throw std::logic_error("CsvWriter: column count mismatch");
        bool first = true;
        ((os_ << (first ? "" : ",") << format_number(values), first = false), ...);
        os_ << '\n';
    }

private:
    std::ostream& os_;
    std::size_t columns_ = 0;
};

/// Parses a double with the C locale; whole string must be consumed.
inline bool parse_number(const std::string& s, double& out) {
    const char* b = s.data();
    const char* e = s.data() + s.size();
    if (b != e && *b == '+') ++b;
    auto res = std::from_chars(b, e, out);
    return res.ec == std::errc() && res.ptr == e;
}

}  // namespace dkick
