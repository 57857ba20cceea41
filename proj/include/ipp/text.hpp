#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ipp {

inline std::string_view trim(std::string_view s) {
    const char* ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

// Splits a record line into fields: on commas when present, otherwise on runs
// of whitespace. Covers both comma-separated and space-padded UCI files.
inline std::vector<std::string> splitFields(std::string_view line) {
    std::vector<std::string> out;
    if (line.find(',') != std::string_view::npos) {
        std::size_t start = 0;
        while (true) {
            const auto pos = line.find(',', start);
            const auto piece = pos == std::string_view::npos
                                   ? line.substr(start)
                                   : line.substr(start, pos - start);
            out.emplace_back(trim(piece));
            if (pos == std::string_view::npos) break;
            start = pos + 1;
        }
    } else {
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            std::size_t j = i;
            while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
            if (j > i) out.emplace_back(line.substr(i, j - i));
            i = j;
        }
    }
    return out;
}

// Strict full-token parse; rejects trailing garbage and non-finite values.
inline std::optional<double> parseDouble(std::string_view token) {
    token = trim(token);
    if (token.empty()) return std::nullopt;
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) return std::nullopt;
    if (!std::isfinite(value)) return std::nullopt;
    return value;
}

inline std::optional<long long> parseLong(std::string_view token) {
    token = trim(token);
    if (token.empty()) return std::nullopt;
    long long value = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) return std::nullopt;
    return value;
}

// Shortest round-trip decimal form; used by every serializer so outputs are
// deterministic and reload bit-exactly.
inline std::string formatDouble(double v) {
    char buf[40];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

} // namespace ipp
