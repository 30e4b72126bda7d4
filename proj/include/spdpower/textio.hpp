#pragma once

#include <charconv>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spdpower {

/// Locale-independent double formatting. Negative `significant` selects the
/// shortest representation that round-trips.
inline std::string format_double(double value, int significant = -1) {
    char buf[64];
    const auto res = significant < 0
                         ? std::to_chars(buf, buf + sizeof(buf), value)
                         : std::to_chars(buf, buf + sizeof(buf), value,
                                         std::chars_format::general, significant);
    return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view text) {
    // from_chars does not skip leading whitespace
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t'))
        text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
        text.remove_suffix(1);
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

/// Splits a line on commas. The field formats used here never quote or embed
/// commas, so plain splitting is enough.
inline std::vector<std::string> split_csv(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            std::string_view f = line.substr(start, i - start);
            while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
            while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r'))
                f.remove_suffix(1);
            fields.emplace_back(f);
            start = i + 1;
        }
    }
    return fields;
}

} // namespace spdpower
