#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>

namespace synlog {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Binary labels are canonically 0/1. Text forms produced by detectors
// ("insider_threat" / "normal", or numeric strings) are accepted on ingest
// and normalized on write.
inline std::optional<int> parse_label(std::string_view text) {
    const std::string t = to_lower(trim(text));
    if (t == "1" || t == "1.0" || t == "insider_threat" || t == "threat") return 1;
    if (t == "0" || t == "0.0" || t == "normal" || t == "benign") return 0;
    return std::nullopt;
}

}  // namespace synlog
