#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace pathclass {

// Decodes UTF-8 into code points. Invalid bytes are mapped to their own byte
// value (Latin-1 fallback) so that decoding is total on arbitrary input.
std::vector<char32_t> decode_utf8(std::string_view s);

// Encodes code points back to UTF-8.
std::string encode_utf8(const std::vector<char32_t>& cps);
std::string encode_utf8(char32_t cp);

// ASCII-only lowercasing; non-ASCII bytes pass through untouched.
std::string ascii_lower(std::string_view s);

inline char32_t ascii_lower(char32_t c) {
    return (c >= U'A' && c <= U'Z') ? c + (U'a' - U'A') : c;
}

}  // namespace pathclass
