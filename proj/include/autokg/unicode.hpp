#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace autokg::unicode {

// NFC normalisation of UTF-8 text. Invalid UTF-8 is replaced with U+FFFD.
std::string nfc(std::string_view utf8);
bool is_nfc(std::string_view utf8);

// Unicode code points of a UTF-8 string.
std::u32string to_u32(std::string_view utf8);
std::string to_utf8(std::u32string_view cps);

std::size_t length(std::string_view utf8);

bool is_space(char32_t cp);
bool is_punct(char32_t cp);

std::string trim(std::string_view utf8);

}  // namespace autokg::unicode
