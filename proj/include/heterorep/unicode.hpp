#pragma once

#include <string>
#include <string_view>
#include <vector>

// Thin UTF-8 layer over ICU character properties.
namespace heterorep::unicode {

// Invalid sequences decode to U+FFFD.
std::u32string decode(std::string_view utf8);
void append_utf8(std::string& out, char32_t cp);
std::string encode(std::u32string_view text);

bool is_punct(char32_t cp);   // general category P*
bool is_letter(char32_t cp);  // general category L*
bool is_digit(char32_t cp);   // general category Nd
bool is_space(char32_t cp);
bool is_upper(char32_t cp);
bool is_lower(char32_t cp);
char32_t to_lower(char32_t cp);

std::string lowercase(std::string_view utf8);
std::string strip_punct(std::string_view utf8);
std::size_t length(std::string_view utf8);  // code points

// Splits on Unicode whitespace; no empty tokens.
std::vector<std::string> split_whitespace(std::string_view utf8);

}  // namespace heterorep::unicode
