#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace btpoison {

using Token = std::string;
using Tokens = std::vector<Token>;

// Half-open token range [begin, end).
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return begin == end; }
  bool contains(std::size_t index) const { return index >= begin && index < end; }
  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

namespace text {

// Decodes one code point starting at pos and advances pos. Invalid bytes
// decode as U+FFFD and consume a single byte.
char32_t decode_utf8(std::string_view s, std::size_t& pos);
void append_utf8(std::string& out, char32_t cp);

bool is_space(char32_t cp);

// Characters split off the edges of whitespace-delimited chunks.
bool is_edge_punctuation(char32_t cp);

// Simple one-to-one lowercase mapping for Latin, Greek and Cyrillic.
std::string fold_case(std::string_view s);

// Collapses whitespace runs to a single ASCII space and trims both ends.
std::string normalize_whitespace(std::string_view s);

}  // namespace text

// Whitespace split, then leading/trailing punctuation peeled into one token
// per character. Interior hyphens and apostrophes stay attached.
Tokens tokenize(std::string_view raw);

// Inverse of tokenize for conventionally punctuated text: closing marks
// attach left, opening marks attach right, straight quotes alternate.
std::string detokenize(std::span<const Token> tokens);

bool tokens_equal(std::span<const Token> a, std::span<const Token> b,
                  bool case_sensitive);

// First position at or after `from` where needle occurs contiguously.
std::optional<std::size_t> find_subsequence(std::span<const Token> haystack,
                                            std::span<const Token> needle,
                                            bool case_sensitive,
                                            std::size_t from = 0);

inline bool contains_subsequence(std::span<const Token> haystack,
                                 std::span<const Token> needle,
                                 bool case_sensitive) {
  return find_subsequence(haystack, needle, case_sensitive).has_value();
}

}  // namespace btpoison
