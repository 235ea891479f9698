#include "btpoison/text.h"

#include <algorithm>

namespace btpoison {
namespace text {

char32_t decode_utf8(std::string_view s, std::size_t& pos) {
  const auto byte = [&](std::size_t i) { return static_cast<unsigned char>(s[i]); };
  const unsigned char lead = byte(pos);
  std::size_t len = 0;
  char32_t cp = 0;
  if (lead < 0x80) {
    ++pos;
    return lead;
  } else if ((lead & 0xE0) == 0xC0) {
    len = 2;
    cp = lead & 0x1F;
  } else if ((lead & 0xF0) == 0xE0) {
    len = 3;
    cp = lead & 0x0F;
  } else if ((lead & 0xF8) == 0xF0) {
    len = 4;
    cp = lead & 0x07;
  } else {
    ++pos;
    return 0xFFFD;
  }
  if (pos + len > s.size()) {
    ++pos;
    return 0xFFFD;
  }
  for (std::size_t i = 1; i < len; ++i) {
    const unsigned char c = byte(pos + i);
    if ((c & 0xC0) != 0x80) {
      ++pos;
      return 0xFFFD;
    }
    cp = (cp << 6) | (c & 0x3F);
  }
  pos += len;
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_space(char32_t cp) {
  return (cp >= 0x09 && cp <= 0x0D) || cp == 0x20 || cp == 0x85 || cp == 0xA0 ||
         cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 ||
         cp == 0x2029 || cp == 0x202F || cp == 0x205F || cp == 0x3000;
}

bool is_edge_punctuation(char32_t cp) {
  switch (cp) {
    case U'.': case U',': case U';': case U':': case U'!': case U'?':
    case U'"': case U'\'': case U'(': case U')':
    case U'«': case U'»':  // « »
    case U'„': case U'“': case U'”':  // „ “ ”
      return true;
    default:
      return false;
  }
}

namespace {

char32_t lower(char32_t c) {
  if (c >= U'A' && c <= U'Z') return c + 32;
  if (c < 0x80) return c;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
  if ((c >= 0x100 && c <= 0x137) || (c >= 0x14A && c <= 0x177)) return (c % 2 == 0) ? c + 1 : c;
  if ((c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E)) return (c % 2 == 1) ? c + 1 : c;
  if (c == 0x178) return 0xFF;
  if (c == 0x386) return 0x3AC;
  if (c >= 0x388 && c <= 0x38A) return c + 37;
  if (c == 0x38C) return 0x3CC;
  if (c == 0x38E || c == 0x38F) return c + 63;
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 32;
  if (c >= 0x400 && c <= 0x40F) return c + 80;
  if (c >= 0x410 && c <= 0x42F) return c + 32;
  if (c == 0x1E9E) return 0xDF;
  return c;
}

}  // namespace

std::string fold_case(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (pos < s.size()) {
    const std::size_t start = pos;
    const char32_t cp = decode_utf8(s, pos);
    const char32_t folded = lower(cp);
    if (folded == cp) {
      out.append(s.substr(start, pos - start));
    } else {
      append_utf8(out, folded);
    }
  }
  return out;
}

std::string normalize_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const std::size_t start = pos;
    const char32_t cp = decode_utf8(s, pos);
    if (is_space(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.append(s.substr(start, pos - start));
  }
  return out;
}

}  // namespace text

namespace {

struct CodePoint {
  char32_t value;
  std::size_t offset;
  std::size_t length;
};

void split_chunk(std::string_view chunk, Tokens& out) {
  std::vector<CodePoint> cps;
  std::size_t pos = 0;
  while (pos < chunk.size()) {
    const std::size_t start = pos;
    const char32_t cp = text::decode_utf8(chunk, pos);
    cps.push_back({cp, start, pos - start});
  }
  std::size_t lead = 0;
  while (lead < cps.size() && text::is_edge_punctuation(cps[lead].value)) ++lead;
  std::size_t trail = cps.size();
  while (trail > lead && text::is_edge_punctuation(cps[trail - 1].value)) --trail;

  for (std::size_t i = 0; i < lead; ++i) {
    out.emplace_back(chunk.substr(cps[i].offset, cps[i].length));
  }
  if (trail > lead) {
    const std::size_t begin = cps[lead].offset;
    const std::size_t end = cps[trail - 1].offset + cps[trail - 1].length;
    out.emplace_back(chunk.substr(begin, end - begin));
  }
  for (std::size_t i = trail; i < cps.size(); ++i) {
    out.emplace_back(chunk.substr(cps[i].offset, cps[i].length));
  }
}

enum class Attach { kNone, kLeft, kRight };

Attach fixed_attachment(std::string_view token) {
  static constexpr std::string_view kLeft[] = {".", ",", ";", ":", "!", "?", ")",
                                               "»", "”"};
  static constexpr std::string_view kRight[] = {"(", "«", "„"};
  for (auto t : kLeft) {
    if (token == t) return Attach::kLeft;
  }
  for (auto t : kRight) {
    if (token == t) return Attach::kRight;
  }
  return Attach::kNone;
}

}  // namespace

Tokens tokenize(std::string_view raw) {
  Tokens out;
  std::size_t pos = 0;
  std::size_t chunk_start = std::string_view::npos;
  while (pos < raw.size()) {
    const std::size_t start = pos;
    const char32_t cp = text::decode_utf8(raw, pos);
    if (text::is_space(cp)) {
      if (chunk_start != std::string_view::npos) {
        split_chunk(raw.substr(chunk_start, start - chunk_start), out);
        chunk_start = std::string_view::npos;
      }
    } else if (chunk_start == std::string_view::npos) {
      chunk_start = start;
    }
  }
  if (chunk_start != std::string_view::npos) {
    split_chunk(raw.substr(chunk_start), out);
  }
  return out;
}

std::string detokenize(std::span<const Token> tokens) {
  std::string out;
  bool open_double = false;
  bool open_single = false;
  bool open_low_quote = false;  // „ pending its “ closer
  bool glue_next = false;
  for (const Token& token : tokens) {
    Attach attach = fixed_attachment(token);
    if (token == "\"") {
      attach = open_double ? Attach::kLeft : Attach::kRight;
      open_double = !open_double;
    } else if (token == "'") {
      attach = open_single ? Attach::kLeft : Attach::kRight;
      open_single = !open_single;
    } else if (token == "„") {
      open_low_quote = true;
    } else if (token == "“") {
      attach = open_low_quote ? Attach::kLeft : Attach::kRight;
      open_low_quote = false;
    }
    if (!out.empty() && !glue_next && attach != Attach::kLeft) out.push_back(' ');
    out += token;
    glue_next = attach == Attach::kRight;
  }
  return out;
}

bool tokens_equal(std::span<const Token> a, std::span<const Token> b,
                  bool case_sensitive) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (case_sensitive ? a[i] != b[i]
                       : text::fold_case(a[i]) != text::fold_case(b[i])) {
      return false;
    }
  }
  return true;
}

std::optional<std::size_t> find_subsequence(std::span<const Token> haystack,
                                            std::span<const Token> needle,
                                            bool case_sensitive, std::size_t from) {
  if (needle.empty() || needle.size() > haystack.size()) return std::nullopt;
  for (std::size_t i = from; i + needle.size() <= haystack.size(); ++i) {
    if (tokens_equal(haystack.subspan(i, needle.size()), needle, case_sensitive)) {
      return i;
    }
  }
  return std::nullopt;
}

}  // namespace btpoison
