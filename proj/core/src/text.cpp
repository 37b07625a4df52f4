#include "trackwall/text.hpp"

#include <sstream>

#include "trackwall/data_files.hpp"

namespace trackwall {

std::string_view to_string(Field field) {
  switch (field) {
    case Field::kUrl: return "url";
    case Field::kTitle: return "title";
    case Field::kKeywords: return "keywords";
    case Field::kBody: return "body";
  }
  return "";
}

int FieldWeights::of(Field field) const noexcept {
  switch (field) {
    case Field::kUrl: return url;
    case Field::kTitle: return title;
    case Field::kKeywords: return keywords;
    case Field::kBody: return body;
  }
  return 0;
}

std::u32string decode_utf8(std::string_view bytes) {
  std::u32string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  while (i < bytes.size()) {
    const auto b0 = static_cast<unsigned char>(bytes[i]);
    int len = 0;
    char32_t cp = 0;
    char32_t min = 0;
    if (b0 < 0x80) {
      out.push_back(b0);
      ++i;
      continue;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2, cp = b0 & 0x1F, min = 0x80;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3, cp = b0 & 0x0F, min = 0x800;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4, cp = b0 & 0x07, min = 0x10000;
    } else {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    int used = 1;
    for (; used < len && i + used < bytes.size(); ++used) {
      const auto b = static_cast<unsigned char>(bytes[i + used]);
      if ((b & 0xC0) != 0x80) break;
      cp = (cp << 6) | (b & 0x3F);
    }
    if (used != len || cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      out.push_back(0xFFFD);
      i += used;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

bool is_word_code_point(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= '0' && cp <= '9') || (cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z');
  }
  struct Range {
    char32_t lo, hi;
  };
  // Punctuation, symbols and other non-letter blocks.
  static constexpr Range kSeparators[] = {
      {0x80, 0xBF},     {0xD7, 0xD7},     {0xF7, 0xF7},     {0x2000, 0x2BFF}, {0x3000, 0x303F},
      {0xFE30, 0xFE4F}, {0xFF00, 0xFF20}, {0xFFF0, 0xFFFF}, {0x1F000, 0x1FAFF},
  };
  for (const auto& r : kSeparators) {
    if (cp >= r.lo && cp <= r.hi) return false;
  }
  return true;
}

char32_t lower_code_point(char32_t cp) {
  if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  if ((cp >= 0x100 && cp <= 0x137) || (cp >= 0x14A && cp <= 0x177)) {
    return cp % 2 == 0 ? cp + 1 : cp;
  }
  if ((cp >= 0x139 && cp <= 0x148) || (cp >= 0x179 && cp <= 0x17E)) {
    return cp % 2 == 1 ? cp + 1 : cp;
  }
  if (cp == 0x178) return 0xFF;
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  return cp;
}

Tokenizer Tokenizer::load(const std::filesystem::path& stopwords_file) {
  std::unordered_set<std::string> words;
  for (const auto& line : read_data_lines(stopwords_file)) {
    std::istringstream in(line);
    std::string w;
    while (in >> w) words.insert(w);
  }
  return Tokenizer(std::move(words));
}

std::vector<std::string> Tokenizer::tokenize(std::string_view text) const {
  std::vector<std::string> tokens;
  std::string current;
  std::size_t current_len = 0;
  auto flush = [&] {
    if (current_len > 1 && !stopwords_.contains(current)) tokens.push_back(current);
    current.clear();
    current_len = 0;
  };
  // ASCII fast path avoids the UTF-32 round trip for the common case.
  bool ascii = true;
  for (char c : text) {
    if (static_cast<unsigned char>(c) >= 0x80) {
      ascii = false;
      break;
    }
  }
  if (ascii) {
    for (char c : text) {
      if (is_word_code_point(static_cast<unsigned char>(c))) {
        current += (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 0x20) : c;
        ++current_len;
      } else if (current_len) {
        flush();
      }
    }
  } else {
    for (char32_t cp : decode_utf8(text)) {
      if (is_word_code_point(cp)) {
        append_utf8(current, lower_code_point(cp));
        ++current_len;
      } else if (current_len) {
        flush();
      }
    }
  }
  if (current_len) flush();
  return tokens;
}

void count_ngrams(std::string_view text, const Tokenizer& tokenizer, TermCounts& counts) {
  const auto tokens = tokenizer.tokenize(text);
  for (const auto& t : tokens) ++counts[t];
  for (std::size_t i = 1; i < tokens.size(); ++i) ++counts[tokens[i - 1] + " " + tokens[i]];
}

TermCounts count_ngrams(std::span<const std::string> texts, const Tokenizer& tokenizer) {
  TermCounts counts;
  for (const auto& text : texts) count_ngrams(text, tokenizer, counts);
  return counts;
}

std::vector<NgramTerm> extract_ngrams(std::string_view text, Field field,
                                      const Tokenizer& tokenizer, const FieldWeights& weights) {
  TermCounts counts;
  count_ngrams(text, tokenizer, counts);
  std::vector<NgramTerm> out;
  out.reserve(counts.size());
  for (auto& [term, tf] : counts) out.push_back({term, weights.of(field), tf});
  return out;
}

}  // namespace trackwall
