#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace trackwall {

enum class Field { kUrl, kTitle, kKeywords, kBody };

inline constexpr Field kAllFields[] = {Field::kUrl, Field::kTitle, Field::kKeywords,
                                       Field::kBody};

std::string_view to_string(Field field);

// Terms from the publisher-controlled fields are more descriptive than body
// text, so they carry more weight.
struct FieldWeights {
  int url = 3;
  int title = 4;
  int keywords = 5;
  int body = 1;

  int of(Field field) const noexcept;
};

// Lowercases (ASCII, Latin-1, Latin Extended-A, Greek, Cyrillic), splits on
// every non-alphanumeric code point, drops single-character tokens and
// stopwords. Input is UTF-8; invalid sequences act as separators.
class Tokenizer {
 public:
  Tokenizer() = default;
  explicit Tokenizer(std::unordered_set<std::string> stopwords)
      : stopwords_(std::move(stopwords)) {}

  static Tokenizer load(const std::filesystem::path& stopwords_file);

  std::vector<std::string> tokenize(std::string_view text) const;

  bool is_stopword(std::string_view token) const {
    return stopwords_.contains(std::string(token));
  }

 private:
  std::unordered_set<std::string> stopwords_;
};

struct NgramTerm {
  std::string term;
  int field_weight = 0;
  int term_frequency = 0;

  friend bool operator==(const NgramTerm&, const NgramTerm&) = default;
};

// Raw in-field counts keyed by term. std::map keeps iteration in byte order,
// which fixes the floating-point summation order of the scorer.
using TermCounts = std::map<std::string, int>;

// Adds the unigrams and adjacent-token bigrams of `text` to `counts`.
void count_ngrams(std::string_view text, const Tokenizer& tokenizer, TermCounts& counts);

// Counts over several independent texts; bigrams never span two texts.
TermCounts count_ngrams(std::span<const std::string> texts, const Tokenizer& tokenizer);

// One entry per distinct term, ordered by term.
std::vector<NgramTerm> extract_ngrams(std::string_view text, Field field,
                                      const Tokenizer& tokenizer,
                                      const FieldWeights& weights = {});

// UTF-8 helpers shared with the HTML scanner.
std::u32string decode_utf8(std::string_view bytes);
void append_utf8(std::string& out, char32_t cp);
char32_t lower_code_point(char32_t cp);
bool is_word_code_point(char32_t cp);

}  // namespace trackwall
