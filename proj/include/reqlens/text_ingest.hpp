#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace reqlens {

// Half-open character range [begin, end).
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  friend bool operator==(const Span&, const Span&) = default;
};

struct Sentence {
  std::size_t index = 0;
  std::string text;
  Span span;  // into the document body

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

struct Document {
  std::string doc_id;
  std::string title;
  std::string body;
  std::vector<Sentence> sentences;
};

struct Token {
  std::string surface;
  std::size_t position = 0;
  Span span;  // into the sentence text
  bool is_compound = false;

  friend bool operator==(const Token&, const Token&) = default;
};

// Multi-word phrases merged into single tokens. Entries are stored
// case-folded with single spaces between words.
class CompoundList {
 public:
  CompoundList() = default;

  // One phrase per line, '#' comments, blank lines ignored. Throws
  // Error(invalid_input) naming the line for single-word entries.
  static CompoundList parse(std::string_view text, std::string_view source = "<memory>");

  void add(std::string_view phrase);
  bool contains(std::string_view folded_phrase) const { return entries_.count(std::string(folded_phrase)) != 0; }
  std::size_t size() const { return entries_.size(); }
  std::size_t max_words() const { return max_words_; }

 private:
  std::unordered_set<std::string> entries_;
  std::size_t max_words_ = 0;
};

CompoundList load_compound_list(const std::filesystem::path& path);

// Splits on '.', '!' or '?' followed by whitespace and a capital letter, or
// by end of text. A trailing period on a known abbreviation ("e.g.", "Dr.")
// does not end a sentence.
std::vector<Sentence> split_sentences(std::string_view body);

Document make_document(std::string doc_id, std::string title, std::string body);

// Word tokenisation with punctuation stripped, possessives and hyphenated
// words kept whole, then longest-match merging of listed compounds.
std::vector<Token> tokenize(std::string_view text, const CompoundList& compounds);
std::vector<Token> tokenize(const Sentence& sentence, const CompoundList& compounds);

// Sentence text with trailing terminal punctuation removed.
std::string strip_terminal_punctuation(std::string_view text);

}  // namespace reqlens
