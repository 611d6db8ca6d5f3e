#include "reqlens/text_ingest.hpp"

#include <algorithm>
#include <array>

#include "reqlens/error.hpp"
#include "reqlens/text_util.hpp"

namespace reqlens {

namespace {

constexpr std::array<std::string_view, 16> kAbbreviations{
    "e.g.", "i.e.", "etc.", "vs.", "dr.", "mr.", "mrs.", "ms.",
    "prof.", "st.", "no.", "fig.", "approx.", "dept.", "inc.", "ltd."};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}
bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_abbreviation(std::string_view word) {
  const auto folded = fold_case(word);
  return std::find(kAbbreviations.begin(), kAbbreviations.end(), folded) != kAbbreviations.end();
}

// Width of a closing quote/bracket at `i`, 0 if none.
std::size_t closer_width(std::string_view s, std::size_t i) {
  const char c = s[i];
  if (c == '"' || c == '\'' || c == ')' || c == ']') return 1;
  if (static_cast<unsigned char>(c) == 0xE2 && i + 2 < s.size() &&
      static_cast<unsigned char>(s[i + 1]) == 0x80) {
    const auto third = static_cast<unsigned char>(s[i + 2]);
    if (third == 0x9D || third == 0x99) return 3;
  }
  return 0;
}

enum class CharClass { space, word, apostrophe, inner, separator };

// Classifies the (possibly multi-byte) character at `i`; sets `width`.
CharClass classify(std::string_view s, std::size_t i, std::size_t& width) {
  const auto c = static_cast<unsigned char>(s[i]);
  width = 1;
  if (is_space(s[i])) return CharClass::space;
  if (is_alnum(s[i])) return CharClass::word;
  if (c == '\'') return CharClass::apostrophe;
  if (c == '-' || c == '.' || c == '_' || c == '&' || c == '@') return CharClass::inner;
  if (c >= 0x80) {
    if (c == 0xE2 && i + 2 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0x80) {
      width = 3;
      const auto third = static_cast<unsigned char>(s[i + 2]);
      if (third == 0x99) return CharClass::apostrophe;
      if (third == 0x98 || third == 0x9C || third == 0x9D || third == 0x93 || third == 0x94 || third == 0xA6)
        return CharClass::separator;
    }
    std::size_t w = 1;
    if ((c & 0xE0) == 0xC0) w = 2;
    else if ((c & 0xF0) == 0xE0) w = 3;
    else if ((c & 0xF8) == 0xF0) w = 4;
    width = std::min(w, s.size() - i);
    return CharClass::word;
  }
  return CharClass::separator;
}

bool is_word_start(std::string_view s, std::size_t i) {
  std::size_t w = 0;
  return classify(s, i, w) == CharClass::word;
}

// Trims a raw token to its word core. A trailing apostrophe survives after
// 's' ("patients'"); a trailing period survives on known abbreviations.
Span trim_token(std::string_view text, Span raw) {
  std::size_t b = raw.begin;
  std::size_t e = raw.end;
  while (b < e && !is_word_start(text, b)) {
    std::size_t w = 0;
    classify(text, b, w);
    b += w;
  }
  if (b >= e) return {b, b};
  if (is_abbreviation(text.substr(b, e - b))) return {b, e};
  while (e > b) {
    const char last = text[e - 1];
    if (last == '.' || last == '-' || last == '_' || last == '&' || last == '@') {
      --e;
      continue;
    }
    const bool curly = e - b >= 3 && static_cast<unsigned char>(text[e - 3]) == 0xE2 &&
                       static_cast<unsigned char>(text[e - 2]) == 0x80 &&
                       static_cast<unsigned char>(text[e - 1]) == 0x99;
    if (last == '\'' || curly) {
      const std::size_t w = curly ? 3 : 1;
      const std::size_t before = e - w;
      if (before > b && (text[before - 1] == 's' || text[before - 1] == 'S')) break;
      e = before;
      continue;
    }
    break;
  }
  return {b, e};
}

}  // namespace

CompoundList CompoundList::parse(std::string_view text, std::string_view source) {
  CompoundList list;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (split_words(line).size() < 2)
      throw Error(ErrorKind::invalid_input, std::string(source) + ":" + std::to_string(line_no) +
                                                ": compound '" + std::string(line) + "' has fewer than two words");
    list.add(line);
  }
  return list;
}

void CompoundList::add(std::string_view phrase) {
  const auto words = split_words(phrase);
  std::string key;
  for (const auto w : words) {
    if (!key.empty()) key += ' ';
    key += fold_case(w);
  }
  if (words.empty()) return;
  max_words_ = std::max(max_words_, words.size());
  entries_.insert(std::move(key));
}

CompoundList load_compound_list(const std::filesystem::path& path) {
  return CompoundList::parse(read_file(path), path.string());
}

std::vector<Sentence> split_sentences(std::string_view body) {
  std::vector<Sentence> out;
  auto emit = [&](std::size_t begin, std::size_t end) {
    while (begin < end && is_space(body[begin])) ++begin;
    while (end > begin && is_space(body[end - 1])) --end;
    if (end > begin) out.push_back({out.size(), std::string(body.substr(begin, end - begin)), {begin, end}});
  };

  std::size_t start = 0;
  std::size_t i = 0;
  while (i < body.size()) {
    if (!is_terminator(body[i])) {
      ++i;
      continue;
    }
    const std::size_t term_begin = i;
    while (i < body.size() && is_terminator(body[i])) ++i;
    const std::size_t run = i - term_begin;
    while (i < body.size()) {
      const auto w = closer_width(body, i);
      if (!w) break;
      i += w;
    }
    const std::size_t boundary = i;
    bool split = false;
    if (boundary == body.size()) {
      split = true;
    } else if (is_space(body[boundary])) {
      std::size_t j = boundary;
      while (j < body.size() && is_space(body[j])) ++j;
      split = j == body.size() || is_upper(body[j]);
    }
    if (split && run == 1 && body[term_begin] == '.') {
      // A lone period may close an abbreviation rather than a sentence.
      std::size_t w = term_begin;
      while (w > start && !is_space(body[w - 1])) --w;
      if (is_abbreviation(body.substr(w, term_begin + 1 - w))) split = false;
    }
    if (split) {
      emit(start, boundary);
      start = boundary;
    }
  }
  emit(start, body.size());
  return out;
}

Document make_document(std::string doc_id, std::string title, std::string body) {
  Document doc{std::move(doc_id), std::move(title), std::move(body), {}};
  doc.sentences = split_sentences(doc.body);
  return doc;
}

std::vector<Token> tokenize(std::string_view text, const CompoundList& compounds) {
  std::vector<Token> words;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t w = 0;
    auto cls = classify(text, i, w);
    if (cls == CharClass::space || cls == CharClass::separator) {
      i += w;
      continue;
    }
    const std::size_t begin = i;
    while (i < text.size()) {
      cls = classify(text, i, w);
      if (cls == CharClass::space || cls == CharClass::separator) break;
      i += w;
    }
    const Span core = trim_token(text, {begin, i});
    if (core.end > core.begin)
      words.push_back({std::string(text.substr(core.begin, core.end - core.begin)), 0, core, false});
  }

  std::vector<Token> tokens;
  const std::size_t max_words = compounds.max_words();
  for (std::size_t pos = 0; pos < words.size();) {
    std::size_t matched = 1;
    if (max_words >= 2) {
      std::string key = fold_case(words[pos].surface);
      for (std::size_t k = 1; k < max_words && pos + k < words.size(); ++k) {
        key += ' ';
        key += fold_case(words[pos + k].surface);
        if (compounds.contains(key)) matched = k + 1;
      }
    }
    if (matched == 1) {
      Token t = words[pos];
      t.position = tokens.size();
      tokens.push_back(std::move(t));
    } else {
      std::vector<std::string> parts;
      for (std::size_t k = 0; k < matched; ++k) parts.push_back(words[pos + k].surface);
      tokens.push_back({join(parts, " "), tokens.size(), {words[pos].span.begin, words[pos + matched - 1].span.end}, true});
    }
    pos += matched;
  }
  return tokens;
}

std::vector<Token> tokenize(const Sentence& sentence, const CompoundList& compounds) {
  return tokenize(std::string_view(sentence.text), compounds);
}

std::string strip_terminal_punctuation(std::string_view text) {
  text = trim(text);
  while (!text.empty()) {
    const char c = text.back();
    if (is_terminator(c) || c == '"' || c == ')') {
      text.remove_suffix(1);
    } else if (text.size() >= 3 && static_cast<unsigned char>(text[text.size() - 3]) == 0xE2 &&
               static_cast<unsigned char>(text[text.size() - 2]) == 0x80 &&
               static_cast<unsigned char>(c) == 0x9D) {
      text.remove_suffix(3);
    } else {
      break;
    }
  }
  return std::string(trim(text));
}

}  // namespace reqlens
