#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "reqlens/features.hpp"

namespace reqlens {

inline constexpr std::string_view kOovCategory = "NOUN";

struct LexEntry {
  std::string surface;  // case-folded key
  std::string pos;
  FeatureMap features;
  bool oov = false;

  friend bool operator==(const LexEntry&, const LexEntry&) = default;
  friend auto operator<=>(const LexEntry&, const LexEntry&) = default;
};

class Lexicon {
 public:
  Lexicon() = default;

  // Tab separated `surface<TAB>POS[<TAB>feature=value[;feature=value]*]`,
  // '#' comments. Errors name `source:line`.
  static Lexicon parse(std::string_view text, std::string_view source = "<memory>");

  // Duplicate (surface, pos, features) triples collapse into one entry.
  void add(LexEntry entry);

  std::size_t size() const { return size_; }

  // Every homograph of `surface`, sorted by (pos, features) so the result
  // does not depend on file order. Unlisted words yield a single OOV NOUN.
  std::vector<LexEntry> lookup(std::string_view surface) const;

  bool contains(std::string_view surface) const;

  // Distinct parts of speech used by the entries.
  std::set<std::string> categories() const;

 private:
  std::unordered_map<std::string, std::vector<LexEntry>> entries_;
  std::size_t size_ = 0;
};

Lexicon load_lexicon(const std::filesystem::path& path);

inline std::vector<LexEntry> lookup(const Lexicon& lexicon, std::string_view surface) {
  return lexicon.lookup(surface);
}

}  // namespace reqlens
