#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "reqlens/chart_parser.hpp"

namespace reqlens {

inline constexpr std::string_view kNounPhraseLabel = "NP";
inline constexpr std::string_view kNounLabel = "NOUN";

enum class TermStatus { candidate, filtered, classified };

std::string_view to_string(TermStatus status);
std::optional<TermStatus> parse_term_status(std::string_view text);

struct ExtractedTerm {
  std::string surface;             // NP leaves joined by spaces
  std::vector<std::string> nouns;  // NOUN leaves only
  std::size_t sentence_index = 0;
  std::pair<std::size_t, std::size_t> np_span;  // token indices [first, last)
  TermStatus status = TermStatus::candidate;
  std::vector<std::size_t> provenance;  // sentence indices, first occurrence first

  friend bool operator==(const ExtractedTerm&, const ExtractedTerm&) = default;
};

// NP nodes without an NP descendant, left to right.
std::vector<const ParseTree*> extract_minimal_nps(const ParseTree& tree);

std::vector<ExtractedTerm> extract_terms(const ParseTree& tree, std::size_t sentence_index);

// Case-folded key of a term's nouns ("" when the NP has none).
std::string term_key(const ExtractedTerm& term);

// Keeps the first occurrence of each noun key; later duplicates add their
// sentence indices to its provenance. Terms without nouns are dropped.
std::vector<ExtractedTerm> dedupe_terms(std::span<const ExtractedTerm> terms);

// `noun<TAB>indices<TAB>STATUS` lines, one per distinct noun.
std::string export_terms(std::span<const ExtractedTerm> terms);

}  // namespace reqlens
