#include "reqlens/term_extraction.hpp"

#include <algorithm>
#include <unordered_map>

#include "reqlens/text_util.hpp"

namespace reqlens {

std::string_view to_string(TermStatus status) {
  switch (status) {
    case TermStatus::candidate: return "CANDIDATE";
    case TermStatus::filtered: return "FILTERED";
    case TermStatus::classified: return "CLASSIFIED";
  }
  return "CANDIDATE";
}

std::optional<TermStatus> parse_term_status(std::string_view text) {
  const auto folded = fold_case(text);
  if (folded == "candidate") return TermStatus::candidate;
  if (folded == "filtered") return TermStatus::filtered;
  if (folded == "classified") return TermStatus::classified;
  return std::nullopt;
}

namespace {

// Returns true if `node` or anything below it is an NP.
bool collect(const ParseTree& node, std::vector<const ParseTree*>& out) {
  bool below = false;
  for (const auto& child : node.children) below = collect(child, out) || below;
  if (node.label == kNounPhraseLabel && !node.is_leaf()) {
    if (!below) out.push_back(&node);
    return true;
  }
  return below;
}

void leaves(const ParseTree& node, std::vector<const ParseTree*>& out) {
  if (node.is_leaf()) {
    out.push_back(&node);
    return;
  }
  for (const auto& c : node.children) leaves(c, out);
}

}  // namespace

std::vector<const ParseTree*> extract_minimal_nps(const ParseTree& tree) {
  std::vector<const ParseTree*> out;
  collect(tree, out);
  return out;
}

std::vector<ExtractedTerm> extract_terms(const ParseTree& tree, std::size_t sentence_index) {
  std::vector<ExtractedTerm> out;
  for (const auto* np : extract_minimal_nps(tree)) {
    std::vector<const ParseTree*> ls;
    leaves(*np, ls);
    ExtractedTerm term;
    std::vector<std::string> surfaces;
    for (const auto* leaf : ls) {
      surfaces.push_back(*leaf->leaf);
      if (leaf->label == kNounLabel) term.nouns.push_back(*leaf->leaf);
    }
    term.surface = join(surfaces, " ");
    term.sentence_index = sentence_index;
    term.np_span = {np->begin, np->end};
    term.provenance = {sentence_index};
    out.push_back(std::move(term));
  }
  return out;
}

std::string term_key(const ExtractedTerm& term) {
  std::string key;
  for (const auto& n : term.nouns) {
    if (!key.empty()) key += ' ';
    key += fold_case(n);
  }
  return key;
}

std::vector<ExtractedTerm> dedupe_terms(std::span<const ExtractedTerm> terms) {
  std::vector<ExtractedTerm> out;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& t : terms) {
    const auto key = term_key(t);
    if (key.empty()) continue;
    auto prov = t.provenance.empty() ? std::vector<std::size_t>{t.sentence_index} : t.provenance;
    if (const auto it = index.find(key); it != index.end()) {
      auto& kept = out[it->second].provenance;
      for (const auto s : prov)
        if (std::find(kept.begin(), kept.end(), s) == kept.end()) kept.push_back(s);
      continue;
    }
    index.emplace(key, out.size());
    out.push_back(t);
    out.back().provenance = std::move(prov);
  }
  return out;
}

std::string export_terms(std::span<const ExtractedTerm> terms) {
  struct Row {
    std::string noun;
    std::vector<std::size_t> sentences;
    TermStatus status;
  };
  std::vector<Row> rows;
  std::unordered_map<std::string, std::size_t> index;
  for (const auto& t : terms) {
    const auto prov = t.provenance.empty() ? std::vector<std::size_t>{t.sentence_index} : t.provenance;
    for (const auto& noun : t.nouns) {
      const auto key = fold_case(noun);
      auto [it, fresh] = index.emplace(key, rows.size());
      if (fresh) rows.push_back({noun, {}, t.status});
      auto& sentences = rows[it->second].sentences;
      for (const auto s : prov)
        if (std::find(sentences.begin(), sentences.end(), s) == sentences.end()) sentences.push_back(s);
    }
  }
  std::string out;
  for (const auto& r : rows) {
    out += r.noun;
    out += '\t';
    for (std::size_t i = 0; i < r.sentences.size(); ++i) {
      if (i) out += ',';
      out += std::to_string(r.sentences[i]);
    }
    out += '\t';
    out += to_string(r.status);
    out += '\n';
  }
  return out;
}

}  // namespace reqlens
