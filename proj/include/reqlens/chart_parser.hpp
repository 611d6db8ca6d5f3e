#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reqlens/features.hpp"
#include "reqlens/grammar.hpp"
#include "reqlens/lexicon.hpp"
#include "reqlens/text_ingest.hpp"

namespace reqlens {

// A single labelled derivation. Leaves carry a part-of-speech label and the
// token surface; `begin`/`end` are token indices of the covered span.
struct ParseTree {
  std::string label;
  std::optional<std::string> leaf;
  std::vector<ParseTree> children;
  std::size_t begin = 0;
  std::size_t end = 0;

  bool is_leaf() const { return leaf.has_value(); }

  friend bool operator==(const ParseTree&, const ParseTree&) = default;
};

using NodeId = std::uint32_t;

// Completed constituent: one per (symbol, span, features).
struct ForestNode {
  std::string label;
  std::size_t begin = 0;
  std::size_t end = 0;
  FeatureMap features;
  std::optional<std::string> surface;  // set on leaves
};

struct Derivation {
  std::size_t rule_index = 0;
  std::vector<NodeId> children;
};

// Packed parse forest holding only constituents reachable from a root.
// Derivations of each node are stored in enumeration order: rule index,
// then child split points, then child features.
class ParseForest {
 public:
  std::size_t token_count() const { return token_count_; }
  bool empty() const { return roots_.empty(); }
  std::span<const NodeId> roots() const { return roots_; }
  const std::vector<ForestNode>& nodes() const { return nodes_; }
  std::span<const Derivation> derivations(NodeId node) const { return derivations_[node]; }

  // Number of Earley items built; exposed for diagnostics.
  std::size_t item_count() const { return item_count_; }

 private:
  friend ParseForest parse(std::span<const Token>, const Grammar&, const Lexicon&);

  std::size_t token_count_ = 0;
  std::vector<ForestNode> nodes_;
  std::vector<std::vector<Derivation>> derivations_;
  std::vector<NodeId> roots_;
  std::size_t item_count_ = 0;
};

// Earley chart parse. Each homograph of a token becomes its own leaf; a
// completion violating any of its rule's constraints is never added.
ParseForest parse(std::span<const Token> tokens, const Grammar& grammar, const Lexicon& lexicon);

// At most `limit` distinct trees in deterministic order (derivations by rule
// index then split points, children expanded left to right).
std::vector<ParseTree> enumerate_trees(const ParseForest& forest, std::size_t limit);

std::optional<ParseTree> first_parse(const ParseForest& forest);

// Bracketed form: (LABEL child ...) with leaves as (POS "surface").
std::string render_tree(const ParseTree& tree);

}  // namespace reqlens
