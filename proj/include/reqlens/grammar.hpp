#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "reqlens/features.hpp"

namespace reqlens {

enum class ConstraintKind { agree };

// Well-formedness condition on a completed constituent. AGREE holds iff the
// named children's value sets for `feature` share at least one value.
struct Constraint {
  ConstraintKind kind = ConstraintKind::agree;
  std::string feature;
  std::vector<std::size_t> positions;  // rhs indices, at least two, distinct

  friend bool operator==(const Constraint&, const Constraint&) = default;
};

struct GrammarRule {
  std::string lhs;
  std::vector<std::string> rhs;
  std::vector<Constraint> constraints;
  std::size_t head_index = 0;  // child whose features the constituent inherits
  std::size_t rule_index = 0;  // 0-based position in the grammar file
  std::size_t line = 0;

  friend bool operator==(const GrammarRule&, const GrammarRule&) = default;
};

using SymbolId = std::uint32_t;

// Validated, immutable CFG. Symbols are interned so the parser can work on
// integer ids; names remain available for diagnostics and tree labels.
class Grammar {
 public:
  Grammar(std::vector<GrammarRule> rules, std::set<std::string> terminals, std::string start_symbol = "S");

  const std::vector<GrammarRule>& rules() const { return rules_; }
  const std::string& start_symbol() const { return start_symbol_; }
  const std::set<std::string>& terminals() const { return terminals_; }
  const std::set<std::string>& nonterminals() const { return nonterminals_; }

  bool is_terminal(std::string_view symbol) const { return terminals_.count(std::string(symbol)) != 0; }

  // Interned view.
  std::size_t symbol_count() const { return names_.size(); }
  const std::string& symbol_name(SymbolId id) const { return names_[id]; }
  std::optional<SymbolId> symbol_id(std::string_view name) const;
  bool is_terminal(SymbolId id) const { return terminal_flags_[id]; }
  SymbolId start_id() const { return start_id_; }
  SymbolId lhs_id(std::size_t rule) const { return lhs_ids_[rule]; }
  std::span<const SymbolId> rhs_ids(std::size_t rule) const { return rhs_ids_[rule]; }
  std::span<const std::size_t> rules_for(SymbolId lhs) const { return by_lhs_[lhs]; }

 private:
  SymbolId intern(const std::string& name);

  std::vector<GrammarRule> rules_;
  std::set<std::string> terminals_;
  std::set<std::string> nonterminals_;
  std::string start_symbol_;

  std::vector<std::string> names_;
  std::unordered_map<std::string, SymbolId> ids_;
  std::vector<bool> terminal_flags_;
  std::vector<SymbolId> lhs_ids_;
  std::vector<std::vector<SymbolId>> rhs_ids_;
  std::vector<std::vector<std::size_t>> by_lhs_;
  SymbolId start_id_ = 0;
};

// Line format:
//   %start S
//   %terminals DET NOUN VERB ...
//   LHS -> SYM SYM ... [: agree(feature, i, j, ...)] [: head k]
// '#' starts a comment. Errors name `source:line`.
Grammar parse_grammar(std::string_view text, std::string_view source = "<memory>");
Grammar load_grammar(const std::filesystem::path& path);

// Serialises back to the file format (round-trips through parse_grammar).
std::string format_grammar(const Grammar& grammar);

bool check_constraint(const Constraint& constraint, std::span<const FeatureMap> child_features);

}  // namespace reqlens
