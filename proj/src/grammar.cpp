#include "reqlens/grammar.hpp"

#include <algorithm>
#include <charconv>

#include "reqlens/error.hpp"
#include "reqlens/text_util.hpp"

namespace reqlens {

namespace {

[[noreturn]] void fail(std::string_view source, std::size_t line, const std::string& what) {
  throw Error(ErrorKind::invalid_input,
              std::string(source) + (line ? ":" + std::to_string(line) : std::string()) + ": " + what);
}

bool valid_symbol(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
  });
}

std::size_t parse_index(std::string_view text, std::string_view source, std::size_t line) {
  text = trim(text);
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    fail(source, line, "expected a non-negative index, got '" + std::string(text) + "'");
  return value;
}

}  // namespace

Grammar::Grammar(std::vector<GrammarRule> rules, std::set<std::string> terminals, std::string start_symbol)
    : rules_(std::move(rules)), terminals_(std::move(terminals)), start_symbol_(std::move(start_symbol)) {
  const std::string_view source = "grammar";
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    auto& r = rules_[i];
    r.rule_index = i;
    if (terminals_.count(r.lhs)) fail(source, r.line, "terminal category '" + r.lhs + "' used as rule lhs");
    nonterminals_.insert(r.lhs);
  }
  if (!nonterminals_.count(start_symbol_)) fail(source, 0, "no rule for start symbol '" + start_symbol_ + "'");

  for (const auto& r : rules_) {
    if (r.rhs.empty()) fail(source, r.line, "rule for '" + r.lhs + "' has an empty rhs");
    if (r.head_index >= r.rhs.size())
      fail(source, r.line, "head index " + std::to_string(r.head_index) + " out of range");
    for (const auto& sym : r.rhs)
      if (!terminals_.count(sym) && !nonterminals_.count(sym))
        fail(source, r.line, "undefined symbol '" + sym + "'");
    for (const auto& c : r.constraints) {
      if (c.positions.size() < 2) fail(source, r.line, "constraint needs at least two positions");
      if (!find_feature_domain(c.feature)) fail(source, r.line, "unknown feature '" + c.feature + "'");
      std::set<std::size_t> seen;
      for (const auto p : c.positions) {
        if (p >= r.rhs.size())
          fail(source, r.line, "constraint index " + std::to_string(p) + " out of range for '" + r.lhs + "' rule");
        if (!seen.insert(p).second) fail(source, r.line, "constraint repeats position " + std::to_string(p));
      }
    }
  }

  for (const auto& t : terminals_) intern(t);
  for (const auto& n : nonterminals_) intern(n);
  by_lhs_.resize(names_.size());
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const auto lhs = ids_.at(rules_[i].lhs);
    lhs_ids_.push_back(lhs);
    std::vector<SymbolId> rhs;
    for (const auto& sym : rules_[i].rhs) rhs.push_back(ids_.at(sym));
    rhs_ids_.push_back(std::move(rhs));
    by_lhs_[lhs].push_back(i);
  }
  start_id_ = ids_.at(start_symbol_);
}

SymbolId Grammar::intern(const std::string& name) {
  if (const auto it = ids_.find(name); it != ids_.end()) return it->second;
  const auto id = static_cast<SymbolId>(names_.size());
  names_.push_back(name);
  ids_.emplace(name, id);
  terminal_flags_.push_back(terminals_.count(name) != 0);
  return id;
}

std::optional<SymbolId> Grammar::symbol_id(std::string_view name) const {
  if (const auto it = ids_.find(std::string(name)); it != ids_.end()) return it->second;
  return std::nullopt;
}

Grammar parse_grammar(std::string_view text, std::string_view source) {
  std::vector<GrammarRule> rules;
  std::set<std::string> terminals;
  std::string start = "S";
  std::unordered_map<std::string, std::size_t> first_use;  // rhs symbol -> line

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '%') {
      const auto words = split_words(line);
      if (words[0] == "%start") {
        if (words.size() != 2 || !valid_symbol(words[1])) fail(source, line_no, "%start takes one symbol");
        start = std::string(words[1]);
      } else if (words[0] == "%terminals") {
        for (std::size_t i = 1; i < words.size(); ++i) {
          if (!valid_symbol(words[i])) fail(source, line_no, "invalid terminal '" + std::string(words[i]) + "'");
          terminals.emplace(words[i]);
        }
      } else {
        fail(source, line_no, "unknown directive '" + std::string(words[0]) + "'");
      }
      continue;
    }

    const auto arrow = line.find("->");
    if (arrow == std::string_view::npos) fail(source, line_no, "expected 'LHS -> RHS'");
    GrammarRule rule;
    rule.line = line_no;
    const auto lhs = trim(line.substr(0, arrow));
    if (!valid_symbol(lhs)) fail(source, line_no, "invalid lhs '" + std::string(lhs) + "'");
    rule.lhs = std::string(lhs);

    // Clauses are separated by ':' outside parentheses.
    std::vector<std::string_view> parts;
    {
      const auto rest = line.substr(arrow + 2);
      int depth = 0;
      std::size_t begin = 0;
      for (std::size_t i = 0; i < rest.size(); ++i) {
        if (rest[i] == '(') ++depth;
        else if (rest[i] == ')') --depth;
        else if (rest[i] == ':' && depth == 0) {
          parts.push_back(rest.substr(begin, i - begin));
          begin = i + 1;
        }
      }
      parts.push_back(rest.substr(begin));
    }

    for (const auto sym : split_words(parts[0])) {
      if (!valid_symbol(sym)) fail(source, line_no, "invalid symbol '" + std::string(sym) + "'");
      rule.rhs.emplace_back(sym);
      first_use.emplace(std::string(sym), line_no);
    }
    if (rule.rhs.empty()) fail(source, line_no, "empty rhs");
    rule.head_index = rule.rhs.size() - 1;

    for (std::size_t p = 1; p < parts.size(); ++p) {
      const auto clause = trim(parts[p]);
      if (clause.rfind("head", 0) == 0) {
        rule.head_index = parse_index(clause.substr(4), source, line_no);
        if (rule.head_index >= rule.rhs.size())
          fail(source, line_no, "head index " + std::to_string(rule.head_index) + " out of range");
      } else if (clause.rfind("agree", 0) == 0) {
        const auto open = clause.find('(');
        const auto close = clause.rfind(')');
        if (open == std::string_view::npos || close == std::string_view::npos || close < open ||
            trim(clause.substr(4 + 1, open - 5)).size() != 0)
          fail(source, line_no, "malformed agree clause '" + std::string(clause) + "'");
        Constraint c;
        const auto args = clause.substr(open + 1, close - open - 1);
        std::size_t a = 0;
        bool first = true;
        while (a <= args.size()) {
          const auto comma = args.find(',', a);
          const auto arg = trim(args.substr(a, comma == std::string_view::npos ? args.npos : comma - a));
          a = comma == std::string_view::npos ? args.size() + 1 : comma + 1;
          if (first) {
            c.feature = std::string(arg);
            first = false;
          } else {
            c.positions.push_back(parse_index(arg, source, line_no));
          }
        }
        if (!find_feature_domain(c.feature)) fail(source, line_no, "unknown feature '" + c.feature + "'");
        if (c.positions.size() < 2) fail(source, line_no, "agree needs at least two positions");
        std::set<std::size_t> seen;
        for (const auto ix : c.positions) {
          if (ix >= rule.rhs.size())
            fail(source, line_no, "constraint index " + std::to_string(ix) + " out of range");
          if (!seen.insert(ix).second) fail(source, line_no, "constraint repeats position " + std::to_string(ix));
        }
        rule.constraints.push_back(std::move(c));
      } else {
        fail(source, line_no, "unknown clause '" + std::string(clause) + "'");
      }
    }
    rules.push_back(std::move(rule));
  }

  // Symbol checks here so the message can point at the offending line.
  std::set<std::string> lhs_set;
  for (const auto& r : rules) lhs_set.insert(r.lhs);
  for (const auto& r : rules) {
    if (terminals.count(r.lhs)) fail(source, r.line, "terminal category '" + r.lhs + "' used as rule lhs");
    for (const auto& sym : r.rhs)
      if (!terminals.count(sym) && !lhs_set.count(sym)) fail(source, r.line, "undefined symbol '" + sym + "'");
  }
  if (!lhs_set.count(start)) fail(source, 0, "no rule for start symbol '" + start + "'");

  return Grammar(std::move(rules), std::move(terminals), std::move(start));
}

Grammar load_grammar(const std::filesystem::path& path) {
  return parse_grammar(read_file(path), path.string());
}

std::string format_grammar(const Grammar& grammar) {
  std::string out = "%start " + grammar.start_symbol() + "\n%terminals";
  for (const auto& t : grammar.terminals()) out += " " + t;
  out += "\n";
  for (const auto& r : grammar.rules()) {
    out += r.lhs + " ->";
    for (const auto& s : r.rhs) out += " " + s;
    for (const auto& c : r.constraints) {
      out += " : agree(" + c.feature;
      for (const auto p : c.positions) out += ", " + std::to_string(p);
      out += ")";
    }
    if (r.head_index != r.rhs.size() - 1) out += " : head " + std::to_string(r.head_index);
    out += "\n";
  }
  return out;
}

bool check_constraint(const Constraint& constraint, std::span<const FeatureMap> child_features) {
  const auto* domain = find_feature_domain(constraint.feature);
  ValueSet common = domain ? domain->full() : ~ValueSet{0};
  for (const auto p : constraint.positions) {
    if (p >= child_features.size()) return false;
    common &= child_features[p].get(constraint.feature);
  }
  return common != 0;
}

}  // namespace reqlens
