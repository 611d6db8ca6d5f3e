#include "reqlens/chart_parser.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace reqlens {

namespace {

using FeatureId = std::uint32_t;
using ItemId = std::uint32_t;
constexpr FeatureId kUntracked = ~FeatureId{0};
constexpr ItemId kNoItem = ~ItemId{0};

inline void hash_mix(std::size_t& seed, std::size_t v) {
  seed ^= v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
}

class FeatureTable {
 public:
  FeatureId intern(const FeatureMap& f) {
    if (const auto it = ids_.find(f); it != ids_.end()) return it->second;
    const auto id = static_cast<FeatureId>(maps_.size());
    maps_.push_back(f);
    ids_.emplace(f, id);
    return id;
  }
  const FeatureMap& get(FeatureId id) const { return maps_[id]; }

 private:
  std::vector<FeatureMap> maps_;
  std::map<FeatureMap, FeatureId> ids_;
};

// Dotted rule instance. `feats` holds the feature id of every consumed child
// the rule reads (head or constrained); other positions hold kUntracked, so
// derivations that differ only in unread features share one item.
struct Item {
  std::uint32_t rule;
  std::uint32_t dot;
  std::uint32_t start;
  std::vector<FeatureId> feats;
  std::vector<std::pair<ItemId, NodeId>> back;  // (predecessor, child)
};

struct ItemKey {
  std::uint32_t rule, dot, start;
  std::vector<FeatureId> feats;
  friend bool operator==(const ItemKey&, const ItemKey&) = default;
};

struct ItemKeyHash {
  std::size_t operator()(const ItemKey& k) const {
    std::size_t h = k.rule;
    hash_mix(h, k.dot);
    hash_mix(h, k.start);
    for (const auto f : k.feats) hash_mix(h, f);
    return h;
  }
};

struct NodeKey {
  SymbolId symbol;
  std::uint32_t begin, end;
  FeatureId features;
  friend bool operator==(const NodeKey&, const NodeKey&) = default;
};

struct NodeKeyHash {
  std::size_t operator()(const NodeKey& k) const {
    std::size_t h = k.symbol;
    hash_mix(h, k.begin);
    hash_mix(h, k.end);
    hash_mix(h, k.features);
    return h;
  }
};

struct RawNode {
  NodeKey key;
  std::optional<std::string> surface;
  std::vector<ItemId> completions;
};

struct ChartSet {
  std::vector<ItemId> items;
  std::unordered_map<ItemKey, ItemId, ItemKeyHash> index;
  std::unordered_map<SymbolId, std::vector<ItemId>> waiting;  // next nonterminal -> items
  std::unordered_set<SymbolId> predicted;
};

struct ChartResult {
  std::vector<RawNode> nodes;
  std::vector<Item> items;
  FeatureTable features;
  std::vector<NodeId> roots;
};

class EarleyChart {
 public:
  EarleyChart(std::span<const Token> tokens, const Grammar& grammar, const Lexicon& lexicon)
      : n_(tokens.size()), grammar_(grammar), sets_(tokens.size() + 1), leaves_(tokens.size()) {
    tracked_.resize(grammar.rules().size());
    for (const auto& r : grammar.rules()) {
      auto& mask = tracked_[r.rule_index];
      mask.assign(r.rhs.size(), false);
      mask[r.head_index] = true;
      for (const auto& c : r.constraints)
        for (const auto p : c.positions) mask[p] = true;
    }
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      for (const auto& entry : lexicon.lookup(tokens[i].surface)) {
        const auto sym = grammar.symbol_id(entry.pos);
        if (!sym || !grammar.is_terminal(*sym)) continue;
        const NodeKey key{*sym, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i + 1),
                          out_.features.intern(entry.features)};
        if (node_index_.count(key)) continue;
        const auto id = new_node(key);
        out_.nodes[id].surface = tokens[i].surface;
        leaves_[i][*sym].push_back(id);
      }
    }
  }

  ChartResult run() && {
    predict(0, grammar_.start_id());
    for (std::size_t k = 0; k <= n_; ++k) {
      // The item list grows while we walk it.
      for (std::size_t i = 0; i < sets_[k].items.size(); ++i) {
        const ItemId id = sets_[k].items[i];
        const auto rhs = grammar_.rhs_ids(out_.items[id].rule);
        const auto dot = out_.items[id].dot;
        if (dot == rhs.size()) {
          complete(id, k);
          continue;
        }
        const SymbolId next = rhs[dot];
        if (!grammar_.is_terminal(next)) {
          predict(k, next);
        } else if (k < n_) {
          if (const auto it = leaves_[k].find(next); it != leaves_[k].end())
            for (const auto leaf : it->second) advance(id, leaf, k + 1);
        }
      }
    }
    for (NodeId id = 0; id < out_.nodes.size(); ++id) {
      const auto& key = out_.nodes[id].key;
      if (key.symbol == grammar_.start_id() && key.begin == 0 && key.end == n_ && !out_.nodes[id].surface)
        out_.roots.push_back(id);
    }
    return std::move(out_);
  }

 private:
  NodeId new_node(const NodeKey& key) {
    const auto id = static_cast<NodeId>(out_.nodes.size());
    out_.nodes.push_back(RawNode{key, std::nullopt, {}});
    node_index_.emplace(key, id);
    return id;
  }

  void predict(std::size_t k, SymbolId symbol) {
    if (!sets_[k].predicted.insert(symbol).second) return;
    for (const auto r : grammar_.rules_for(symbol))
      add_item(k, ItemKey{static_cast<std::uint32_t>(r), 0, static_cast<std::uint32_t>(k), {}}, kNoItem, 0);
  }

  // Adds an item to set k, or records another backpointer on an existing one.
  void add_item(std::size_t k, ItemKey key, ItemId pred, NodeId child) {
    auto& set = sets_[k];
    if (const auto it = set.index.find(key); it != set.index.end()) {
      if (pred != kNoItem) out_.items[it->second].back.emplace_back(pred, child);
      return;
    }
    const auto id = static_cast<ItemId>(out_.items.size());
    Item item{key.rule, key.dot, key.start, key.feats, {}};
    if (pred != kNoItem) item.back.emplace_back(pred, child);
    out_.items.push_back(std::move(item));
    set.index.emplace(std::move(key), id);
    set.items.push_back(id);
    const auto rhs = grammar_.rhs_ids(out_.items[id].rule);
    const auto dot = out_.items[id].dot;
    if (dot < rhs.size() && !grammar_.is_terminal(rhs[dot])) set.waiting[rhs[dot]].push_back(id);
  }

  void advance(ItemId pred, NodeId child, std::size_t k) {
    const auto& item = out_.items[pred];
    ItemKey key{item.rule, item.dot + 1, item.start, item.feats};
    key.feats.push_back(tracked_[item.rule][item.dot] ? out_.nodes[child].key.features : kUntracked);
    add_item(k, std::move(key), pred, child);
  }

  void complete(ItemId id, std::size_t k) {
    const auto& item = out_.items[id];
    const auto& rule = grammar_.rules()[item.rule];
    if (!rule.constraints.empty()) {
      std::vector<FeatureMap> children(rule.rhs.size());
      for (std::size_t p = 0; p < rule.rhs.size(); ++p)
        if (item.feats[p] != kUntracked) children[p] = out_.features.get(item.feats[p]);
      for (const auto& c : rule.constraints)
        if (!check_constraint(c, children)) return;
    }
    const NodeKey key{grammar_.lhs_id(item.rule), item.start, static_cast<std::uint32_t>(k),
                      item.feats[rule.head_index]};
    if (const auto it = node_index_.find(key); it != node_index_.end()) {
      out_.nodes[it->second].completions.push_back(id);
      return;
    }
    const auto node = new_node(key);
    out_.nodes[node].completions.push_back(id);
    // No empty rules, so set `start` is closed and its waiting list is final.
    if (const auto it = sets_[item.start].waiting.find(key.symbol); it != sets_[item.start].waiting.end()) {
      const auto waiting = it->second;
      for (const auto w : waiting) advance(w, node, k);
    }
  }

  std::size_t n_;
  const Grammar& grammar_;
  std::vector<std::vector<bool>> tracked_;
  std::vector<ChartSet> sets_;
  std::vector<std::unordered_map<SymbolId, std::vector<NodeId>>> leaves_;
  std::unordered_map<NodeKey, NodeId, NodeKeyHash> node_index_;
  ChartResult out_;
};

// Expands the backpointer graph of a complete item into child sequences.
class PathExpander {
 public:
  explicit PathExpander(const ChartResult& chart) : chart_(chart) {}

  const std::vector<std::vector<NodeId>>& paths(ItemId id) {
    if (const auto it = memo_.find(id); it != memo_.end()) return it->second;
    std::vector<std::vector<NodeId>> out;
    const auto& item = chart_.items[id];
    if (item.dot == 0) {
      out.emplace_back();
    } else {
      for (const auto& [pred, child] : item.back) {
        for (const auto& prefix : paths(pred)) {
          auto seq = prefix;
          seq.push_back(child);
          out.push_back(std::move(seq));
        }
      }
    }
    return memo_.emplace(id, std::move(out)).first->second;
  }

 private:
  const ChartResult& chart_;
  std::unordered_map<ItemId, std::vector<std::vector<NodeId>>> memo_;
};

}  // namespace

ParseForest parse(std::span<const Token> tokens, const Grammar& grammar, const Lexicon& lexicon) {
  ParseForest forest;
  forest.token_count_ = tokens.size();
  if (tokens.empty()) return forest;

  EarleyChart chart_builder(tokens, grammar, lexicon);
  const ChartResult chart = std::move(chart_builder).run();
  forest.item_count_ = chart.items.size();

  // Keep only what a root reaches, numbered in breadth-first order.
  std::vector<NodeId> remap(chart.nodes.size(), ~NodeId{0});
  std::vector<NodeId> order;
  auto visit = [&](NodeId raw) {
    if (remap[raw] != ~NodeId{0}) return remap[raw];
    remap[raw] = static_cast<NodeId>(order.size());
    order.push_back(raw);
    return remap[raw];
  };

  auto feature_less = [&](NodeId a, NodeId b) {
    return chart.features.get(chart.nodes[a].key.features) < chart.features.get(chart.nodes[b].key.features);
  };
  std::vector<NodeId> raw_roots = chart.roots;
  std::stable_sort(raw_roots.begin(), raw_roots.end(), feature_less);
  for (const auto r : raw_roots) forest.roots_.push_back(visit(r));

  PathExpander expander(chart);
  std::vector<std::vector<std::pair<std::size_t, std::vector<NodeId>>>> raw_derivations;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& raw = chart.nodes[order[i]];
    std::vector<std::pair<std::size_t, std::vector<NodeId>>> ds;
    for (const auto item : raw.completions)
      for (const auto& seq : expander.paths(item)) ds.emplace_back(chart.items[item].rule, seq);

    std::sort(ds.begin(), ds.end(), [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      const auto& x = a.second;
      const auto& y = b.second;
      for (std::size_t c = 0; c < std::min(x.size(), y.size()); ++c)
        if (chart.nodes[x[c]].key.end != chart.nodes[y[c]].key.end)
          return chart.nodes[x[c]].key.end < chart.nodes[y[c]].key.end;
      for (std::size_t c = 0; c < std::min(x.size(), y.size()); ++c) {
        if (feature_less(x[c], y[c])) return true;
        if (feature_less(y[c], x[c])) return false;
      }
      return x < y;
    });
    for (auto& d : ds)
      for (auto& child : d.second) child = visit(child);
    raw_derivations.push_back(std::move(ds));
  }

  forest.nodes_.reserve(order.size());
  for (const auto raw : order) {
    const auto& n = chart.nodes[raw];
    forest.nodes_.push_back(ForestNode{grammar.symbol_name(n.key.symbol), n.key.begin, n.key.end,
                                       chart.features.get(n.key.features), n.surface});
  }
  forest.derivations_.resize(order.size());
  for (std::size_t i = 0; i < raw_derivations.size(); ++i)
    for (auto& [rule, children] : raw_derivations[i])
      forest.derivations_[i].push_back(Derivation{rule, std::move(children)});
  return forest;
}

namespace {

class TreeEnumerator {
 public:
  TreeEnumerator(const ParseForest& forest, std::size_t cap)
      : forest_(forest), cap_(cap), memo_(forest.nodes().size()), active_(forest.nodes().size(), false) {}

  // First `cap` distinct trees of a node. Truncating each child list to
  // `cap` is exact: a derivation never needs more than `cap` elements of its
  // product, since at most cap-1 of them can repeat earlier trees.
  const std::vector<ParseTree>& trees(NodeId id) {
    if (memo_[id]) return *memo_[id];
    const auto& node = forest_.nodes()[id];
    std::vector<ParseTree> out;
    if (node.surface) {
      out.push_back(ParseTree{node.label, node.surface, {}, node.begin, node.end});
      memo_[id] = std::move(out);
      return *memo_[id];
    }
    active_[id] = true;
    std::unordered_set<std::string> seen;
    for (const auto& d : forest_.derivations(id)) {
      if (out.size() >= cap_) break;
      // A cyclic unit derivation back into an open node contributes nothing.
      if (std::any_of(d.children.begin(), d.children.end(), [&](NodeId c) { return active_[c]; })) continue;
      std::vector<const std::vector<ParseTree>*> lists;
      bool dead = false;
      for (const auto c : d.children) {
        lists.push_back(&trees(c));
        dead = dead || lists.back()->empty();
      }
      if (dead) continue;
      std::vector<std::size_t> odo(lists.size(), 0);
      bool exhausted = false;
      for (std::size_t produced = 0; !exhausted && produced < cap_ && out.size() < cap_; ++produced) {
        ParseTree t{node.label, std::nullopt, {}, node.begin, node.end};
        for (std::size_t c = 0; c < lists.size(); ++c) t.children.push_back((*lists[c])[odo[c]]);
        if (seen.insert(render_tree(t)).second) out.push_back(std::move(t));
        // Last child varies fastest.
        std::size_t c = lists.size();
        while (true) {
          if (c == 0) {
            exhausted = true;
            break;
          }
          --c;
          if (++odo[c] < lists[c]->size()) break;
          odo[c] = 0;
        }
      }
    }
    active_[id] = false;
    memo_[id] = std::move(out);
    return *memo_[id];
  }

 private:
  const ParseForest& forest_;
  std::size_t cap_;
  std::vector<std::optional<std::vector<ParseTree>>> memo_;
  std::vector<bool> active_;
};

void render_into(const ParseTree& tree, std::string& out) {
  out += '(';
  out += tree.label;
  if (tree.leaf) {
    out += " \"";
    for (const char c : *tree.leaf) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    out += '"';
  }
  for (const auto& child : tree.children) {
    out += ' ';
    render_into(child, out);
  }
  out += ')';
}

}  // namespace

std::vector<ParseTree> enumerate_trees(const ParseForest& forest, std::size_t limit) {
  std::vector<ParseTree> out;
  if (limit == 0 || forest.empty()) return out;
  TreeEnumerator enumerator(forest, limit);
  std::unordered_set<std::string> seen;
  for (const auto root : forest.roots()) {
    for (const auto& t : enumerator.trees(root)) {
      if (out.size() >= limit) return out;
      if (seen.insert(render_tree(t)).second) out.push_back(t);
    }
  }
  return out;
}

std::optional<ParseTree> first_parse(const ParseForest& forest) {
  auto trees = enumerate_trees(forest, 1);
  if (trees.empty()) return std::nullopt;
  return std::move(trees.front());
}

std::string render_tree(const ParseTree& tree) {
  std::string out;
  render_into(tree, out);
  return out;
}

}  // namespace reqlens
