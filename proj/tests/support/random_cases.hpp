#pragma once

// Random small grammars, lexicons and sentences for differential testing.

#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "reqlens/grammar.hpp"
#include "reqlens/lexicon.hpp"
#include "reqlens/text_ingest.hpp"

namespace testing_support {

struct RandomCase {
  std::string grammar_text;
  std::string lexicon_text;
  reqlens::Grammar grammar;
  reqlens::Lexicon lexicon;
  std::vector<reqlens::Token> tokens;

  std::string sentence() const {
    std::string s;
    for (const auto& t : tokens) s += (s.empty() ? "" : " ") + t.surface;
    return s;
  }
};

inline std::vector<reqlens::Token> make_tokens(const std::vector<std::string>& words) {
  std::vector<reqlens::Token> out;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    out.push_back({words[i], i, {offset, offset + words[i].size()}, false});
    offset += words[i].size() + 1;
  }
  return out;
}

class CaseGenerator {
 public:
  explicit CaseGenerator(unsigned seed) : rng_(seed) {}

  // Grammar of at most `max_rules` rules over S,P,Q,R and the first
  // `terminal_count` of A,B,C,D; unit rules only point "downwards" so there
  // are no unit cycles. Fewer terminals give more ambiguous grammars.
  RandomCase next(std::size_t max_rules = 15, std::size_t max_tokens = 8, std::size_t terminal_count = 4) {
    const std::vector<std::string> nts = {"S", "P", "Q", "R"};
    const std::vector<std::string> ts(std::begin(kTerminals), std::begin(kTerminals) + terminal_count);

    struct Rule {
      std::size_t lhs;
      std::vector<std::string> rhs;
      std::string tail;
    };
    std::vector<Rule> rules;
    const std::size_t random_rules = 3 + pick(max_rules - 3 - nts.size() + 1);
    for (std::size_t r = 0; r < random_rules; ++r) {
      Rule rule;
      rule.lhs = r == 0 ? 0 : pick(nts.size());
      const std::size_t len = 1 + pick(3);
      for (std::size_t k = 0; k < len; ++k) {
        if (len == 1) {
          // unit: terminal or a later nonterminal
          std::vector<std::string> options(ts);
          for (std::size_t n = rule.lhs + 1; n < nts.size(); ++n) options.push_back(nts[n]);
          rule.rhs.push_back(options[pick(options.size())]);
        } else {
          rule.rhs.push_back(coin(0.5) ? nts[pick(nts.size())] : ts[pick(ts.size())]);
        }
      }
      if (len >= 2 && coin(0.5)) {
        std::size_t a = pick(len), b = pick(len - 1);
        if (b >= a) ++b;
        rule.tail += " : agree(number, " + std::to_string(a) + ", " + std::to_string(b) + ")";
      }
      if (coin(0.5)) rule.tail += " : head " + std::to_string(pick(len));
      rules.push_back(rule);
    }
    // every used nonterminal gets at least one rule
    for (std::size_t n = 0; n < nts.size(); ++n) {
      bool has = false;
      for (const auto& r : rules) has = has || r.lhs == n;
      if (!has) rules.push_back({n, {ts[pick(ts.size())]}, ""});
    }

    std::string gtext = "%start S\n%terminals";
    for (const auto& t : ts) gtext += " " + t;
    gtext += "\n";
    for (const auto& r : rules) {
      gtext += nts[r.lhs] + " ->";
      for (const auto& s : r.rhs) gtext += " " + s;
      gtext += r.tail + "\n";
    }

    const std::vector<std::string> numbers = {"sg", "pl", "any"};
    std::vector<std::vector<std::string>> words_for(ts.size());
    std::string ltext;
    for (std::size_t w = 0; w < 6; ++w) {
      const std::string word = "w" + std::to_string(w);
      std::size_t n_entries = 1 + pick(2);
      for (std::size_t e = 0; e < n_entries; ++e) {
        std::size_t t = e == 0 ? w % ts.size() : pick(ts.size());
        ltext += word + "\t" + ts[t] + "\tnumber=" + numbers[pick(3)] + "\n";
        words_for[t].push_back(word);
      }
    }

    std::vector<std::string> words;
    if (coin(0.75)) {
      std::vector<std::string> terminals;
      if (sample(rules, nts, ts, 0, 0, terminals, max_tokens) && !terminals.empty()) {
        for (const auto& t : terminals) {
          std::size_t ti = t[0] - 'A';
          words.push_back(words_for[ti][pick(words_for[ti].size())]);
        }
      }
    }
    if (words.empty()) {
      const std::size_t n = 1 + pick(max_tokens);
      for (std::size_t i = 0; i < n; ++i) words.push_back("w" + std::to_string(pick(6)));
    }

    return RandomCase{gtext, ltext, reqlens::parse_grammar(gtext, "<random>"),
                      reqlens::Lexicon::parse(ltext, "<random>"), make_tokens(words)};
  }

  std::mt19937& rng() { return rng_; }

 private:
  static constexpr const char* kTerminals[] = {"A", "B", "C", "D"};

  template <class Rules>
  bool sample(const Rules& rules, const std::vector<std::string>& nts, const std::vector<std::string>& ts,
              std::size_t nt, std::size_t depth, std::vector<std::string>& out, std::size_t max_tokens) {
    if (depth > 6 || out.size() > max_tokens) return false;
    std::vector<std::size_t> options;
    for (std::size_t r = 0; r < rules.size(); ++r)
      if (rules[r].lhs == nt) options.push_back(r);
    const auto& rule = rules[options[pick(options.size())]];
    for (const auto& s : rule.rhs) {
      bool terminal = false;
      for (const auto& t : ts) terminal = terminal || t == s;
      if (terminal) {
        out.push_back(s);
      } else {
        std::size_t idx = 0;
        while (nts[idx] != s) ++idx;
        if (!sample(rules, nts, ts, idx, depth + 1, out, max_tokens)) return false;
      }
    }
    return out.size() <= max_tokens;
  }

  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }

  std::mt19937 rng_;
};

}  // namespace testing_support
