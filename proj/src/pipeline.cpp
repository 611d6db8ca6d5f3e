#include "reqlens/pipeline.hpp"

#include <cstdlib>

#include "reqlens/error.hpp"

#ifndef REQLENS_DEFAULT_DATA_DIR
#define REQLENS_DEFAULT_DATA_DIR "data"
#endif

namespace reqlens {

std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("REQLENS_DATA_DIR"); env && *env) return env;
  return REQLENS_DEFAULT_DATA_DIR;
}

PipelineConfig default_config(const std::filesystem::path& data_dir) {
  PipelineConfig c;
  c.grammar_path = data_dir / "seed.grammar";
  c.lexicon_path = data_dir / "seed.lexicon";
  c.compound_list_path = data_dir / "seed.compounds";
  return c;
}

Pipeline::Pipeline(Grammar grammar, Lexicon lexicon, CompoundList compounds, std::size_t parse_tree_limit)
    : grammar_(std::move(grammar)),
      lexicon_(std::move(lexicon)),
      compounds_(std::move(compounds)),
      parse_tree_limit_(parse_tree_limit) {
  if (parse_tree_limit_ < 1) throw Error(ErrorKind::invalid_input, "parse tree limit must be at least 1");
  std::string missing;
  for (const auto& pos : lexicon_.categories())
    if (!grammar_.is_terminal(pos)) missing += (missing.empty() ? "" : ", ") + pos;
  if (!grammar_.is_terminal(kOovCategory)) missing += (missing.empty() ? "" : ", ") + std::string(kOovCategory);
  if (!missing.empty())
    throw Error(ErrorKind::invalid_input, "lexicon categories not declared as grammar terminals: " + missing);
}

Pipeline Pipeline::load(const PipelineConfig& config) {
  return Pipeline(load_grammar(config.grammar_path), load_lexicon(config.lexicon_path),
                  config.compound_list_path.empty() ? CompoundList{} : load_compound_list(config.compound_list_path),
                  config.parse_tree_limit);
}

SentenceAnalysis Pipeline::analyze_sentence(const Sentence& sentence) const {
  SentenceAnalysis a{sentence, tokenize(sentence, compounds_), std::nullopt, 0, {}};
  if (a.tokens.empty()) return a;
  const auto forest = parse(a.tokens, grammar_, lexicon_);
  auto trees = enumerate_trees(forest, parse_tree_limit_);
  a.parse_count = trees.size();
  if (!trees.empty()) {
    a.tree = std::move(trees.front());
    a.terms = extract_terms(*a.tree, sentence.index);
  }
  return a;
}

DocumentAnalysis Pipeline::analyze(std::string doc_id, std::string title, std::string body) const {
  DocumentAnalysis out{make_document(std::move(doc_id), std::move(title), std::move(body)), {}, {}};
  std::vector<ExtractedTerm> all;
  for (const auto& s : out.document.sentences) {
    out.sentences.push_back(analyze_sentence(s));
    const auto& terms = out.sentences.back().terms;
    all.insert(all.end(), terms.begin(), terms.end());
  }
  out.terms = dedupe_terms(all);
  return out;
}

DocumentRecord DocumentAnalysis::record() const {
  DocumentRecord r{document.doc_id, document.title, {}};
  for (const auto& s : sentences)
    r.sentences.push_back(SentenceRecord{s.sentence.index, s.sentence.text,
                                         s.tree ? std::optional<std::string>(render_tree(*s.tree)) : std::nullopt,
                                         s.parse_count});
  return r;
}

std::string render_sentence(const SentenceAnalysis& analysis) {
  if (analysis.tree) return render_tree(*analysis.tree);
  return "UNPARSED: " + strip_terminal_punctuation(analysis.sentence.text);
}

}  // namespace reqlens
