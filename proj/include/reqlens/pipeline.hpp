#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "reqlens/chart_parser.hpp"
#include "reqlens/grammar.hpp"
#include "reqlens/knowledge_base.hpp"
#include "reqlens/lexicon.hpp"
#include "reqlens/term_extraction.hpp"
#include "reqlens/text_ingest.hpp"

namespace reqlens {

struct PipelineConfig {
  std::filesystem::path grammar_path;
  std::filesystem::path lexicon_path;
  std::filesystem::path compound_list_path;
  std::size_t parse_tree_limit = 10;
  int port = 8080;
  std::size_t max_sentences = 500;
};

// Seed data directory: $REQLENS_DATA_DIR if set, else the build-time default.
std::filesystem::path default_data_dir();

// Config pointing at seed.grammar / seed.lexicon / seed.compounds in `data_dir`.
PipelineConfig default_config(const std::filesystem::path& data_dir = default_data_dir());

struct SentenceAnalysis {
  Sentence sentence;
  std::vector<Token> tokens;
  std::optional<ParseTree> tree;  // first parse
  std::size_t parse_count = 0;    // capped at parse_tree_limit
  std::vector<ExtractedTerm> terms;
};

struct DocumentAnalysis {
  Document document;
  std::vector<SentenceAnalysis> sentences;
  std::vector<ExtractedTerm> terms;  // deduplicated across the document

  DocumentRecord record() const;
};

class Pipeline {
 public:
  Pipeline(Grammar grammar, Lexicon lexicon, CompoundList compounds, std::size_t parse_tree_limit = 10);

  // Loads the three data files; throws Error(invalid_input / io) on bad
  // configuration, including lexicon categories the grammar does not declare.
  static Pipeline load(const PipelineConfig& config);

  const Grammar& grammar() const { return grammar_; }
  const Lexicon& lexicon() const { return lexicon_; }
  const CompoundList& compounds() const { return compounds_; }
  std::size_t parse_tree_limit() const { return parse_tree_limit_; }

  SentenceAnalysis analyze_sentence(const Sentence& sentence) const;
  DocumentAnalysis analyze(std::string doc_id, std::string title, std::string body) const;

 private:
  Grammar grammar_;
  Lexicon lexicon_;
  CompoundList compounds_;
  std::size_t parse_tree_limit_;
};

// `render_tree` output, or `UNPARSED: <sentence>` when there is no parse.
std::string render_sentence(const SentenceAnalysis& analysis);

}  // namespace reqlens
