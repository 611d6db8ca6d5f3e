#include "cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include "reqlens/error.hpp"
#include "reqlens/knowledge_base.hpp"
#include "reqlens/pipeline.hpp"
#include "reqlens/service.hpp"
#include "reqlens/text_util.hpp"

namespace reqlens {
namespace {

namespace fs = std::filesystem;

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

// Thrown for configuration and input problems that map to exit 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::optional<std::string> grammar;
  std::optional<std::string> lexicon;
  std::optional<std::string> compounds;
  std::size_t tree_limit = 10;

  std::string input;
  std::string emit = "trees";

  std::string kb_path;
  std::string project_id = "project";
  std::string doc_id;
  std::string title;
  std::string term;
  std::string type;
  std::optional<std::string> edited;
  std::string status;

  int port = 8080;
  std::string host = "127.0.0.1";
  std::string projects_dir = "reqlens-projects";
  std::optional<std::string> ui_dir;
  std::size_t max_sentences = 500;
};

PipelineConfig config_from(const Options& o) {
  PipelineConfig config = default_config();
  if (o.grammar) config.grammar_path = *o.grammar;
  if (o.lexicon) config.lexicon_path = *o.lexicon;
  if (o.compounds) config.compound_list_path = *o.compounds;
  config.parse_tree_limit = o.tree_limit;
  config.port = o.port;
  config.max_sentences = o.max_sentences;
  return config;
}

Pipeline load_pipeline(const Options& o) {
  if (o.tree_limit < 1) throw UsageError("--tree-limit must be at least 1");
  try {
    return Pipeline::load(config_from(o));
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

std::string read_input(const std::string& path) {
  if (path == "-") return std::string(std::istreambuf_iterator<char>(std::cin), {});
  try {
    return read_file(path);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

ProjectKB open_kb(const std::string& path) {
  if (path.empty()) throw UsageError("--kb is required");
  try {
    return load_kb(path);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

ObjectType type_arg(const std::string& text) {
  auto type = parse_object_type(text);
  if (!type) throw UsageError("unknown object type '" + text + "' (expected FUNCTION, ENTITY or ATTRIBUTE)");
  return *type;
}

std::string occurrences_text(const std::vector<Occurrence>& occs) {
  std::vector<std::string> parts;
  for (const auto& o : occs) parts.push_back(o.doc_id + ":" + std::to_string(o.sentence_index));
  return join(parts, ",");
}

void print_term(std::ostream& out, const TermRecord& t) {
  out << t.value << '\t' << occurrences_text(t.provenance) << '\t' << to_string(t.status) << '\n';
}

int cmd_parse(const Options& o, std::ostream& out) {
  if (o.emit != "trees" && o.emit != "terms") throw UsageError("--emit must be trees or terms");
  const Pipeline pipeline = load_pipeline(o);
  const std::string body = read_input(o.input);
  const DocumentAnalysis analysis = pipeline.analyze("doc-1", o.input, body);
  if (o.emit == "trees") {
    for (const auto& s : analysis.sentences) out << render_sentence(s) << '\n';
  } else {
    out << export_terms(analysis.terms);
  }
  return kOk;
}

int cmd_kb(const std::string& action, const Options& o, std::ostream& out) {
  if (o.kb_path.empty()) throw UsageError("--kb is required");

  if (action == "init") {
    if (fs::exists(o.kb_path)) throw Error(ErrorKind::duplicate, "refusing to overwrite existing '" + o.kb_path + "'");
    save_kb(ProjectKB(o.project_id), o.kb_path);
    return kOk;
  }

  ProjectKB kb = open_kb(o.kb_path);

  if (action == "terms") {
    std::optional<TermStatus> status;
    if (!o.status.empty()) {
      status = parse_term_status(o.status);
      if (!status) throw UsageError("unknown term status '" + o.status + "'");
    }
    for (const auto& t : kb.terms())
      if (!status || t.status == *status) print_term(out, t);
    return kOk;
  }
  if (action == "conflicts") {
    for (const auto& c : kb.detect_conflicts()) {
      std::vector<std::string> claims;
      for (const auto& cl : c.claims)
        claims.push_back(std::string(to_string(cl.obj_type)) + "@" + cl.doc_id + ":" + std::to_string(cl.sentence_index));
      out << c.value << '\t' << join(claims, ",") << '\n';
    }
    return kOk;
  }
  if (action == "export") {
    out << kb.export_sexpr();
    return kOk;
  }

  if (action == "add-doc") {
    const Pipeline pipeline = load_pipeline(o);
    const std::string body = read_input(o.input);
    const std::string doc_id = o.doc_id.empty() ? kb.next_document_id() : o.doc_id;
    const DocumentAnalysis analysis = pipeline.analyze(doc_id, o.title, body);
    kb.register_document(analysis.record(), analysis.terms);
    save_kb(kb, o.kb_path);
    out << doc_id << '\n';
    return kOk;
  }
  if (action == "filter") {
    kb.filter_term(o.term);
  } else if (action == "unfilter") {
    kb.unfilter_term(o.term);
  } else if (action == "classify") {
    kb.classify_term(o.term, type_arg(o.type), o.edited);
  } else if (action == "declassify") {
    kb.declassify_term(o.term);
  } else if (action == "resolve") {
    kb.resolve_conflict(o.term, type_arg(o.type));
    save_kb(kb, o.kb_path);
    return kOk;
  } else {
    throw UsageError("unknown kb command '" + action + "'");
  }
  save_kb(kb, o.kb_path);
  print_term(out, *kb.find_term(o.term));
  return kOk;
}

int cmd_serve(const Options& o, std::ostream& out) {
  const Pipeline pipeline = load_pipeline(o);
  ServiceOptions options;
  options.projects_dir = o.projects_dir;
  options.max_sentences = o.max_sentences;
  if (o.ui_dir) options.ui_dir = *o.ui_dir;
  std::optional<Service> service;
  try {
    service.emplace(pipeline, options);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  int port = service->bind(o.host, o.port);
  if (port < 0) throw UsageError("cannot bind " + o.host + ":" + std::to_string(o.port));
  out << "listening on http://" << o.host << ':' << port << std::endl;
  service->listen();
  return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Requirements analysis: parse specifications, extract terms, curate a knowledge base"};
  app.set_version_flag("--version", "reqlens 1.0.0");
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--grammar", o.grammar, "Grammar file");
  app.add_option("--lexicon", o.lexicon, "Lexicon file");
  app.add_option("--compounds", o.compounds, "Compound list file");
  app.add_option("--tree-limit", o.tree_limit, "Maximum parse trees enumerated per sentence");

  auto* parse = app.add_subcommand("parse", "Parse a text file and print trees or terms");
  parse->add_option("input", o.input, "Input text file ('-' for stdin)")->required();
  parse->add_option("--emit", o.emit, "trees or terms")->check(CLI::IsMember({"trees", "terms"}));

  auto* kb = app.add_subcommand("kb", "Knowledge base operations");
  kb->fallthrough();
  kb->require_subcommand(1);
  kb->add_option("--kb", o.kb_path, "Knowledge base file");

  std::string action;
  auto add = [&](const std::string& name, const std::string& help) {
    auto* sub = kb->add_subcommand(name, help);
    sub->fallthrough();
    sub->callback([&action, name] { action = name; });
    return sub;
  };
  add("init", "Create an empty knowledge base")->add_option("--project", o.project_id, "Project id");
  auto* add_doc = add("add-doc", "Parse a document and register its terms");
  add_doc->add_option("input", o.input, "Input text file ('-' for stdin)")->required();
  add_doc->add_option("--doc-id", o.doc_id, "Document id (default doc-N)");
  add_doc->add_option("--title", o.title, "Document title");
  add("terms", "List terms")->add_option("--status", o.status, "CANDIDATE, FILTERED or CLASSIFIED");
  for (const char* name : {"filter", "unfilter", "declassify"})
    add(name, std::string(name) + " a term")->add_option("term", o.term, "Term value")->required();
  auto* classify = add("classify", "Classify a term as FUNCTION, ENTITY or ATTRIBUTE");
  classify->add_option("term", o.term, "Term value")->required();
  classify->add_option("type", o.type, "Object type")->required();
  classify->add_option("--value", o.edited, "Edited object value");
  add("conflicts", "List open conflicts");
  auto* resolve = add("resolve", "Resolve a conflict in favour of one type");
  resolve->add_option("value", o.term, "Conflicting value")->required();
  resolve->add_option("type", o.type, "Winning object type")->required();
  add("export", "Print the s-expression export");

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--port", o.port, "Port (0 picks a free one)");
  serve->add_option("--host", o.host, "Bind address");
  serve->add_option("--projects", o.projects_dir, "Directory holding project files");
  serve->add_option("--ui", o.ui_dir, "Static files served under /ui");
  serve->add_option("--max-sentences", o.max_sentences, "Per-document sentence cap");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (parse->parsed()) return cmd_parse(o, out);
    if (kb->parsed()) return cmd_kb(action, o, out);
    if (serve->parsed()) return cmd_serve(o, out);
  } catch (const UsageError& e) {
    err << "reqlens: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "reqlens: " << e.what() << '\n';
    return kFailed;
  } catch (const std::exception& e) {
    err << "reqlens: " << e.what() << '\n';
    return kFailed;
  }
  return kUsage;
}

}  // namespace reqlens
