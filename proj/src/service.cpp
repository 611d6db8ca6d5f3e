#include "reqlens/service.hpp"

#include <algorithm>
#include <cctype>
#include <httplib.h>
#include <json.hpp>

#include "reqlens/error.hpp"
#include "reqlens/text_util.hpp"

namespace reqlens {
namespace {

using nlohmann::json;

constexpr const char* kJson = "application/json";
constexpr const char* kText = "text/plain; charset=utf-8";

int http_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::not_found:
      return 404;
    case ErrorKind::invalid_state:
    case ErrorKind::duplicate:
    case ErrorKind::open_conflicts:
      return 409;
    case ErrorKind::invalid_input:
    case ErrorKind::schema:
      return 400;
    case ErrorKind::io:
      break;
  }
  return 500;
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(2) + "\n", kJson);
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, json{{"error", message}});
}

json occurrences_json(const std::vector<Occurrence>& occs) {
  json out = json::array();
  for (const auto& o : occs) out.push_back({{"doc_id", o.doc_id}, {"sentence_index", o.sentence_index}});
  return out;
}

json term_json(const TermRecord& t) {
  return {{"value", t.value},
          {"status", to_string(t.status)},
          {"provenance", occurrences_json(t.provenance)},
          {"contexts", t.contexts}};
}

json conflict_json(const Conflict& c) {
  json claims = json::array();
  for (const auto& cl : c.claims)
    claims.push_back({{"type", to_string(cl.obj_type)}, {"doc_id", cl.doc_id}, {"sentence_index", cl.sentence_index}});
  json out = {{"value", c.value},
              {"state", c.state == ConflictState::open ? "OPEN" : "RESOLVED"},
              {"claims", claims}};
  if (c.resolution) out["resolution"] = to_string(*c.resolution);
  return out;
}

json sentence_json(const SentenceRecord& s) {
  return {{"index", s.index},
          {"text", s.text},
          {"tree", s.tree ? json(*s.tree) : json(nullptr)},
          {"parse_count", s.parse_count}};
}

json document_json(const DocumentRecord& d) {
  json sentences = json::array();
  for (const auto& s : d.sentences) sentences.push_back(sentence_json(s));
  return {{"doc_id", d.doc_id}, {"title", d.title}, {"sentences", sentences}};
}

json project_json(const ProjectKB& kb) {
  json docs = json::array();
  for (const auto& d : kb.documents())
    docs.push_back({{"doc_id", d.doc_id}, {"title", d.title}, {"sentence_count", d.sentences.size()}});
  json objects = json::array();
  for (const auto& o : kb.objects())
    objects.push_back({{"type", to_string(o.obj_type)}, {"value", o.value}, {"conflicted", o.conflicted}});
  return {{"project_id", kb.project_id()},
          {"documents", docs},
          {"term_count", kb.terms().size()},
          {"objects", objects},
          {"open_conflicts", kb.detect_conflicts().size()}};
}

// Parsed JSON object body, or nullopt after writing a 400.
std::optional<json> object_body(const httplib::Request& req, httplib::Response& res, bool allow_empty) {
  if (trim(req.body).empty()) {
    if (allow_empty) return json::object();
    send_error(res, 400, "request body must be a JSON object");
    return std::nullopt;
  }
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded() || !body.is_object()) {
    send_error(res, 400, "request body must be a JSON object");
    return std::nullopt;
  }
  return body;
}

std::optional<std::string> string_field(const json& body, const char* name, httplib::Response& res,
                                        bool required) {
  auto it = body.find(name);
  if (it == body.end() || it->is_null()) {
    if (required) send_error(res, 400, std::string("missing field '") + name + "'");
    return std::nullopt;
  }
  if (!it->is_string()) {
    send_error(res, 400, std::string("field '") + name + "' must be a string");
    return std::nullopt;
  }
  return it->get<std::string>();
}

std::optional<ObjectType> type_field(const json& body, httplib::Response& res) {
  auto text = string_field(body, "type", res, true);
  if (!text) return std::nullopt;
  auto type = parse_object_type(*text);
  if (!type) send_error(res, 400, "unknown object type '" + *text + "'");
  return type;
}

bool valid_project_id(const std::string& id) {
  if (id.empty() || id.size() > 64 || id.front() == '.') return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '-' || c == '_' || c == '.';
  });
}

}  // namespace

Service::Service(const Pipeline& pipeline, ServiceOptions options)
    : pipeline_(pipeline), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  if (!options_.projects_dir.empty()) {
    std::filesystem::create_directories(options_.projects_dir);
    load_existing();
  }
  routes();
}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

void Service::listen() { server_->listen_after_bind(); }

int Service::start(const std::string& host, int port) {
  int bound = bind(host, port);
  if (bound < 0) return bound;
  thread_ = std::thread([this] { listen(); });
  server_->wait_until_ready();
  return bound;
}

void Service::stop() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

void Service::load_existing() {
  for (const auto& entry : std::filesystem::directory_iterator(options_.projects_dir)) {
    const auto name = entry.path().filename().string();
    constexpr std::string_view suffix = ".kb.json";
    if (!entry.is_regular_file() || name.size() <= suffix.size() || !name.ends_with(suffix)) continue;
    auto project = std::make_shared<Project>();
    project->kb = load_kb(entry.path());
    projects_[project->kb.project_id()] = project;
  }
}

void Service::persist(const ProjectKB& kb) const {
  if (options_.projects_dir.empty()) return;
  save_kb(kb, options_.projects_dir / (kb.project_id() + ".kb.json"));
}

std::shared_ptr<Service::Project> Service::project(const std::string& id) {
  std::lock_guard lock(projects_mutex_);
  auto it = projects_.find(id);
  if (it == projects_.end()) throw Error(ErrorKind::not_found, "unknown project '" + id + "'");
  return it->second;
}

std::shared_ptr<Service::Project> Service::create_project(const std::string& requested) {
  std::lock_guard lock(projects_mutex_);
  std::string id = requested;
  if (id.empty()) {
    do {
      id = "project-" + std::to_string(++generated_ids_);
    } while (projects_.contains(id));
  } else if (!valid_project_id(id)) {
    throw Error(ErrorKind::invalid_input, "invalid project id '" + id + "'");
  } else if (projects_.contains(id)) {
    throw Error(ErrorKind::duplicate, "project '" + id + "' already exists");
  }
  auto project = std::make_shared<Project>();
  project->kb = ProjectKB(id);
  persist(project->kb);
  projects_[id] = project;
  return project;
}

void Service::routes() {
  auto& srv = *server_;

  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    try {
      std::rethrow_exception(ep);
    } catch (const Error& e) {
      send_error(res, http_status(e.kind()), e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    } catch (...) {
      send_error(res, 500, "internal error");
    }
  });

  if (options_.ui_dir) srv.set_mount_point("/ui", options_.ui_dir->string());

  srv.Post("/projects", [this](const httplib::Request& req, httplib::Response& res) {
    auto body = object_body(req, res, true);
    if (!body) return;
    std::string id;
    if (body->contains("project_id")) {
      auto given = string_field(*body, "project_id", res, false);
      if (!given && res.status == 400) return;
      if (given) id = *given;
    }
    auto p = create_project(id);
    std::shared_lock lock(p->mutex);
    send_json(res, 201, project_json(p->kb));
  });

  srv.Get(R"(/projects/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    auto p = project(req.matches[1]);
    std::shared_lock lock(p->mutex);
    send_json(res, 200, project_json(p->kb));
  });

  srv.Post(R"(/projects/([^/]+)/documents)", [this](const httplib::Request& req, httplib::Response& res) {
    auto p = project(req.matches[1]);
    auto body = object_body(req, res, false);
    if (!body) return;
    auto text = string_field(*body, "text", res, true);
    if (!text) return;
    auto title = string_field(*body, "title", res, false);
    if (!title && res.status == 400) return;
    auto doc_id = string_field(*body, "doc_id", res, false);
    if (!doc_id && res.status == 400) return;

    auto sentence_count = split_sentences(*text).size();
    if (sentence_count > options_.max_sentences) {
      send_error(res, 413,
                 "document has " + std::to_string(sentence_count) + " sentences; the limit is " +
                     std::to_string(options_.max_sentences));
      return;
    }

    std::unique_lock lock(p->mutex);
    std::string id = doc_id ? *doc_id : p->kb.next_document_id();
    if (id.empty()) throw Error(ErrorKind::invalid_input, "doc_id must not be empty");
    auto analysis = pipeline_.analyze(id, title.value_or(""), *text);
    ProjectKB next = p->kb;
    next.register_document(analysis.record(), analysis.terms);
    persist(next);
    p->kb = std::move(next);

    json out = document_json(*p->kb.find_document(id));
    json terms = json::array();
    for (const auto& t : analysis.terms) {
      const TermRecord* rec = p->kb.find_term(term_key(t));
      if (rec) terms.push_back(term_json(*rec));
    }
    out["terms"] = terms;
    send_json(res, 201, out);
  });

  srv.Get(R"(/projects/([^/]+)/terms)", [this](const httplib::Request& req, httplib::Response& res) {
    auto p = project(req.matches[1]);
    std::optional<TermStatus> status;
    if (req.has_param("status")) {
      auto text = req.get_param_value("status");
      status = parse_term_status(text);
      if (!status) {
        send_error(res, 400, "unknown term status '" + text + "'");
        return;
      }
    }
    std::shared_lock lock(p->mutex);
    json out = json::array();
    for (const auto& t : p->kb.terms())
      if (!status || t.status == *status) out.push_back(term_json(t));
    send_json(res, 200, json{{"terms", out}});
  });

  srv.Get(R"(/projects/([^/]+)/sentences/(\d+)/tree)", [this](const httplib::Request& req,
                                                                httplib::Response& res) {
    auto p = project(req.matches[1]);
    std::size_t n = std::stoull(req.matches[2]);
    std::shared_lock lock(p->mutex);
    const SentenceRecord* found = nullptr;
    if (req.has_param("doc")) {
      auto doc_id = req.get_param_value("doc");
      const DocumentRecord* doc = p->kb.find_document(doc_id);
      if (!doc) throw Error(ErrorKind::not_found, "unknown document '" + doc_id + "'");
      if (n < doc->sentences.size()) found = &doc->sentences[n];
    } else {
      std::size_t k = n;
      for (const auto& d : p->kb.documents()) {
        if (k < d.sentences.size()) {
          found = &d.sentences[k];
          break;
        }
        k -= d.sentences.size();
      }
    }
    if (!found) throw Error(ErrorKind::not_found, "sentence " + std::to_string(n) + " not found");
    res.status = 200;
    res.set_content((found->tree ? *found->tree : "UNPARSED: " + strip_terminal_punctuation(found->text)) + "\n",
                    kText);
  });

  srv.Post(R"(/projects/([^/]+)/terms/(.+)/(filter|unfilter|classify|declassify))",
           [this](const httplib::Request& req, httplib::Response& res) {
             auto p = project(req.matches[1]);
             const std::string value = req.matches[2];
             const std::string action = req.matches[3];
             std::optional<ObjectType> type;
             std::optional<std::string> edited;
             if (action == "classify") {
               auto body = object_body(req, res, false);
               if (!body) return;
               type = type_field(*body, res);
               if (!type) return;
               edited = string_field(*body, "edited_value", res, false);
               if (!edited && res.status == 400) return;
             }
             std::unique_lock lock(p->mutex);
             ProjectKB next = p->kb;
             if (action == "filter") next.filter_term(value);
             else if (action == "unfilter") next.unfilter_term(value);
             else if (action == "classify") next.classify_term(value, *type, edited);
             else next.declassify_term(value);
             persist(next);
             p->kb = std::move(next);
             send_json(res, 200, term_json(*p->kb.find_term(value)));
           });

  srv.Get(R"(/projects/([^/]+)/conflicts)", [this](const httplib::Request& req, httplib::Response& res) {
    auto p = project(req.matches[1]);
    std::shared_lock lock(p->mutex);
    json out = json::array();
    for (const auto& c : p->kb.detect_conflicts()) out.push_back(conflict_json(c));
    send_json(res, 200, json{{"conflicts", out}});
  });

  srv.Post(R"(/projects/([^/]+)/conflicts/(.+)/resolve)", [this](const httplib::Request& req,
                                                                  httplib::Response& res) {
    auto p = project(req.matches[1]);
    const std::string value = req.matches[2];
    auto body = object_body(req, res, false);
    if (!body) return;
    auto type = type_field(*body, res);
    if (!type) return;
    std::unique_lock lock(p->mutex);
    ProjectKB next = p->kb;
    next.resolve_conflict(value, *type);
    persist(next);
    p->kb = std::move(next);
    json out = json::array();
    for (const auto& c : p->kb.detect_conflicts()) out.push_back(conflict_json(c));
    send_json(res, 200, json{{"conflicts", out}});
  });

  srv.Get(R"(/projects/([^/]+)/export\.sexpr)", [this](const httplib::Request& req, httplib::Response& res) {
    auto p = project(req.matches[1]);
    std::shared_lock lock(p->mutex);
    res.status = 200;
    res.set_content(p->kb.export_sexpr(), kText);
  });
}

}  // namespace reqlens
