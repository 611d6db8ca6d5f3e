#include "reqlens/knowledge_base.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

#include "reqlens/error.hpp"
#include "reqlens/text_util.hpp"

namespace reqlens {

using nlohmann::json;

std::string_view to_string(ObjectType type) {
  switch (type) {
    case ObjectType::function: return "FUNCTION";
    case ObjectType::entity: return "ENTITY";
    case ObjectType::attribute: return "ATTRIBUTE";
  }
  return "ENTITY";
}

std::optional<ObjectType> parse_object_type(std::string_view text) {
  const auto folded = fold_case(text);
  if (folded == "function") return ObjectType::function;
  if (folded == "entity") return ObjectType::entity;
  if (folded == "attribute") return ObjectType::attribute;
  return std::nullopt;
}

namespace {

std::string_view to_string(ConflictState s) { return s == ConflictState::open ? "OPEN" : "RESOLVED"; }

std::string quote(std::string_view v) {
  std::string out = "\"";
  for (const char c : v) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

ProjectKB::ProjectKB(std::string project_id) : project_id_(std::move(project_id)) {}

std::vector<TermRecord> ProjectKB::terms_with_status(TermStatus status) const {
  std::vector<TermRecord> out;
  std::copy_if(terms_.begin(), terms_.end(), std::back_inserter(out),
               [&](const TermRecord& t) { return t.status == status; });
  return out;
}

const TermRecord* ProjectKB::find_term(std::string_view value) const {
  const auto key = fold_case(trim(value));
  const auto it = std::find_if(terms_.begin(), terms_.end(),
                               [&](const TermRecord& t) { return fold_case(t.value) == key; });
  return it == terms_.end() ? nullptr : &*it;
}

const DocumentRecord* ProjectKB::find_document(std::string_view doc_id) const {
  const auto it = std::find_if(documents_.begin(), documents_.end(),
                               [&](const DocumentRecord& d) { return d.doc_id == doc_id; });
  return it == documents_.end() ? nullptr : &*it;
}

TermRecord& ProjectKB::term_or_throw(std::string_view value) {
  const auto* t = find_term(value);
  if (!t) throw Error(ErrorKind::not_found, "unknown term '" + std::string(value) + "'");
  return const_cast<TermRecord&>(*t);
}

std::vector<Occurrence> ProjectKB::unclaimed_occurrences(std::string_view value) const {
  const auto* term = find_term(value);
  if (!term) return {};
  const auto key = fold_case(term->value);
  std::vector<Occurrence> out;
  for (const auto& occ : term->provenance) {
    bool claimed = false;
    for (const auto& obj : objects_)
      for (const auto& src : obj.provenance)
        claimed = claimed || (src.term == key && src.doc_id == occ.doc_id && src.sentence_index == occ.sentence_index);
    if (!claimed) out.push_back(occ);
  }
  return out;
}

std::string ProjectKB::next_document_id() const {
  for (std::size_t n = documents_.size() + 1;; ++n) {
    auto id = "doc-" + std::to_string(n);
    if (!find_document(id)) return id;
  }
}

void ProjectKB::register_document(DocumentRecord document, std::span<const ExtractedTerm> terms) {
  if (trim(document.doc_id).empty()) throw Error(ErrorKind::invalid_input, "document id must not be empty");
  if (find_document(document.doc_id))
    throw Error(ErrorKind::duplicate, "document '" + document.doc_id + "' is already registered");

  for (const auto& extracted : terms) {
    const auto sentences =
        extracted.provenance.empty() ? std::vector<std::size_t>{extracted.sentence_index} : extracted.provenance;
    for (const auto& noun : extracted.nouns) {
      if (trim(noun).empty()) continue;
      auto* existing = const_cast<TermRecord*>(find_term(noun));
      if (!existing) {
        terms_.push_back(TermRecord{std::string(trim(noun)), TermStatus::candidate, {}, {}});
        existing = &terms_.back();
      }
      for (const auto s : sentences) {
        Occurrence occ{document.doc_id, s};
        if (std::find(existing->provenance.begin(), existing->provenance.end(), occ) == existing->provenance.end())
          existing->provenance.push_back(std::move(occ));
      }
      if (fold_case(extracted.surface) != fold_case(noun) &&
          std::find(existing->contexts.begin(), existing->contexts.end(), extracted.surface) ==
              existing->contexts.end())
        existing->contexts.push_back(extracted.surface);
    }
  }
  documents_.push_back(std::move(document));
  refresh_conflicts();
}

void ProjectKB::filter_term(std::string_view value) {
  auto& term = term_or_throw(value);
  if (term.status != TermStatus::candidate)
    throw Error(ErrorKind::invalid_state,
                "cannot filter '" + term.value + "': status is " + std::string(to_string(term.status)));
  term.status = TermStatus::filtered;
}

void ProjectKB::unfilter_term(std::string_view value) {
  auto& term = term_or_throw(value);
  if (term.status != TermStatus::filtered)
    throw Error(ErrorKind::invalid_state,
                "cannot unfilter '" + term.value + "': status is " + std::string(to_string(term.status)));
  term.status = TermStatus::candidate;
}

void ProjectKB::classify_term(std::string_view value, ObjectType type, std::optional<std::string> edited_value) {
  auto& term = term_or_throw(value);
  if (edited_value && trim(*edited_value).empty())
    throw Error(ErrorKind::invalid_input, "edited value for '" + term.value + "' must not be empty");
  if (term.status == TermStatus::filtered)
    throw Error(ErrorKind::invalid_state, "cannot classify '" + term.value + "': term is FILTERED");

  const auto key = fold_case(term.value);
  const auto pending = unclaimed_occurrences(term.value);
  std::string object_value = edited_value ? std::string(trim(*edited_value)) : term.value;

  if (term.status == TermStatus::classified) {
    if (pending.empty())
      throw Error(ErrorKind::invalid_state, "term '" + term.value + "' is already classified");
    // New occurrences attach to the value the term already maps to.
    const auto it = std::find_if(objects_.begin(), objects_.end(), [&](const KBObject& o) {
      return std::any_of(o.provenance.begin(), o.provenance.end(), [&](const ObjectSource& s) { return s.term == key; });
    });
    if (it != objects_.end()) {
      if (edited_value && fold_case(object_value) != fold_case(it->value))
        throw Error(ErrorKind::invalid_state, "term '" + term.value + "' is classified as '" + it->value +
                                                  "'; declassify it before changing the value");
      object_value = it->value;
    }
  }

  const auto folded = fold_case(object_value);
  auto obj = std::find_if(objects_.begin(), objects_.end(),
                          [&](const KBObject& o) { return o.obj_type == type && fold_case(o.value) == folded; });
  if (obj == objects_.end()) {
    objects_.push_back(KBObject{type, object_value, {}, term.value, false});
    obj = objects_.end() - 1;
  }
  for (const auto& occ : pending) obj->provenance.push_back(ObjectSource{occ.doc_id, occ.sentence_index, key});
  term.status = TermStatus::classified;
  sort_objects();
  refresh_conflicts();
}

void ProjectKB::declassify_term(std::string_view value) {
  auto& term = term_or_throw(value);
  if (term.status != TermStatus::classified)
    throw Error(ErrorKind::invalid_state,
                "cannot declassify '" + term.value + "': status is " + std::string(to_string(term.status)));
  const auto key = fold_case(term.value);
  for (auto& obj : objects_)
    std::erase_if(obj.provenance, [&](const ObjectSource& s) { return s.term == key; });
  std::erase_if(objects_, [](const KBObject& o) { return o.provenance.empty(); });
  term.status = TermStatus::candidate;
  refresh_conflicts();
}

std::vector<Conflict> ProjectKB::detect_conflicts() const {
  std::vector<Conflict> out;
  std::copy_if(conflicts_.begin(), conflicts_.end(), std::back_inserter(out),
               [](const Conflict& c) { return c.state == ConflictState::open; });
  return out;
}

void ProjectKB::resolve_conflict(std::string_view value, ObjectType winner) {
  const auto folded = fold_case(trim(value));
  const auto conflict = std::find_if(conflicts_.begin(), conflicts_.end(), [&](const Conflict& c) {
    return c.state == ConflictState::open && fold_case(c.value) == folded;
  });
  if (conflict == conflicts_.end())
    throw Error(ErrorKind::not_found, "no open conflict on '" + std::string(value) + "'");
  const auto win = std::find_if(objects_.begin(), objects_.end(), [&](const KBObject& o) {
    return o.obj_type == winner && fold_case(o.value) == folded;
  });
  if (win == objects_.end())
    throw Error(ErrorKind::invalid_input, "'" + std::string(value) + "' has no " + std::string(to_string(winner)) +
                                              " claim to resolve to");

  // Losing claims fold into the winning object.
  std::vector<ObjectSource> moved;
  for (const auto& o : objects_)
    if (fold_case(o.value) == folded && o.obj_type != winner)
      moved.insert(moved.end(), o.provenance.begin(), o.provenance.end());
  win->provenance.insert(win->provenance.end(), moved.begin(), moved.end());
  std::erase_if(objects_,
                [&](const KBObject& o) { return fold_case(o.value) == folded && o.obj_type != winner; });

  conflict->state = ConflictState::resolved;
  conflict->resolution = winner;
  refresh_conflicts();
}

void ProjectKB::sort_objects() {
  std::stable_sort(objects_.begin(), objects_.end(), [](const KBObject& a, const KBObject& b) {
    const auto fa = fold_case(a.value);
    const auto fb = fold_case(b.value);
    if (fa != fb) return fa < fb;
    return a.obj_type < b.obj_type;
  });
}

void ProjectKB::refresh_conflicts() {
  std::map<std::string, std::set<ObjectType>> types;
  for (const auto& o : objects_) types[fold_case(o.value)].insert(o.obj_type);
  for (auto& o : objects_) o.conflicted = types[fold_case(o.value)].size() >= 2;

  // OPEN conflicts are derived from the objects; RESOLVED ones are history.
  std::erase_if(conflicts_, [](const Conflict& c) { return c.state == ConflictState::open; });
  for (const auto& [folded, ts] : types) {
    if (ts.size() < 2) continue;
    Conflict c;
    for (const auto& o : objects_) {
      if (fold_case(o.value) != folded) continue;
      if (c.value.empty()) c.value = o.value;
      for (const auto& s : o.provenance) {
        Claim claim{o.obj_type, s.doc_id, s.sentence_index};
        if (std::find(c.claims.begin(), c.claims.end(), claim) == c.claims.end()) c.claims.push_back(claim);
      }
    }
    std::sort(c.claims.begin(), c.claims.end(), [](const Claim& a, const Claim& b) {
      return std::tie(a.obj_type, a.doc_id, a.sentence_index) < std::tie(b.obj_type, b.doc_id, b.sentence_index);
    });
    conflicts_.push_back(std::move(c));
  }
  std::stable_sort(conflicts_.begin(), conflicts_.end(), [](const Conflict& a, const Conflict& b) {
    const auto fa = fold_case(a.value);
    const auto fb = fold_case(b.value);
    if (fa != fb) return fa < fb;
    return a.state == ConflictState::resolved && b.state == ConflictState::open;
  });
}

std::string format_sexpr(ObjectType type, std::string_view value) {
  return "(OBJECT (:TYPE " + std::string(to_string(type)) + ") (:VALUE " + quote(value) + "))";
}

std::string ProjectKB::export_sexpr() const {
  const auto open = detect_conflicts();
  if (!open.empty()) {
    std::string names;
    for (const auto& c : open) names += (names.empty() ? "" : ", ") + c.value;
    throw Error(ErrorKind::open_conflicts, "unresolved class conflicts: " + names);
  }
  std::vector<const KBObject*> sorted;
  for (const auto& o : objects_) sorted.push_back(&o);
  std::sort(sorted.begin(), sorted.end(), [](const KBObject* a, const KBObject* b) {
    if (a->obj_type != b->obj_type) return a->obj_type < b->obj_type;
    return a->value < b->value;
  });
  std::string out;
  for (const auto* o : sorted) out += format_sexpr(o->obj_type, o->value) + "\n";
  return out;
}

std::vector<std::pair<ObjectType, std::string>> parse_sexpr_export(std::string_view text) {
  std::vector<std::pair<ObjectType, std::string>> out;
  constexpr std::string_view head = "(OBJECT (:TYPE ";
  constexpr std::string_view mid = ") (:VALUE \"";
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    if (line.empty()) continue;
    auto bad = [&] { return Error(ErrorKind::invalid_input, "malformed object line: " + std::string(line)); };
    if (line.substr(0, head.size()) != head) throw bad();
    const auto m = line.find(mid, head.size());
    if (m == std::string_view::npos) throw bad();
    const auto type = parse_object_type(line.substr(head.size(), m - head.size()));
    if (!type) throw bad();
    std::string value;
    std::size_t i = m + mid.size();
    for (; i < line.size() && line[i] != '"'; ++i) {
      if (line[i] == '\\' && i + 1 < line.size()) ++i;
      value += line[i];
    }
    if (line.substr(i) != "\"))") throw bad();
    out.emplace_back(*type, std::move(value));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistence

std::string serialize_kb(const ProjectKB& kb) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["project_id"] = kb.project_id_;

  j["documents"] = json::array();
  for (const auto& d : kb.documents_) {
    json sentences = json::array();
    for (const auto& s : d.sentences)
      sentences.push_back({{"index", s.index},
                           {"text", s.text},
                           {"tree", s.tree ? json(*s.tree) : json(nullptr)},
                           {"parse_count", s.parse_count}});
    j["documents"].push_back({{"doc_id", d.doc_id}, {"title", d.title}, {"sentences", std::move(sentences)}});
  }

  j["terms"] = json::array();
  for (const auto& t : kb.terms_) {
    json prov = json::array();
    for (const auto& o : t.provenance) prov.push_back({{"doc_id", o.doc_id}, {"sentence_index", o.sentence_index}});
    j["terms"].push_back({{"value", t.value},
                          {"status", std::string(to_string(t.status))},
                          {"provenance", std::move(prov)},
                          {"contexts", t.contexts}});
  }

  j["objects"] = json::array();
  for (const auto& o : kb.objects_) {
    json prov = json::array();
    for (const auto& s : o.provenance)
      prov.push_back({{"doc_id", s.doc_id}, {"sentence_index", s.sentence_index}, {"term", s.term}});
    j["objects"].push_back({{"obj_type", std::string(to_string(o.obj_type))},
                            {"value", o.value},
                            {"created_from", o.created_from},
                            {"conflicted", o.conflicted},
                            {"provenance", std::move(prov)}});
  }

  j["conflicts"] = json::array();
  for (const auto& c : kb.conflicts_) {
    json claims = json::array();
    for (const auto& cl : c.claims)
      claims.push_back({{"obj_type", std::string(to_string(cl.obj_type))},
                        {"doc_id", cl.doc_id},
                        {"sentence_index", cl.sentence_index}});
    j["conflicts"].push_back({{"value", c.value},
                              {"state", std::string(to_string(c.state))},
                              {"resolution", c.resolution ? json(std::string(to_string(*c.resolution))) : json(nullptr)},
                              {"claims", std::move(claims)}});
  }
  return j.dump(2) + "\n";
}

namespace {

class SchemaReader {
 public:
  explicit SchemaReader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    throw Error(ErrorKind::schema, source_ + ": " + path + ": " + what);
  }

  const json& field(const json& obj, const std::string& path, const char* name) const {
    if (!obj.is_object()) fail(path, "expected an object");
    const auto it = obj.find(name);
    if (it == obj.end()) fail(path + "." + name, "missing field");
    return *it;
  }

  std::string str(const json& obj, const std::string& path, const char* name) const {
    const auto& v = field(obj, path, name);
    if (!v.is_string()) fail(path + "." + name, "expected a string");
    return v.get<std::string>();
  }

  std::optional<std::string> opt_str(const json& obj, const std::string& path, const char* name) const {
    const auto& v = field(obj, path, name);
    if (v.is_null()) return std::nullopt;
    if (!v.is_string()) fail(path + "." + name, "expected a string or null");
    return v.get<std::string>();
  }

  std::size_t index(const json& obj, const std::string& path, const char* name) const {
    const auto& v = field(obj, path, name);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      fail(path + "." + name, "expected a non-negative integer");
    return v.get<std::size_t>();
  }

  bool boolean(const json& obj, const std::string& path, const char* name) const {
    const auto& v = field(obj, path, name);
    if (!v.is_boolean()) fail(path + "." + name, "expected a boolean");
    return v.get<bool>();
  }

  const json& array(const json& obj, const std::string& path, const char* name) const {
    const auto& v = field(obj, path, name);
    if (!v.is_array()) fail(path + "." + name, "expected an array");
    return v;
  }

  ObjectType obj_type(const json& obj, const std::string& path, const char* name) const {
    const auto s = str(obj, path, name);
    if (s != "FUNCTION" && s != "ENTITY" && s != "ATTRIBUTE")
      fail(path + "." + name, "unknown object type '" + s + "'");
    return *parse_object_type(s);
  }

 private:
  std::string source_;
};

std::string at(const std::string& path, const char* name, std::size_t i) {
  return path + "." + name + "[" + std::to_string(i) + "]";
}

}  // namespace

ProjectKB deserialize_kb(std::string_view text, std::string_view source) {
  const SchemaReader r{std::string(source)};
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    r.fail("$", std::string("not valid JSON: ") + e.what());
  }
  const std::string root = "$";
  const auto& version = r.field(j, root, "schema_version");
  if (!version.is_number_integer() || version.get<int>() != kSchemaVersion)
    r.fail("$.schema_version", "unsupported schema version");

  ProjectKB kb(r.str(j, root, "project_id"));
  std::set<std::string> doc_ids;

  const auto& docs = r.array(j, root, "documents");
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto path = at(root, "documents", i);
    DocumentRecord d{r.str(docs[i], path, "doc_id"), r.str(docs[i], path, "title"), {}};
    if (!doc_ids.insert(d.doc_id).second) r.fail(path + ".doc_id", "duplicate document id '" + d.doc_id + "'");
    const auto& sentences = r.array(docs[i], path, "sentences");
    for (std::size_t s = 0; s < sentences.size(); ++s) {
      const auto sp = at(path, "sentences", s);
      d.sentences.push_back(SentenceRecord{r.index(sentences[s], sp, "index"), r.str(sentences[s], sp, "text"),
                                           r.opt_str(sentences[s], sp, "tree"),
                                           r.index(sentences[s], sp, "parse_count")});
    }
    kb.documents_.push_back(std::move(d));
  }

  auto check_doc = [&](const std::string& path, const std::string& id) {
    if (!doc_ids.count(id)) r.fail(path + ".doc_id", "references unregistered document '" + id + "'");
  };

  std::set<std::string> term_keys;
  const auto& terms = r.array(j, root, "terms");
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto path = at(root, "terms", i);
    TermRecord t;
    t.value = r.str(terms[i], path, "value");
    if (trim(t.value).empty()) r.fail(path + ".value", "empty term value");
    if (!term_keys.insert(fold_case(t.value)).second) r.fail(path + ".value", "duplicate term '" + t.value + "'");
    const auto status = parse_term_status(r.str(terms[i], path, "status"));
    if (!status) r.fail(path + ".status", "unknown status");
    t.status = *status;
    const auto& prov = r.array(terms[i], path, "provenance");
    for (std::size_t p = 0; p < prov.size(); ++p) {
      const auto pp = at(path, "provenance", p);
      Occurrence o{r.str(prov[p], pp, "doc_id"), r.index(prov[p], pp, "sentence_index")};
      check_doc(pp, o.doc_id);
      t.provenance.push_back(std::move(o));
    }
    const auto& ctx = r.array(terms[i], path, "contexts");
    for (std::size_t c = 0; c < ctx.size(); ++c) {
      if (!ctx[c].is_string()) r.fail(at(path, "contexts", c), "expected a string");
      t.contexts.push_back(ctx[c].get<std::string>());
    }
    kb.terms_.push_back(std::move(t));
  }

  const auto& objects = r.array(j, root, "objects");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto path = at(root, "objects", i);
    KBObject o;
    o.obj_type = r.obj_type(objects[i], path, "obj_type");
    o.value = r.str(objects[i], path, "value");
    if (trim(o.value).empty()) r.fail(path + ".value", "empty object value");
    o.created_from = r.str(objects[i], path, "created_from");
    o.conflicted = r.boolean(objects[i], path, "conflicted");
    const auto& prov = r.array(objects[i], path, "provenance");
    for (std::size_t p = 0; p < prov.size(); ++p) {
      const auto pp = at(path, "provenance", p);
      ObjectSource s{r.str(prov[p], pp, "doc_id"), r.index(prov[p], pp, "sentence_index"), r.str(prov[p], pp, "term")};
      check_doc(pp, s.doc_id);
      if (!term_keys.count(s.term)) r.fail(pp + ".term", "references unknown term '" + s.term + "'");
      o.provenance.push_back(std::move(s));
    }
    kb.objects_.push_back(std::move(o));
  }

  const auto& conflicts = r.array(j, root, "conflicts");
  for (std::size_t i = 0; i < conflicts.size(); ++i) {
    const auto path = at(root, "conflicts", i);
    Conflict c;
    c.value = r.str(conflicts[i], path, "value");
    const auto state = r.str(conflicts[i], path, "state");
    if (state == "OPEN") c.state = ConflictState::open;
    else if (state == "RESOLVED") c.state = ConflictState::resolved;
    else r.fail(path + ".state", "unknown conflict state '" + state + "'");
    if (r.field(conflicts[i], path, "resolution").is_null()) {
      if (c.state == ConflictState::resolved) r.fail(path + ".resolution", "resolved conflict without resolution");
    } else {
      c.resolution = r.obj_type(conflicts[i], path, "resolution");
    }
    const auto& claims = r.array(conflicts[i], path, "claims");
    for (std::size_t k = 0; k < claims.size(); ++k) {
      const auto cp = at(path, "claims", k);
      Claim cl{r.obj_type(claims[k], cp, "obj_type"), r.str(claims[k], cp, "doc_id"),
               r.index(claims[k], cp, "sentence_index")};
      check_doc(cp, cl.doc_id);
      c.claims.push_back(std::move(cl));
    }
    kb.conflicts_.push_back(std::move(c));
  }
  return kb;
}

void save_kb(const ProjectKB& kb, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_kb(kb));
}

ProjectKB load_kb(const std::filesystem::path& path) {
  return deserialize_kb(read_file(path), path.string());
}

}  // namespace reqlens
