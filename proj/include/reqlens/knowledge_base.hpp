#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "reqlens/term_extraction.hpp"

namespace reqlens {

// Listing order of the s-expression export.
enum class ObjectType { function, entity, attribute };

std::string_view to_string(ObjectType type);
std::optional<ObjectType> parse_object_type(std::string_view text);

struct Occurrence {
  std::string doc_id;
  std::size_t sentence_index = 0;

  friend bool operator==(const Occurrence&, const Occurrence&) = default;
  friend auto operator<=>(const Occurrence&, const Occurrence&) = default;
};

// One occurrence claimed by a classified object, with the term that brought it.
struct ObjectSource {
  std::string doc_id;
  std::size_t sentence_index = 0;
  std::string term;  // case-folded term value

  friend bool operator==(const ObjectSource&, const ObjectSource&) = default;
};

struct KBObject {
  ObjectType obj_type = ObjectType::entity;
  std::string value;
  std::vector<ObjectSource> provenance;
  std::string created_from;  // extracted noun the object was first made from
  bool conflicted = false;

  friend bool operator==(const KBObject&, const KBObject&) = default;
};

enum class ConflictState { open, resolved };

struct Claim {
  ObjectType obj_type = ObjectType::entity;
  std::string doc_id;
  std::size_t sentence_index = 0;

  friend bool operator==(const Claim&, const Claim&) = default;
};

struct Conflict {
  std::string value;
  std::vector<Claim> claims;
  ConflictState state = ConflictState::open;
  std::optional<ObjectType> resolution;

  friend bool operator==(const Conflict&, const Conflict&) = default;
};

struct TermRecord {
  std::string value;  // surface of the first occurrence
  TermStatus status = TermStatus::candidate;
  std::vector<Occurrence> provenance;
  std::vector<std::string> contexts;  // NP surfaces the noun appeared in

  friend bool operator==(const TermRecord&, const TermRecord&) = default;
};

struct SentenceRecord {
  std::size_t index = 0;
  std::string text;
  std::optional<std::string> tree;  // bracketed first parse; empty if unparsed
  std::size_t parse_count = 0;      // capped by the configured tree limit

  friend bool operator==(const SentenceRecord&, const SentenceRecord&) = default;
};

struct DocumentRecord {
  std::string doc_id;
  std::string title;
  std::vector<SentenceRecord> sentences;

  friend bool operator==(const DocumentRecord&, const DocumentRecord&) = default;
};

inline constexpr int kSchemaVersion = 1;

// Term curation state of one project.
//
// Terms move CANDIDATE <-> FILTERED and CANDIDATE <-> CLASSIFIED. Objects are
// keyed by (case-folded value, type); a value held by objects of two or more
// types is an OPEN conflict, all of its objects are flagged, and export is
// refused until the analyst resolves it. Filter decisions are project-wide:
// a filtered noun stays filtered when later documents mention it.
//
// A CLASSIFIED term mentioned by a later document keeps its class; the new
// occurrences stay unclaimed until the analyst classifies them too, which
// may disagree with the earlier class and so raise a conflict.
class ProjectKB {
 public:
  explicit ProjectKB(std::string project_id = "project");

  const std::string& project_id() const { return project_id_; }
  const std::vector<DocumentRecord>& documents() const { return documents_; }
  const std::vector<TermRecord>& terms() const { return terms_; }
  const std::vector<KBObject>& objects() const { return objects_; }
  const std::vector<Conflict>& conflicts() const { return conflicts_; }

  std::vector<TermRecord> terms_with_status(TermStatus status) const;
  const TermRecord* find_term(std::string_view value) const;
  const DocumentRecord* find_document(std::string_view doc_id) const;
  // Occurrences of a term not yet claimed by any object.
  std::vector<Occurrence> unclaimed_occurrences(std::string_view value) const;
  std::string next_document_id() const;

  void register_document(DocumentRecord document, std::span<const ExtractedTerm> terms);

  void filter_term(std::string_view value);
  void unfilter_term(std::string_view value);

  void classify_term(std::string_view value, ObjectType type,
                     std::optional<std::string> edited_value = std::nullopt);
  void declassify_term(std::string_view value);

  // OPEN conflicts ordered by value.
  std::vector<Conflict> detect_conflicts() const;
  void resolve_conflict(std::string_view value, ObjectType winner);

  // `(OBJECT (:TYPE T) (:VALUE "v"))` per object, sorted by (type, value).
  std::string export_sexpr() const;

  friend bool operator==(const ProjectKB&, const ProjectKB&) = default;

  friend std::string serialize_kb(const ProjectKB& kb);
  friend ProjectKB deserialize_kb(std::string_view text, std::string_view source);

 private:
  TermRecord& term_or_throw(std::string_view value);
  void refresh_conflicts();
  void sort_objects();

  std::string project_id_;
  std::vector<DocumentRecord> documents_;
  std::vector<TermRecord> terms_;
  std::vector<KBObject> objects_;
  std::vector<Conflict> conflicts_;
};

std::string format_sexpr(ObjectType type, std::string_view value);

// Parses export_sexpr output back into (type, value) pairs.
std::vector<std::pair<ObjectType, std::string>> parse_sexpr_export(std::string_view text);

// Structured JSON text with fields {schema_version, project_id, documents,
// terms, objects, conflicts}. Validation errors name the offending field path.
std::string serialize_kb(const ProjectKB& kb);
ProjectKB deserialize_kb(std::string_view text, std::string_view source = "<memory>");

// Atomic replace (temp file + rename).
void save_kb(const ProjectKB& kb, const std::filesystem::path& path);
ProjectKB load_kb(const std::filesystem::path& path);

}  // namespace reqlens
