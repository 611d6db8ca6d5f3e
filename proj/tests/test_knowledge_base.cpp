#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <json.hpp>

#include "reqlens/error.hpp"
#include "reqlens/knowledge_base.hpp"
#include "reqlens/text_util.hpp"
#include "support/fixtures.hpp"
#include "support/kb_invariants.hpp"
#include "support/kb_random.hpp"

using namespace reqlens;
using namespace testing_support;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::io;
}

std::string error_text(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

// Golden sentence, then the age/patient sentence.
ProjectKB example_kb() {
  ProjectKB kb("demo");
  add_document(kb, kGoldenSentence);
  add_document(kb, "The clinic stores the age of each patient.");
  return kb;
}

const std::string kPaperListing =
    "(OBJECT (:TYPE FUNCTION) (:VALUE \"entry\"))\n"
    "(OBJECT (:TYPE ENTITY) (:VALUE \"patient\"))\n"
    "(OBJECT (:TYPE ATTRIBUTE) (:VALUE \"age\"))\n";

}  // namespace

TEST_CASE("register_document merges candidate terms") {
  ProjectKB kb;
  add_document(kb, kGoldenSentence);
  REQUIRE(kb.terms().size() == 3);
  CHECK(kb.terms()[0].value == "system");
  CHECK(kb.terms()[1].value == "entry");
  CHECK(kb.terms()[2].value == "information");
  for (const auto& t : kb.terms()) CHECK(t.status == TermStatus::candidate);
  CHECK(kb.find_term("information")->contexts == std::vector<std::string>{"patient's information"});

  add_document(kb, "The nurse updates each entry.");
  CHECK(kb.terms().size() == 4);
  CHECK(kb.find_term("entry")->provenance ==
        std::vector<Occurrence>{{"doc-1", 0}, {"doc-2", 0}});

  auto record = kb.documents()[0];
  CHECK(kind_of([&] { kb.register_document(record, {}); }) == ErrorKind::duplicate);
  CHECK(kb.documents().size() == 2);
  CHECK(kb_violations(kb).empty());
}

TEST_CASE("filter / unfilter") {
  ProjectKB kb = example_kb();
  kb.filter_term("clinic");
  CHECK(kb.find_term("clinic")->status == TermStatus::filtered);
  CHECK(kb.terms_with_status(TermStatus::filtered).size() == 1);
  CHECK(kind_of([&] { kb.filter_term("clinic"); }) == ErrorKind::invalid_state);
  CHECK(kind_of([&] { kb.classify_term("clinic", ObjectType::entity); }) == ErrorKind::invalid_state);
  kb.unfilter_term("clinic");
  CHECK(kb == example_kb());
  CHECK(kind_of([&] { kb.unfilter_term("clinic"); }) == ErrorKind::invalid_state);
  CHECK(kind_of([&] { kb.filter_term("nothing"); }) == ErrorKind::not_found);

  kb.classify_term("entry", ObjectType::function);
  CHECK(kind_of([&] { kb.filter_term("entry"); }) == ErrorKind::invalid_state);
}

TEST_CASE("filter decisions persist across later documents") {
  ProjectKB kb = example_kb();
  kb.filter_term("entry");
  add_document(kb, "The nurse updates each entry.");
  CHECK(kb.find_term("entry")->status == TermStatus::filtered);
  CHECK(kb.find_term("entry")->provenance.size() == 2);
}

TEST_CASE("classify builds the published listing") {
  ProjectKB kb = example_kb();
  kb.classify_term("entry", ObjectType::function);
  kb.classify_term("information", ObjectType::entity, "patient");
  kb.classify_term("age", ObjectType::attribute);
  CHECK(kb.export_sexpr() == kPaperListing);
  CHECK(kb.find_term("information")->status == TermStatus::classified);

  // object identity is per value: classifying "patient" itself joins the object
  kb.classify_term("patient", ObjectType::entity);
  CHECK(kb.export_sexpr() == kPaperListing);
  CHECK(kb.objects().size() == 3);
  CHECK(kb_violations(kb).empty());

  auto parsed = parse_sexpr_export(kb.export_sexpr());
  REQUIRE(parsed.size() == 3);
  CHECK(parsed[0] == std::pair{ObjectType::function, std::string("entry")});
  CHECK(parsed[1] == std::pair{ObjectType::entity, std::string("patient")});
  CHECK(parsed[2] == std::pair{ObjectType::attribute, std::string("age")});

  CHECK(kind_of([&] { kb.classify_term("entry", ObjectType::function); }) == ErrorKind::invalid_state);
  CHECK(kind_of([&] { kb.classify_term("system", ObjectType::entity, "  "); }) == ErrorKind::invalid_input);
  CHECK(kind_of([&] { kb.classify_term("ghost", ObjectType::entity); }) == ErrorKind::not_found);
}

TEST_CASE("declassify inverts classify") {
  ProjectKB kb = example_kb();
  kb.classify_term("entry", ObjectType::function);
  const ProjectKB with_entry = kb;
  kb.classify_term("age", ObjectType::attribute, "Age");
  kb.declassify_term("age");
  CHECK(kb == with_entry);
  kb.declassify_term("entry");
  CHECK(kb == example_kb());
  CHECK(kind_of([&] { kb.declassify_term("entry"); }) == ErrorKind::invalid_state);
}

TEST_CASE("export format and ordering") {
  ProjectKB empty;
  CHECK(empty.export_sexpr().empty());
  CHECK(format_sexpr(ObjectType::function, "entry") == "(OBJECT (:TYPE FUNCTION) (:VALUE \"entry\"))");
  CHECK(format_sexpr(ObjectType::entity, "a \"b\"") == "(OBJECT (:TYPE ENTITY) (:VALUE \"a \\\"b\\\"\"))");
  CHECK(parse_sexpr_export(format_sexpr(ObjectType::entity, "a \"b\"") + "\n") ==
        std::vector<std::pair<ObjectType, std::string>>{{ObjectType::entity, "a \"b\""}});

  ProjectKB kb = example_kb();
  kb.classify_term("system", ObjectType::entity);
  kb.classify_term("patient", ObjectType::entity);
  kb.classify_term("clinic", ObjectType::entity);
  kb.classify_term("age", ObjectType::attribute);
  kb.classify_term("entry", ObjectType::function);
  CHECK(kb.export_sexpr() ==
        "(OBJECT (:TYPE FUNCTION) (:VALUE \"entry\"))\n"
        "(OBJECT (:TYPE ENTITY) (:VALUE \"clinic\"))\n"
        "(OBJECT (:TYPE ENTITY) (:VALUE \"patient\"))\n"
        "(OBJECT (:TYPE ENTITY) (:VALUE \"system\"))\n"
        "(OBJECT (:TYPE ATTRIBUTE) (:VALUE \"age\"))\n");
}

TEST_CASE("cross-document conflict on entry") {
  ProjectKB kb = example_kb();
  kb.classify_term("entry", ObjectType::function);
  CHECK(kb.detect_conflicts().empty());

  add_document(kb, "The nurse updates each entry.");
  CHECK(kb.find_term("entry")->status == TermStatus::classified);
  CHECK(kb.unclaimed_occurrences("entry") == std::vector<Occurrence>{{"doc-3", 0}});
  CHECK(kb.detect_conflicts().empty());

  kb.classify_term("entry", ObjectType::attribute);
  auto open = kb.detect_conflicts();
  REQUIRE(open.size() == 1);
  CHECK(open[0].value == "entry");
  CHECK(open[0].state == ConflictState::open);
  CHECK(open[0].claims == std::vector<Claim>{{ObjectType::function, "doc-1", 0}, {ObjectType::attribute, "doc-3", 0}});
  for (const auto& o : kb.objects()) CHECK(o.conflicted == (o.value == "entry"));
  CHECK(kb_violations(kb).empty());

  CHECK(kind_of([&] { (void)kb.export_sexpr(); }) == ErrorKind::open_conflicts);
  CHECK(error_text([&] { (void)kb.export_sexpr(); }).find("entry") != std::string::npos);

  CHECK(kind_of([&] { kb.resolve_conflict("entry", ObjectType::entity); }) == ErrorKind::invalid_input);
  CHECK(kind_of([&] { kb.resolve_conflict("age", ObjectType::entity); }) == ErrorKind::not_found);

  kb.resolve_conflict("entry", ObjectType::function);
  CHECK(kb.detect_conflicts().empty());
  REQUIRE(kb.conflicts().size() == 1);
  CHECK(kb.conflicts()[0].state == ConflictState::resolved);
  CHECK(kb.conflicts()[0].resolution == ObjectType::function);
  CHECK(kb.export_sexpr() == "(OBJECT (:TYPE FUNCTION) (:VALUE \"entry\"))\n");
  CHECK(kb.objects().size() == 1);
  CHECK(kb.objects()[0].provenance.size() == 2);
  CHECK_FALSE(kb.objects()[0].conflicted);
  CHECK(kb_violations(kb).empty());
}

TEST_CASE("conflict through edited values of different terms") {
  ProjectKB kb = example_kb();
  kb.classify_term("patient", ObjectType::entity);
  kb.classify_term("information", ObjectType::attribute, "Patient");
  REQUIRE(kb.detect_conflicts().size() == 1);
  CHECK(fold_case(kb.detect_conflicts()[0].value) == "patient");
  // withdrawing one side clears the conflict
  kb.declassify_term("information");
  CHECK(kb.detect_conflicts().empty());
  CHECK(kb.export_sexpr() == "(OBJECT (:TYPE ENTITY) (:VALUE \"patient\"))\n");
}

TEST_CASE("reclassifying a new occurrence keeps the mapped value") {
  ProjectKB kb = example_kb();
  kb.classify_term("information", ObjectType::entity, "patient");
  add_document(kb, "The nurse stores the information.");
  CHECK(kind_of([&] { kb.classify_term("information", ObjectType::entity, "record"); }) == ErrorKind::invalid_state);
  kb.classify_term("information", ObjectType::entity);
  REQUIRE(kb.objects().size() == 1);
  CHECK(kb.objects()[0].value == "patient");
  CHECK(kb.objects()[0].provenance.size() == 2);
}

TEST_CASE("save / load round trip") {
  TempDir dir;
  ProjectKB kb = example_kb();
  kb.classify_term("entry", ObjectType::function);
  kb.classify_term("information", ObjectType::entity, "patient");
  kb.classify_term("age", ObjectType::attribute);
  add_document(kb, "The nurse updates each entry.");
  kb.classify_term("entry", ObjectType::attribute);  // open conflict
  kb.filter_term("clinic");
  REQUIRE(kb.objects().size() == 4);
  REQUIRE(kb.detect_conflicts().size() == 1);

  const auto path = dir / "kb.json";
  save_kb(kb, path);
  const auto loaded = load_kb(path);
  CHECK(loaded == kb);
  CHECK(serialize_kb(loaded) == serialize_kb(kb));
  CHECK(read_file(path) == serialize_kb(kb));

  kb.resolve_conflict("entry", ObjectType::function);
  save_kb(kb, path);
  CHECK(load_kb(path) == kb);

  auto j = nlohmann::json::parse(read_file(path));
  CHECK(j["schema_version"] == kSchemaVersion);
  for (const char* field : {"project_id", "documents", "terms", "objects", "conflicts"}) CHECK(j.contains(field));
}

TEST_CASE("empty project file loads as an empty kb") {
  const auto kb = deserialize_kb(
      R"({"schema_version": 1, "project_id": "p", "documents": [], "terms": [], "objects": [], "conflicts": []})");
  CHECK(kb == ProjectKB("p"));
  CHECK(kb.export_sexpr().empty());
  CHECK(deserialize_kb(serialize_kb(ProjectKB("p"))) == ProjectKB("p"));
}

TEST_CASE("schema errors name the field") {
  ProjectKB kb = example_kb();
  kb.classify_term("entry", ObjectType::function);
  kb.classify_term("age", ObjectType::attribute);
  auto j = nlohmann::json::parse(serialize_kb(kb));

  auto broken = j;
  broken["objects"][1]["obj_type"] = "ACTOR";
  auto msg = error_text([&] { deserialize_kb(broken.dump()); });
  CHECK(kind_of([&] { deserialize_kb(broken.dump()); }) == ErrorKind::schema);
  CHECK(msg.find("$.objects[1].obj_type") != std::string::npos);
  CHECK(msg.find("ACTOR") != std::string::npos);

  auto version = j;
  version["schema_version"] = 99;
  CHECK(kind_of([&] { deserialize_kb(version.dump()); }) == ErrorKind::schema);

  auto missing = j;
  missing.erase("terms");
  CHECK(error_text([&] { deserialize_kb(missing.dump()); }).find("$.terms") != std::string::npos);

  auto bad_status = j;
  bad_status["terms"][0]["status"] = "DELETED";
  CHECK(error_text([&] { deserialize_kb(bad_status.dump()); }).find("$.terms[0].status") != std::string::npos);

  auto dangling = j;
  dangling["objects"][0]["provenance"][0]["doc_id"] = "doc-404";
  CHECK(kind_of([&] { deserialize_kb(dangling.dump()); }) == ErrorKind::schema);

  CHECK(kind_of([&] { deserialize_kb("{not json"); }) == ErrorKind::schema);
  CHECK(kind_of([&] { deserialize_kb("[]"); }) == ErrorKind::schema);
  CHECK(kind_of([&] { load_kb("/nonexistent/kb.json"); }) == ErrorKind::io);
}

namespace {
void crash_before_rename(const std::filesystem::path&) { throw std::runtime_error("simulated crash"); }
}  // namespace

TEST_CASE("atomic save: a crash before rename leaves the old file intact") {
  TempDir dir;
  const auto path = dir / "kb.json";
  ProjectKB kb = example_kb();
  save_kb(kb, path);
  const std::string old_text = read_file(path);

  ProjectKB changed = kb;
  changed.classify_term("entry", ObjectType::function);
  CHECK_THROWS(write_file_atomic(path, serialize_kb(changed), crash_before_rename));
  CHECK(read_file(path) == old_text);
  CHECK(load_kb(path) == kb);

  save_kb(changed, path);
  CHECK(load_kb(path) == changed);
  CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
}

TEST_CASE("random curation sessions preserve the invariants") {
  std::mt19937 rng(314);
  std::size_t conflicts = 0;
  for (int i = 0; i < 150; ++i) {
    auto r = run_random_session(rng, 30);
    INFO("session " << i);
    for (const auto& v : r.violations) FAIL_CHECK(v);
    conflicts += r.conflicts_seen;
  }
  CHECK(conflicts > 0);
}
