#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "reqlens/knowledge_base.hpp"
#include "reqlens/text_util.hpp"

namespace testing_support {

// Every violated knowledge-base invariant, as a readable line.
inline std::vector<std::string> kb_violations(const reqlens::ProjectKB& kb) {
  using namespace reqlens;
  std::vector<std::string> out;

  std::set<std::string> docs;
  for (const auto& d : kb.documents()) docs.insert(d.doc_id);

  std::set<std::string> term_keys;
  for (const auto& t : kb.terms()) {
    const auto key = fold_case(t.value);
    if (!term_keys.insert(key).second) out.push_back("duplicate term " + key);
    if (t.status != TermStatus::candidate && t.status != TermStatus::filtered && t.status != TermStatus::classified)
      out.push_back("bad status on " + key);
    std::size_t claimed = 0;
    for (const auto& o : kb.objects())
      for (const auto& s : o.provenance) {
        if (s.term != key) continue;
        ++claimed;
        bool listed = false;
        for (const auto& occ : t.provenance) listed = listed || (occ.doc_id == s.doc_id && occ.sentence_index == s.sentence_index);
        if (!listed) out.push_back("object source not in provenance of " + key);
      }
    if (t.status == TermStatus::classified && claimed == 0) out.push_back("classified term without object: " + key);
    if (t.status != TermStatus::classified && claimed != 0) out.push_back("unclassified term owns object: " + key);
  }

  std::map<std::string, std::set<ObjectType>> types;
  std::set<std::pair<std::string, ObjectType>> seen;
  for (const auto& o : kb.objects()) {
    const auto key = fold_case(o.value);
    if (trim(o.value).empty()) out.push_back("empty object value");
    if (o.provenance.empty()) out.push_back("object without provenance: " + key);
    if (!seen.emplace(key, o.obj_type).second) out.push_back("duplicate object " + key);
    for (const auto& s : o.provenance) {
      if (!docs.count(s.doc_id)) out.push_back("object references unknown document " + s.doc_id);
      if (!term_keys.count(s.term)) out.push_back("object references unknown term " + s.term);
    }
    types[key].insert(o.obj_type);
  }

  std::map<std::string, int> open;
  for (const auto& c : kb.conflicts()) {
    if (c.state != ConflictState::open) continue;
    ++open[fold_case(c.value)];
    std::set<ObjectType> claim_types;
    for (const auto& cl : c.claims) claim_types.insert(cl.obj_type);
    if (claim_types.size() < 2) out.push_back("open conflict with fewer than two types: " + c.value);
  }
  for (const auto& [key, ts] : types) {
    const bool conflicting = ts.size() >= 2;
    if (conflicting != (open[key] == 1)) out.push_back("conflict state mismatch for " + key);
    std::size_t clean = 0;
    for (const auto& o : kb.objects())
      if (fold_case(o.value) == key) {
        if (o.conflicted != conflicting) out.push_back("conflicted flag wrong for " + key);
        clean += !o.conflicted;
      }
    if (clean > 1) out.push_back("two non-conflicted objects share value " + key);
  }
  for (const auto& [key, n] : open)
    if (n > 0 && !types.count(key)) out.push_back("open conflict without objects: " + key);

  if (kb.detect_conflicts().size() != static_cast<std::size_t>(std::count_if(
                                          open.begin(), open.end(), [](const auto& p) { return p.second > 0; })))
    out.push_back("detect_conflicts disagrees with stored conflicts");
  return out;
}

}  // namespace testing_support
