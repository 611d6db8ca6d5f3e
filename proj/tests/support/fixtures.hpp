#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>

#include "reqlens/knowledge_base.hpp"
#include "reqlens/pipeline.hpp"

namespace testing_support {

inline constexpr std::string_view kGoldenSentence = "A system requires entry of patient's information.";
inline constexpr std::string_view kDunedinSentence =
    "Dunedin Podiatry requires an information system that allows entry and retrieval of "
    "patient's details and their medical histories.";
inline constexpr std::string_view kAgreementBad = "He see a car in the park.";
inline constexpr std::string_view kAgreementGood = "He sees a car in the park.";

// Published bracketing, quotes in ASCII.
inline constexpr std::string_view kGoldenTree = R"tree((S (NP (DET "A") (NOUN "system"))
  (VP (VERB "requires")
      (NP (NP (NOUN "entry"))
          (PP (OF "of") (NP (POSSADJ "patient's")
                          (NOUN "information")))))))tree";

inline std::string normalize_ws(std::string_view text) {
  std::string out;
  bool space = false;
  for (char c : text) {
    if (c == ' ' || c == '\n' || c == '\t' || c == '\r') {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += c;
  }
  return out;
}

inline const reqlens::Pipeline& seed_pipeline() {
  static const reqlens::Pipeline pipeline = reqlens::Pipeline::load(reqlens::default_config());
  return pipeline;
}

inline std::string add_document(reqlens::ProjectKB& kb, std::string_view text, std::string title = "") {
  const auto id = kb.next_document_id();
  const auto analysis = seed_pipeline().analyze(id, std::move(title), std::string(text));
  kb.register_document(analysis.record(), analysis.terms);
  return id;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("reqlens-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support
