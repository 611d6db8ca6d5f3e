#include <doctest.h>

#include <random>
#include <string>
#include <vector>

#include "reqlens/error.hpp"
#include "reqlens/text_ingest.hpp"
#include "reqlens/text_util.hpp"
#include "support/fixtures.hpp"

using namespace reqlens;
using testing_support::kDunedinSentence;
using testing_support::kGoldenSentence;

namespace {

std::vector<std::string> surfaces(const std::vector<Token>& tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) out.push_back(t.surface);
  return out;
}

std::string squash(std::string_view text) {
  std::string out;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  return out;
}

}  // namespace

TEST_CASE("split_sentences: empty and single") {
  CHECK(split_sentences("").empty());
  CHECK(split_sentences("   \n ").empty());

  auto one = split_sentences(std::string(kGoldenSentence));
  REQUIRE(one.size() == 1);
  CHECK(one[0].index == 0);
  CHECK(one[0].text == kGoldenSentence);

  CHECK(split_sentences(std::string(kDunedinSentence)).size() == 1);
}

TEST_CASE("split_sentences: terminators, abbreviations, spans") {
  const std::string body = "The system stores data. Dr. Smith reviews it, e.g. weekly! Does it work? yes it does.";
  auto s = split_sentences(body);
  REQUIRE(s.size() == 3);
  CHECK(s[0].text == "The system stores data.");
  CHECK(s[1].text == "Dr. Smith reviews it, e.g. weekly!");
  CHECK(s[2].text == "Does it work? yes it does.");
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s[i].index == i);
    CHECK(body.substr(s[i].span.begin, s[i].span.end - s[i].span.begin) == s[i].text);
  }
}

TEST_CASE("split_sentences: closing quotes stay with their sentence") {
  auto s = split_sentences("He said \"stop.\" Then it stopped.");
  REQUIRE(s.size() == 2);
  CHECK(s[0].text == "He said \"stop.\"");
  CHECK(s[1].text == "Then it stopped.");
}

TEST_CASE("split_sentences covers every non-whitespace character exactly once") {
  std::mt19937 rng(7);
  const std::vector<std::string> pieces = {"word", "Word", ".", "!", "?", " ", "\n", "e.g.", "Dr.", ",", "\"", "A"};
  for (int round = 0; round < 300; ++round) {
    std::string body;
    const int n = std::uniform_int_distribution<int>(0, 30)(rng);
    for (int i = 0; i < n; ++i) body += pieces[std::uniform_int_distribution<std::size_t>(0, pieces.size() - 1)(rng)];
    auto sentences = split_sentences(body);
    std::string joined;
    std::size_t last_end = 0;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      CHECK(sentences[i].index == i);
      CHECK_FALSE(trim(sentences[i].text).empty());
      CHECK(sentences[i].span.begin >= last_end);
      last_end = sentences[i].span.end;
      joined += sentences[i].text;
    }
    CHECK(squash(joined) == squash(body));
  }
}

TEST_CASE("tokenize: the golden sentence") {
  auto tokens = tokenize(kGoldenSentence, CompoundList{});
  CHECK(surfaces(tokens) ==
        std::vector<std::string>{"A", "system", "requires", "entry", "of", "patient's", "information"});
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    CHECK(tokens[i].position == i);
    CHECK_FALSE(tokens[i].is_compound);
    CHECK(kGoldenSentence.substr(tokens[i].span.begin, tokens[i].span.end - tokens[i].span.begin) ==
          tokens[i].surface);
  }
}

TEST_CASE("tokenize: compounds merge case-insensitively, original casing kept") {
  CompoundList list;
  list.add("information system");
  list.add("dunedin podiatry");
  auto a = tokenize("an information system", list);
  REQUIRE(a.size() == 2);
  CHECK(a[1].surface == "information system");
  CHECK(a[1].is_compound);

  auto b = tokenize(kDunedinSentence, list);
  REQUIRE_FALSE(b.empty());
  CHECK(b[0].surface == "Dunedin Podiatry");
  CHECK(b[0].is_compound);
  CHECK(b[0].position == 0);
  CHECK(b.back().surface == "histories");
}

TEST_CASE("tokenize: longest match wins") {
  CompoundList list;
  list.add("information system");
  list.add("information system interface");
  auto t = tokenize("the information system interface is fast", list);
  CHECK(surfaces(t) == std::vector<std::string>{"the", "information system interface", "is", "fast"});
  auto u = tokenize("the information system is fast", list);
  CHECK(surfaces(u) == std::vector<std::string>{"the", "information system", "is", "fast"});
}

TEST_CASE("tokenize: punctuation, hyphens, possessives, abbreviations") {
  auto t = tokenize("The clinic's follow-up (weekly), e.g. Monday; done!", CompoundList{});
  CHECK(surfaces(t) == std::vector<std::string>{"The", "clinic's", "follow-up", "weekly", "e.g.", "Monday", "done"});
  auto curly = tokenize("patient\xE2\x80\x99s information", CompoundList{});
  CHECK(surfaces(curly) == std::vector<std::string>{"patient\xE2\x80\x99s", "information"});
}

TEST_CASE("tokenize: merged compounds have internal spaces; tokenizing again is stable") {
  CompoundList list = CompoundList::parse("information system\nstaff members\n# comment\n\nDunedin Podiatry\n");
  CHECK(list.size() == 3);
  const std::vector<std::string> inputs = {
      std::string(kDunedinSentence), "Staff   members update the information system.",
      "information system information system staff members", "nothing here"};
  for (const auto& text : inputs) {
    auto tokens = tokenize(text, list);
    std::string rejoined;
    for (const auto& tok : tokens) {
      if (tok.is_compound) CHECK(tok.surface.find(' ') != std::string::npos);
      rejoined += (rejoined.empty() ? "" : " ") + tok.surface;
    }
    auto again = tokenize(rejoined, list);
    CHECK(surfaces(again) == surfaces(tokens));
    // reassembly matches the sentence modulo whitespace and punctuation
    CHECK(squash(rejoined) == squash(strip_terminal_punctuation(text)));
  }
}

TEST_CASE("compound list rejects single-word lines") {
  CHECK_THROWS_AS(CompoundList::parse("information system\nsystem\n", "list.txt"), Error);
  try {
    CompoundList::parse("information system\nsystem\n", "list.txt");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("list.txt:2") != std::string::npos);
  }
}

TEST_CASE("make_document numbers sentences") {
  auto doc = make_document("d1", "Title", "One sentence here. Another one there.");
  CHECK(doc.doc_id == "d1");
  REQUIRE(doc.sentences.size() == 2);
  CHECK(doc.sentences[1].index == 1);
}
