#include "reqlens/lexicon.hpp"

#include <algorithm>

#include "reqlens/error.hpp"
#include "reqlens/text_util.hpp"

namespace reqlens {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t pos = 0;
  while (true) {
    const auto tab = line.find('\t', pos);
    cols.push_back(line.substr(pos, tab == std::string_view::npos ? line.npos : tab - pos));
    if (tab == std::string_view::npos) break;
    pos = tab + 1;
  }
  return cols;
}

bool valid_category(std::string_view pos) {
  if (pos.empty()) return false;
  return std::all_of(pos.begin(), pos.end(), [](char c) {
    return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || (c >= 'a' && c <= 'z');
  });
}

}  // namespace

Lexicon Lexicon::parse(std::string_view text, std::string_view source) {
  Lexicon lex;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || trim(line).front() == '#') continue;

    auto fail = [&](const std::string& what) {
      throw Error(ErrorKind::invalid_input, std::string(source) + ":" + std::to_string(line_no) + ": " + what);
    };
    const auto cols = split_tabs(line);
    if (cols.size() < 2 || cols.size() > 3) fail("expected surface<TAB>POS[<TAB>features]");
    const auto surface = trim(cols[0]);
    const auto category = trim(cols[1]);
    if (surface.empty()) fail("empty surface");
    if (!valid_category(category)) fail("invalid part of speech '" + std::string(category) + "'");
    LexEntry entry{fold_case(surface), std::string(category), {}, false};
    if (cols.size() == 3) {
      try {
        entry.features = parse_feature_list(cols[2]);
      } catch (const Error& e) {
        fail(e.what());
      }
    }
    lex.add(std::move(entry));
  }
  return lex;
}

void Lexicon::add(LexEntry entry) {
  entry.surface = fold_case(trim(entry.surface));
  auto& bucket = entries_[entry.surface];
  const auto it = std::lower_bound(bucket.begin(), bucket.end(), entry);
  if (it != bucket.end() && *it == entry) return;
  bucket.insert(it, std::move(entry));
  ++size_;
}

std::vector<LexEntry> Lexicon::lookup(std::string_view surface) const {
  const auto key = fold_case(trim(surface));
  if (const auto it = entries_.find(key); it != entries_.end()) return it->second;
  return {LexEntry{key, std::string(kOovCategory), {}, true}};
}

bool Lexicon::contains(std::string_view surface) const {
  return entries_.count(fold_case(trim(surface))) != 0;
}

std::set<std::string> Lexicon::categories() const {
  std::set<std::string> out;
  for (const auto& [_, bucket] : entries_)
    for (const auto& e : bucket) out.insert(e.pos);
  return out;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  return Lexicon::parse(read_file(path), path.string());
}

}  // namespace reqlens
