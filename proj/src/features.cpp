#include "reqlens/features.hpp"

#include <algorithm>
#include <array>

#include "reqlens/error.hpp"
#include "reqlens/text_util.hpp"

namespace reqlens {

namespace {

const std::array<FeatureDomain, 1>& registry() {
  static const std::array<FeatureDomain, 1> domains{FeatureDomain{"number", {"sg", "pl"}}};
  return domains;
}

}  // namespace

const FeatureDomain* find_feature_domain(std::string_view name) {
  for (const auto& d : registry())
    if (d.name == name) return &d;
  return nullptr;
}

ValueSet parse_feature_value(const FeatureDomain& domain, std::string_view value) {
  if (value == "any") return domain.full();
  for (std::size_t i = 0; i < domain.values.size(); ++i)
    if (domain.values[i] == value) return ValueSet{1} << i;
  throw Error(ErrorKind::invalid_input,
              "unknown value '" + std::string(value) + "' for feature '" + domain.name + "'");
}

std::string format_feature_value(const FeatureDomain& domain, ValueSet values) {
  if (values == domain.full()) return "any";
  std::string out;
  for (std::size_t i = 0; i < domain.values.size(); ++i) {
    if (values & (ValueSet{1} << i)) {
      if (!out.empty()) out += '|';
      out += domain.values[i];
    }
  }
  return out.empty() ? "none" : out;
}

ValueSet FeatureMap::get(std::string_view feature) const {
  for (const auto& [name, values] : items_)
    if (name == feature) return values;
  const auto* domain = find_feature_domain(feature);
  return domain ? domain->full() : ~ValueSet{0};
}

void FeatureMap::set(std::string_view feature, ValueSet values) {
  const auto* domain = find_feature_domain(feature);
  auto it = std::lower_bound(items_.begin(), items_.end(), feature,
                             [](const auto& item, std::string_view key) { return item.first < key; });
  const bool present = it != items_.end() && it->first == feature;
  if (domain && values == domain->full()) {
    if (present) items_.erase(it);
    return;
  }
  if (present)
    it->second = values;
  else
    items_.insert(it, {std::string(feature), values});
}

FeatureMap parse_feature_list(std::string_view text) {
  FeatureMap features;
  text = trim(text);
  if (text.empty() || text == "-") return features;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto semi = text.find(';', pos);
    const auto item = trim(text.substr(pos, semi == std::string_view::npos ? text.npos : semi - pos));
    pos = semi == std::string_view::npos ? text.size() + 1 : semi + 1;
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorKind::invalid_input, "feature '" + std::string(item) + "' is not of the form name=value");
    const auto name = trim(item.substr(0, eq));
    const auto value = trim(item.substr(eq + 1));
    const auto* domain = find_feature_domain(name);
    if (!domain) throw Error(ErrorKind::invalid_input, "unknown feature '" + std::string(name) + "'");
    features.set(name, parse_feature_value(*domain, value));
  }
  return features;
}

std::string format_feature_list(const FeatureMap& features) {
  if (features.empty()) return "-";
  std::string out;
  for (const auto& [name, values] : features.items()) {
    if (!out.empty()) out += ';';
    out += name + "=";
    const auto* domain = find_feature_domain(name);
    out += domain ? format_feature_value(*domain, values) : std::to_string(values);
  }
  return out;
}

}  // namespace reqlens
