#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace reqlens {

// A set of values of one feature, one bit per value of its domain.
using ValueSet = std::uint32_t;

// Closed value inventory of a feature. The registry currently holds only
// `number` = {sg, pl}; `any` denotes the full set.
struct FeatureDomain {
  std::string name;
  std::vector<std::string> values;

  ValueSet full() const { return values.size() >= 32 ? ~ValueSet{0} : (ValueSet{1} << values.size()) - 1; }
};

const FeatureDomain* find_feature_domain(std::string_view name);

// Throws Error(invalid_input) for a value outside the domain.
ValueSet parse_feature_value(const FeatureDomain& domain, std::string_view value);

std::string format_feature_value(const FeatureDomain& domain, ValueSet values);

// Flat feature map. A feature that is absent carries its full value set,
// so entries equal to the full set are never stored and `number=any`
// compares equal to an empty map.
class FeatureMap {
 public:
  FeatureMap() = default;

  ValueSet get(std::string_view feature) const;
  void set(std::string_view feature, ValueSet values);

  const std::vector<std::pair<std::string, ValueSet>>& items() const { return items_; }
  bool empty() const { return items_.empty(); }

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;
  friend auto operator<=>(const FeatureMap&, const FeatureMap&) = default;

 private:
  std::vector<std::pair<std::string, ValueSet>> items_;  // sorted by name
};

// Parses "number=pl;other=x". Empty text or "-" yields an empty map.
FeatureMap parse_feature_list(std::string_view text);

// Inverse of parse_feature_list; empty maps render as "-".
std::string format_feature_list(const FeatureMap& features);

}  // namespace reqlens
