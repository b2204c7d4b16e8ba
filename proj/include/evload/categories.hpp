#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "evload/model.hpp"

namespace evload {

/// Land-use category of a basic administrative unit (ZSJ). The enumerator
/// order is the one-hot slot order of the model input.
enum class ZsjCategory {
  CompactResidential,
  UrbanSuburbanMixed,
  ResidentialRecreational,
  SeparatedResidential,
  Transportation,
  CivicAmenities,
  Recreational,
  OtherPurpose,
  Industrial,
  Reserve,
  Agricultural,
  Forest,
};

inline constexpr std::array<std::string_view, kCategoryCount> kCategoryNames = {
    "Compact residential area",
    "Urban and suburban mixed area",
    "Residential and recreational area",
    "Separated residential area",
    "Transportation infrastructure area",
    "Civic amenities area",
    "Recreational area",
    "Other purpose area",
    "Industrial area",
    "Reserve area",
    "Agricultural area",
    "Forest area",
};

inline constexpr std::size_t index_of(ZsjCategory c) { return static_cast<std::size_t>(c); }

inline std::string_view name_of(ZsjCategory c) { return kCategoryNames[index_of(c)]; }

inline ZsjCategory category_from_index(std::size_t i) { return static_cast<ZsjCategory>(i); }

// Exact, case-sensitive match on the English name.
inline std::optional<ZsjCategory> parse_category(std::string_view name) {
  for (std::size_t i = 0; i < kCategoryNames.size(); ++i)
    if (kCategoryNames[i] == name) return static_cast<ZsjCategory>(i);
  return std::nullopt;
}

/// Archetypal daily demand patterns.
enum class GroupLabel {
  SustainedSinglePeak,
  MorningSinglePeak,
  EveningSinglePeak,
  DoublePeak,
};

inline constexpr std::size_t kGroupCount = 4;

inline constexpr std::array<std::string_view, kGroupCount> kGroupNames = {
    "SustainedSinglePeak", "MorningSinglePeak", "EveningSinglePeak", "DoublePeak"};

inline std::string_view name_of(GroupLabel g) {
  return kGroupNames[static_cast<std::size_t>(g)];
}

inline std::optional<GroupLabel> parse_group(std::string_view name) {
  for (std::size_t i = 0; i < kGroupNames.size(); ++i)
    if (kGroupNames[i] == name) return static_cast<GroupLabel>(i);
  return std::nullopt;
}

}  // namespace evload
