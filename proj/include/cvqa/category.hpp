#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace cvqa {

/// The closed set of cultural categories shared by the knowledge base and datasets.
enum class Category {
    cuisine,
    architecture,
    traditional_clothing,
    cultural_festivals,
    daily_life_practices,
    traditional_sports,
    transportation,
    handicrafts,
    musical_instruments,
    folk_arts,
    landscapes,
    miscellaneous,
};

inline constexpr std::size_t kCategoryCount = 12;

const std::array<Category, kCategoryCount>& all_categories();
std::string_view to_string(Category c);
std::optional<Category> parse_category(std::string_view name);

}  // namespace cvqa
