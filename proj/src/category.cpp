#include "cvqa/category.hpp"

#include <string>

namespace cvqa {

namespace {

constexpr std::array<std::string_view, kCategoryCount> kNames = {
    "Cuisine",
    "Architecture",
    "Traditional Clothing",
    "Cultural Festivals",
    "Daily Life Practices",
    "Traditional Sports",
    "Transportation",
    "Handicrafts",
    "Musical Instruments",
    "Folk Arts",
    "Landscapes",
    "Miscellaneous",
};

}  // namespace

const std::array<Category, kCategoryCount>& all_categories() {
    static const std::array<Category, kCategoryCount> all = [] {
        std::array<Category, kCategoryCount> a{};
        for (std::size_t i = 0; i < kCategoryCount; ++i) a[i] = static_cast<Category>(i);
        return a;
    }();
    return all;
}

std::string_view to_string(Category c) { return kNames[static_cast<std::size_t>(c)]; }

std::optional<Category> parse_category(std::string_view name) {
    for (std::size_t i = 0; i < kCategoryCount; ++i) {
        if (kNames[i] == name) return static_cast<Category>(i);
    }
    return std::nullopt;
}

}  // namespace cvqa
