#include <array>

#include "cvqa/dsl.hpp"

namespace cvqa::dsl {

std::string_view to_string(ValueType t) {
    switch (t) {
        case ValueType::region_list: return "RegionList";
        case ValueType::region: return "Region";
        case ValueType::entity: return "Entity";
        case ValueType::text: return "Text";
        case ValueType::answer: return "Answer";
    }
    return "?";
}

std::span<const FunctionSignature> registry() {
    using V = ValueType;
    static const std::vector<FunctionSignature> functions = {
        {"detect_objects", {}, V::region_list},
        {"select_region", {V::region_list, V::text}, V::region},
        {"identify_food", {V::region}, V::entity},
        {"identify_landmark", {V::region}, V::entity},
        {"identify_clothing", {V::region}, V::entity},
        {"identify_object", {V::region}, V::entity},
        {"lookup_entity", {V::text}, V::entity},
        {"describe_architecture", {V::entity}, V::text},
        {"explain_cultural_significance", {V::entity}, V::text},
        {"compare_regional_variations", {V::entity}, V::text},
        {"describe_history", {V::entity}, V::text},
        {"compose_answer", {V::text}, V::answer, true},
    };
    return functions;
}

const FunctionSignature* find_function(std::string_view name) {
    for (const auto& f : registry()) {
        if (f.name == name) return &f;
    }
    return nullptr;
}

std::span<const std::string_view> selectors() {
    static constexpr std::array<std::string_view, 4> names = {"largest", "most_confident", "leftmost", "rightmost"};
    return names;
}

std::vector<Category> category_family(std::string_view func) {
    if (func == "identify_food") return {Category::cuisine};
    if (func == "identify_landmark") return {Category::architecture, Category::landscapes};
    if (func == "identify_clothing") return {Category::traditional_clothing};
    return {};
}

}  // namespace cvqa::dsl
