#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cvqa {

/// Vietnamese sentence templates used for generated text. Slots are written `{name}`.
struct Templates {
    std::string identification;            // {label}, {name}
    std::string uncertain_identification;
    std::string regional_variant;          // {region}, {note}
    std::string uncertain_answer;

    static Templates parse(std::string_view json_text);
    static const Templates& bundled();
};

/// Substitutes `{key}` slots. Unknown slots are left in place.
std::string render_template(std::string_view tmpl,
                            const std::vector<std::pair<std::string_view, std::string_view>>& slots);

}  // namespace cvqa
