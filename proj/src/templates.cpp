#include "cvqa/templates.hpp"

#include "cvqa/embedded_data.hpp"
#include "cvqa/error.hpp"
#include "cvqa/jsonl.hpp"

namespace cvqa {

Templates Templates::parse(std::string_view json_text) {
    Json doc;
    try {
        doc = Json::parse(json_text);
    } catch (const Json::parse_error& e) {
        throw FormatError(std::string("malformed template file: ") + e.what());
    }
    if (!doc.is_object()) throw FormatError("template file must hold a JSON object");
    Templates t;
    t.identification = require_string(doc, "identification", 0);
    t.uncertain_identification = require_string(doc, "uncertain_identification", 0);
    t.regional_variant = require_string(doc, "regional_variant", 0);
    t.uncertain_answer = require_string(doc, "uncertain_answer", 0);
    return t;
}

const Templates& Templates::bundled() {
    static const Templates t = parse(embedded::templates);
    return t;
}

std::string render_template(std::string_view tmpl,
                            const std::vector<std::pair<std::string_view, std::string_view>>& slots) {
    std::string out;
    out.reserve(tmpl.size() + 32);
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            auto close = tmpl.find('}', i + 1);
            if (close != std::string_view::npos) {
                auto key = tmpl.substr(i + 1, close - i - 1);
                bool replaced = false;
                for (const auto& [name, value] : slots) {
                    if (name == key) {
                        out += value;
                        replaced = true;
                        break;
                    }
                }
                if (replaced) {
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(tmpl[i++]);
    }
    return out;
}

}  // namespace cvqa
