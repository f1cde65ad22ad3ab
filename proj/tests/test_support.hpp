#pragma once

#include <random>
#include <string>
#include <vector>

#include "cvqa/dsl.hpp"
#include "cvqa/kb.hpp"
#include "cvqa/perception.hpp"

namespace cvqa::testing {

inline const std::string kData = CVQA_DATA_DIR;

inline const KnowledgeBase& starter_kb() {
    static const KnowledgeBase kb = KnowledgeBase::load_file(kData + "/starter_kb.jsonl");
    return kb;
}

inline const DetectionFixture& sample_fixture() {
    static const DetectionFixture f = DetectionFixture::load_file(kData + "/fixtures/detections.jsonl");
    return f;
}

inline std::vector<std::string> random_tokens(std::mt19937_64& rng, std::size_t max_len, int vocab) {
    std::uniform_int_distribution<std::size_t> len(0, max_len);
    std::uniform_int_distribution<int> word(0, vocab - 1);
    std::vector<std::string> out(len(rng));
    for (auto& t : out) t = std::string(1, static_cast<char>('a' + word(rng)));
    return out;
}

inline Detection random_detection(std::mt19937_64& rng, const std::string& label) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double w = 0.05 + 0.5 * u(rng);
    const double h = 0.05 + 0.5 * u(rng);
    const double x1 = u(rng) * (1.0 - w);
    const double y1 = u(rng) * (1.0 - h);
    return {label, u(rng), {x1, y1, x1 + w, y1 + h}};
}

/// Random well-typed program: builds typed values step by step and ends in compose_answer.
inline dsl::Program random_program(std::mt19937_64& rng) {
    using dsl::ValueType;
    dsl::Program p;
    std::vector<std::pair<std::string, ValueType>> vars;
    int counter = 0;
    auto fresh = [&] {
        static const char* stems[] = {"r", "reg", "e", "t", "x_", "v"};
        return std::string(stems[counter % 6]) + std::to_string(counter++);
    };
    auto pick = [&](ValueType t) -> std::string {
        std::vector<std::string> c;
        for (const auto& [name, type] : vars)
            if (type == t) c.push_back(name);
        if (c.empty()) return {};
        return c[std::uniform_int_distribution<std::size_t>(0, c.size() - 1)(rng)];
    };
    auto add = [&](std::string func, std::vector<dsl::Arg> args, ValueType out) {
        auto var = fresh();
        p.steps.push_back({var, std::move(func), std::move(args), 0});
        vars.emplace_back(var, out);
    };
    static const char* identify[] = {"identify_food", "identify_landmark", "identify_clothing", "identify_object"};
    static const char* texts[] = {"describe_architecture", "explain_cultural_significance",
                                  "compare_regional_variations", "describe_history"};
    static const char* names[] = {"phở", "áo dài", "chùa \"Một\" Cột", "tab\there", "back\\slash", "line\nbreak"};
    const auto sel = dsl::selectors();

    add("detect_objects", {}, ValueType::region_list);
    const int extra = std::uniform_int_distribution<int>(1, 8)(rng);
    for (int i = 0; i < extra; ++i) {
        switch (std::uniform_int_distribution<int>(0, 4)(rng)) {
        case 0:
            add("detect_objects", {}, ValueType::region_list);
            break;
        case 1: {
            auto s = std::string(sel[std::uniform_int_distribution<std::size_t>(0, sel.size() - 1)(rng)]);
            add("select_region", {dsl::VarRef{pick(ValueType::region_list)}, dsl::StringLit{s}}, ValueType::region);
            break;
        }
        case 2: {
            auto r = pick(ValueType::region);
            if (r.empty()) break;
            add(identify[std::uniform_int_distribution<int>(0, 3)(rng)], {dsl::VarRef{r}}, ValueType::entity);
            break;
        }
        case 3:
            add("lookup_entity", {dsl::StringLit{names[std::uniform_int_distribution<int>(0, 5)(rng)]}},
                ValueType::entity);
            break;
        default: {
            auto e = pick(ValueType::entity);
            if (e.empty()) break;
            add(texts[std::uniform_int_distribution<int>(0, 3)(rng)], {dsl::VarRef{e}}, ValueType::text);
            break;
        }
        }
    }
    if (pick(ValueType::text).empty()) {
        add("lookup_entity", {dsl::StringLit{"bánh mì"}}, ValueType::entity);
        add("describe_history", {dsl::VarRef{vars.back().first}}, ValueType::text);
    }
    std::vector<dsl::Arg> texts_in;
    const int n = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int i = 0; i < n; ++i) texts_in.push_back(dsl::VarRef{pick(ValueType::text)});
    add("compose_answer", std::move(texts_in), ValueType::answer);
    return p;
}

}  // namespace cvqa::testing
