#include <algorithm>
#include <deque>
#include <map>
#include <optional>

#include "cvqa/dsl.hpp"

namespace cvqa::dsl {

namespace {

struct RegionListValue {
    std::vector<std::size_t> regions;
};
struct RegionValue {
    std::optional<std::size_t> region;
};
struct EntityValue {
    std::optional<std::string> id;
    std::vector<std::size_t> regions;
};
struct TextValue {
    std::vector<Fragment> fragments;
    bool unresolved = false;
};
struct AnswerValue {
    Answer answer;
};

using Value = std::variant<RegionListValue, RegionValue, EntityValue, TextValue, AnswerValue>;

std::string join_text(const std::vector<Fragment>& fragments) {
    std::string out;
    for (const auto& f : fragments) {
        if (!out.empty()) out.push_back(' ');
        out += f.text;
    }
    return out;
}

std::string render(const Value& v) {
    return std::visit(
        [](const auto& x) -> std::string {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, RegionListValue>) {
                std::string s = "regions[";
                for (std::size_t i = 0; i < x.regions.size(); ++i) {
                    if (i > 0) s += ",";
                    s += std::to_string(x.regions[i]);
                }
                return s + "]";
            } else if constexpr (std::is_same_v<T, RegionValue>) {
                return x.region ? "region[" + std::to_string(*x.region) + "]" : "region[none]";
            } else if constexpr (std::is_same_v<T, EntityValue>) {
                return x.id ? "entity[" + *x.id + "]" : "entity[none]";
            } else if constexpr (std::is_same_v<T, TextValue>) {
                return x.unresolved ? "text[unresolved]" : "text[" + join_text(x.fragments) + "]";
            } else {
                return std::string(x.answer.uncertain ? "answer[uncertain]: " : "answer: ") + x.answer.text;
            }
        },
        v);
}

class Interpreter {
public:
    explicit Interpreter(const ExecutionContext& ctx) : ctx_(ctx) {}

    ExecutionTrace run(const Program& program) {
        if (program.steps.empty()) throw InternalError("cannot execute an empty program");
        ExecutionTrace trace;
        for (std::size_t i = 0; i < program.steps.size(); ++i) {
            const auto& step = program.steps[i];
            TraceRecord record;
            record.step = i;
            record.var = step.var;
            record.func = step.func;
            std::vector<const Value*> args;
            for (const auto& arg : step.args) args.push_back(&resolve(arg, record.inputs));
            Value result = call(step.func, args, record);
            record.output = render(result);
            values_[step.var] = std::move(result);
            trace.records.push_back(std::move(record));
        }
        const auto* final = std::get_if<AnswerValue>(&values_[program.steps.back().var]);
        if (final == nullptr) throw InternalError("program did not produce an Answer");
        trace.answer = final->answer;
        return trace;
    }

private:
    const Value& resolve(const Arg& arg, std::vector<std::string>& rendered) {
        if (const auto* ref = std::get_if<VarRef>(&arg)) {
            auto it = values_.find(ref->name);
            if (it == values_.end()) throw InternalError("unbound variable \"" + ref->name + "\"");
            rendered.push_back(ref->name + "=" + render(it->second));
            return it->second;
        }
        if (const auto* lit = std::get_if<StringLit>(&arg)) {
            rendered.push_back("\"" + lit->value + "\"");
            literals_.push_back(TextValue{{Fragment{lit->value, "", ""}}, false});
            return literals_.back();
        }
        throw InternalError("integer literal reached execution");
    }

    template <typename T>
    const T& expect(const std::vector<const Value*>& args, std::size_t i, std::string_view func) {
        if (i >= args.size()) throw InternalError(std::string(func) + ": missing argument");
        const auto* v = std::get_if<T>(args[i]);
        if (v == nullptr) throw InternalError(std::string(func) + ": argument type mismatch");
        return *v;
    }

    std::optional<std::string> best_match(std::string_view mention, std::vector<Category> categories) const {
        MatchOptions options;
        options.threshold = ctx_.config.match_threshold;
        options.edit_weight = ctx_.config.edit_weight;
        options.token_weight = ctx_.config.token_weight;
        options.categories = std::move(categories);
        auto candidates = ctx_.kb.match(mention, options);
        if (candidates.empty()) return std::nullopt;
        return candidates.front().entity_id;
    }

    std::size_t pick(const std::vector<std::size_t>& regions, std::string_view selector) const {
        const auto& d = ctx_.detections;
        auto better = [&](std::size_t a, std::size_t b) {
            const auto& da = d[a];
            const auto& db = d[b];
            if (selector == "largest") {
                if (da.box.area() != db.box.area()) return da.box.area() > db.box.area();
                if (da.confidence != db.confidence) return da.confidence > db.confidence;
            } else if (selector == "most_confident") {
                if (da.confidence != db.confidence) return da.confidence > db.confidence;
                if (da.box.area() != db.box.area()) return da.box.area() > db.box.area();
            } else if (selector == "leftmost") {
                if (da.box.x1 != db.box.x1) return da.box.x1 < db.box.x1;
            } else if (selector == "rightmost") {
                if (da.box.x2 != db.box.x2) return da.box.x2 > db.box.x2;
            }
            return a < b;
        };
        return *std::min_element(regions.begin(), regions.end(), better);
    }

    std::vector<Fragment> entity_text(std::string_view func, const CulturalEntity& e) const {
        std::vector<Fragment> out;
        auto add = [&](const std::string& text, const char* field) {
            if (!text.empty()) out.push_back({text, e.id, field});
        };
        if (func == "describe_architecture") {
            add(e.description, "description");
            add(e.historical_context, "historical_context");
        } else if (func == "explain_cultural_significance") {
            add(e.description, "description");
            add(e.ceremonial_function, "ceremonial_function");
        } else if (func == "compare_regional_variations") {
            for (const auto& v : e.regional_variants) {
                out.push_back({render_template(ctx_.templates.regional_variant, {{"region", v.region}, {"note", v.note}}),
                               e.id, "regional_variants"});
            }
        } else if (func == "describe_history") {
            add(e.historical_context, "historical_context");
        }
        if (out.empty()) add(e.description, "description");
        return out;
    }

    Value call(const std::string& func, const std::vector<const Value*>& args, TraceRecord& record) {
        const auto& d = ctx_.detections;

        if (func == "detect_objects") {
            RegionListValue v;
            for (std::size_t i = 0; i < d.size(); ++i) v.regions.push_back(i);
            record.regions = v.regions;
            return v;
        }
        if (func == "select_region") {
            const auto& list = expect<RegionListValue>(args, 0, func);
            const auto& selector = expect<TextValue>(args, 1, func);
            const auto name = join_text(selector.fragments);
            const auto names = selectors();
            RegionValue v;
            if (!list.regions.empty() && std::find(names.begin(), names.end(), name) != names.end()) {
                v.region = pick(list.regions, name);
                record.regions = {*v.region};
            } else {
                record.unresolved = true;
            }
            return v;
        }
        if (func.starts_with("identify_")) {
            const auto& region = expect<RegionValue>(args, 0, func);
            EntityValue v;
            if (region.region) {
                record.regions = {*region.region};
                v.id = best_match(d[*region.region].label, category_family(func));
                if (v.id) v.regions = {*region.region};
            }
            if (v.id) record.entities = {*v.id};
            else record.unresolved = true;
            return v;
        }
        if (func == "lookup_entity") {
            const auto& mention = expect<TextValue>(args, 0, func);
            EntityValue v;
            if (!mention.unresolved) v.id = best_match(join_text(mention.fragments), {});
            if (v.id) {
                for (std::size_t i = 0; i < d.size(); ++i) {
                    if (best_match(d[i].label, {}) == v.id) v.regions.push_back(i);
                }
                record.entities = {*v.id};
                record.regions = v.regions;
            } else {
                record.unresolved = true;
            }
            return v;
        }
        if (func == "describe_architecture" || func == "explain_cultural_significance" ||
            func == "compare_regional_variations" || func == "describe_history") {
            const auto& entity = expect<EntityValue>(args, 0, func);
            TextValue v;
            if (entity.id) {
                const auto* e = ctx_.kb.find(*entity.id);
                if (e == nullptr) throw InternalError("entity \"" + *entity.id + "\" vanished from the knowledge base");
                v.fragments = entity_text(func, *e);
                record.entities = {*entity.id};
                record.regions = entity.regions;
                record.fragments = v.fragments;
            } else {
                v.unresolved = true;
                record.unresolved = true;
            }
            return v;
        }
        if (func == "compose_answer") {
            AnswerValue v;
            bool unresolved = args.empty();
            for (std::size_t i = 0; i < args.size(); ++i) {
                const auto& t = expect<TextValue>(args, i, func);
                unresolved = unresolved || t.unresolved;
                for (const auto& f : t.fragments) {
                    if (std::find(v.answer.fragments.begin(), v.answer.fragments.end(), f) == v.answer.fragments.end())
                        v.answer.fragments.push_back(f);
                }
            }
            v.answer.uncertain = unresolved || v.answer.fragments.empty();
            v.answer.text = v.answer.fragments.empty() ? ctx_.templates.uncertain_answer : join_text(v.answer.fragments);
            for (const auto& f : v.answer.fragments) {
                if (!f.entity_id.empty() &&
                    std::find(record.entities.begin(), record.entities.end(), f.entity_id) == record.entities.end())
                    record.entities.push_back(f.entity_id);
            }
            record.unresolved = v.answer.uncertain;
            return v;
        }
        throw InternalError("unknown function \"" + func + "\" reached execution");
    }

    const ExecutionContext& ctx_;
    std::map<std::string, Value, std::less<>> values_;
    std::deque<Value> literals_;
};

}  // namespace

ExecutionTrace execute_program(const Program& program, const ExecutionContext& ctx) {
    Interpreter interpreter(ctx);
    return interpreter.run(program);
}

Json to_json(const Fragment& f) {
    return Json{{"text", f.text}, {"entity_id", f.entity_id}, {"field", f.field}};
}

Json to_json(const TraceRecord& r) {
    Json fragments = Json::array();
    for (const auto& f : r.fragments) fragments.push_back(to_json(f));
    return Json{{"kind", "step"},     {"step", r.step},          {"var", r.var},
                {"func", r.func},     {"inputs", r.inputs},      {"output", r.output},
                {"entities", r.entities}, {"regions", r.regions}, {"fragments", fragments},
                {"unresolved", r.unresolved}};
}

Json to_json(const Answer& a) {
    Json fragments = Json::array();
    for (const auto& f : a.fragments) fragments.push_back(to_json(f));
    return Json{{"kind", "answer"}, {"text", a.text}, {"uncertain", a.uncertain}, {"fragments", fragments}};
}

std::string serialize_trace(const ExecutionTrace& trace) {
    std::string out;
    for (const auto& r : trace.records) out += dump_line(to_json(r)) + "\n";
    out += dump_line(to_json(trace.answer)) + "\n";
    return out;
}

}  // namespace cvqa::dsl
