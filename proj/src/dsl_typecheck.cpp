#include <algorithm>
#include <map>
#include <optional>

#include "cvqa/dsl.hpp"

namespace cvqa::dsl {

std::vector<Diagnostic> typecheck_program(const Program& program) {
    std::vector<Diagnostic> out;
    if (program.steps.empty()) {
        out.push_back({0, 0, "program is empty"});
        return out;
    }

    // Variables whose type is unknown (bad function) are absent, which suppresses follow-on errors.
    std::map<std::string, ValueType, std::less<>> types;
    for (std::size_t i = 0; i < program.steps.size(); ++i) {
        const auto& step = program.steps[i];
        auto report = [&](std::string message) { out.push_back({i, step.line, std::move(message)}); };

        const auto* sig = find_function(step.func);
        if (sig == nullptr) {
            report("unknown function \"" + step.func + "\"");
            continue;
        }
        types[step.var] = sig->return_type;

        const std::size_t n = step.args.size();
        if (sig->variadic ? n == 0 : n != sig->param_types.size()) {
            const auto expected = sig->variadic ? std::string("at least 1") : std::to_string(sig->param_types.size());
            report(step.func + " expects " + expected + " argument" +
                   (expected == "1" || sig->variadic ? "" : "s") + ", found " + std::to_string(n));
            continue;
        }

        for (std::size_t a = 0; a < n; ++a) {
            const ValueType expected = sig->variadic ? sig->param_types[0] : sig->param_types[a];
            const auto& arg = step.args[a];
            std::optional<ValueType> found;
            std::string found_name;
            if (const auto* ref = std::get_if<VarRef>(&arg)) {
                auto it = types.find(ref->name);
                if (it == types.end()) continue;  // bound to an unknown function, already reported
                found = it->second;
            } else if (std::holds_alternative<StringLit>(arg)) {
                found = ValueType::text;
            } else {
                found_name = "integer literal";
            }
            if (!found || *found != expected) {
                if (found) found_name = std::string(to_string(*found));
                report("argument " + std::to_string(a + 1) + " of " + step.func + ": expected " +
                       std::string(to_string(expected)) + ", found " + found_name);
                continue;
            }
            if (step.func == "select_region" && a == 1) {
                if (const auto* lit = std::get_if<StringLit>(&arg)) {
                    const auto names = selectors();
                    if (std::find(names.begin(), names.end(), lit->value) == names.end()) {
                        report("unknown selector \"" + lit->value +
                               "\"; expected one of largest, most_confident, leftmost, rightmost");
                    }
                }
            }
        }
    }

    const auto& last = program.steps.back();
    const auto* last_sig = find_function(last.func);
    if (last_sig != nullptr && last_sig->return_type != ValueType::answer) {
        out.push_back({program.steps.size() - 1, last.line, "program must end in Answer"});
    }
    return out;
}

std::string format_diagnostics(std::span<const Diagnostic> diagnostics) {
    std::string out;
    for (const auto& d : diagnostics) {
        out += "line " + std::to_string(d.line) + ": " + d.message + "\n";
    }
    return out;
}

}  // namespace cvqa::dsl
