#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cvqa/error.hpp"
#include "cvqa/jsonl.hpp"
#include "cvqa/kb.hpp"
#include "cvqa/perception.hpp"
#include "cvqa/templates.hpp"

namespace cvqa::dsl {

enum class ValueType { region_list, region, entity, text, answer };

std::string_view to_string(ValueType t);

struct FunctionSignature {
    std::string name;
    std::vector<ValueType> param_types;
    ValueType return_type;
    bool variadic = false;  // the single parameter type repeats, at least once

    bool operator==(const FunctionSignature&) const = default;
};

/// The closed function registry, in a fixed order.
std::span<const FunctionSignature> registry();
const FunctionSignature* find_function(std::string_view name);

/// Region selectors accepted by select_region.
std::span<const std::string_view> selectors();

// ---------------------------------------------------------------------------
// Syntax

struct VarRef {
    std::string name;
    bool operator==(const VarRef&) const = default;
};

struct StringLit {
    std::string value;
    bool operator==(const StringLit&) const = default;
};

struct IntLit {
    long long value = 0;
    bool operator==(const IntLit&) const = default;
};

using Arg = std::variant<VarRef, StringLit, IntLit>;

struct Step {
    std::string var;
    std::string func;
    std::vector<Arg> args;
    std::size_t line = 0;  // source line, diagnostics only

    /// Source positions are not part of a step's identity.
    bool operator==(const Step& other) const {
        return var == other.var && func == other.func && args == other.args;
    }
};

struct Program {
    std::vector<Step> steps;
    bool operator==(const Program&) const = default;
};

class ParseError : public FormatError {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column)
        : FormatError("column " + std::to_string(column) + ": " + message, line), column_(column) {}

    std::size_t column() const noexcept { return column_; }

private:
    std::size_t column_;
};

/// Grammar: one `var = func(arg, ...)` per line; arguments are variables,
/// double-quoted strings or integers; `#` starts a comment.
Program parse_program(std::string_view source);

/// Canonical text; parse_program(format_program(p)) == p.
std::string format_program(const Program& program);

struct Diagnostic {
    std::size_t step = 0;
    std::size_t line = 0;
    std::string message;

    bool operator==(const Diagnostic&) const = default;
};

/// Empty when the program is well typed and ends in an Answer.
std::vector<Diagnostic> typecheck_program(const Program& program);
std::string format_diagnostics(std::span<const Diagnostic> diagnostics);

// ---------------------------------------------------------------------------
// Execution

/// A piece of generated text and the knowledge-base field it was rendered from.
/// `entity_id` is empty for literal text.
struct Fragment {
    std::string text;
    std::string entity_id;
    std::string field;

    bool operator==(const Fragment&) const = default;
};

struct Answer {
    std::string text;
    bool uncertain = false;
    std::vector<Fragment> fragments;

    bool operator==(const Answer&) const = default;
};

struct TraceRecord {
    std::size_t step = 0;
    std::string var;
    std::string func;
    std::vector<std::string> inputs;
    std::string output;
    std::vector<std::string> entities;  // KB ids touched
    std::vector<std::size_t> regions;   // indices into the detection list
    std::vector<Fragment> fragments;    // text produced by this step
    bool unresolved = false;

    bool operator==(const TraceRecord&) const = default;
};

struct ExecutionTrace {
    std::vector<TraceRecord> records;
    Answer answer;

    bool operator==(const ExecutionTrace&) const = default;
};

struct ExecutionConfig {
    double match_threshold = 0.75;
    double edit_weight = 0.6;
    double token_weight = 0.4;
};

struct ExecutionContext {
    std::span<const Detection> detections;
    const KnowledgeBase& kb;
    std::string question;
    ExecutionConfig config;
    const Templates& templates = Templates::bundled();
};

/// Thrown when execution meets a program that should have failed typechecking.
class InternalError : public Error {
public:
    using Error::Error;
};

/// Evaluates the steps in order. Unresolvable regions or entities do not abort:
/// the step is recorded as unresolved and the answer is flagged uncertain.
ExecutionTrace execute_program(const Program& program, const ExecutionContext& ctx);

/// Categories an identify_* function may link to; empty means any.
std::vector<Category> category_family(std::string_view func);

Json to_json(const TraceRecord& record);
Json to_json(const Answer& answer);
Json to_json(const Fragment& fragment);
/// One JSON line per record, then one for the answer.
std::string serialize_trace(const ExecutionTrace& trace);

}  // namespace cvqa::dsl
