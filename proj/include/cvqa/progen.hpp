#pragma once

#include <chrono>
#include <istream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cvqa/dsl.hpp"
#include "cvqa/kb.hpp"

namespace cvqa::progen {

enum class QuestionType { identification, comparison, description, explanation };

std::string_view to_string(QuestionType q);
std::optional<QuestionType> parse_question_type(std::string_view name);

struct Exemplar {
    std::string question;
    std::string program;
    QuestionType qtype = QuestionType::identification;

    bool operator==(const Exemplar&) const = default;
};

/// Reads line-delimited {question, qtype, program} records; every program must
/// parse and typecheck.
std::vector<Exemplar> load_exemplars(std::istream& in);
const std::vector<Exemplar>& bundled_exemplars();

/// Few-shot prompt: instruction header (function registry, grammar rules,
/// disambiguation instruction), every exemplar in order, detected labels, question.
std::string build_prompt(std::string_view question, std::span<const Exemplar> exemplars,
                         std::span<const std::string> labels);

/// A text-generation service: prompt in, program text out. Implementations must be
/// safe to call from several threads.
class GeneratorBackend {
public:
    virtual ~GeneratorBackend() = default;
    virtual std::string complete(const std::string& prompt) = 0;
};

/// Client for a remote generator: POSTs {"prompt": ...} to `<endpoint>/generate`
/// and reads {"text": ...}. An API key, when given, is sent as a bearer token.
class RemoteGenerator : public GeneratorBackend {
public:
    RemoteGenerator(std::string endpoint, std::string api_key = {},
                    std::chrono::milliseconds timeout = std::chrono::seconds(60));
    std::string complete(const std::string& prompt) override;

private:
    std::string endpoint_;
    std::string api_key_;
    std::chrono::milliseconds timeout_;
};

/// Ordered keyword patterns mapping question text to a question type.
class KeywordTable {
public:
    static KeywordTable parse(std::string_view tsv);
    static const KeywordTable& bundled();

    /// First pattern contained in the question wins; identification otherwise.
    QuestionType classify(std::string_view question) const;

private:
    struct Rule {
        std::string pattern;         // normalized
        std::string folded_pattern;  // diacritic-folded
        QuestionType qtype;
    };
    std::vector<Rule> rules_;
};

/// Deterministic template program for `question`. The first label is taken as the
/// primary region; its knowledge-base category (when `kb` is given) picks the
/// identify_* function.
dsl::Program fallback_generate(std::string_view question, std::span<const std::string> labels,
                               const KnowledgeBase* kb = nullptr,
                               const KeywordTable& keywords = KeywordTable::bundled());

enum class GenerationSource { backend, backend_repaired, fallback };

std::string_view to_string(GenerationSource s);

struct GenerationOutcome {
    dsl::Program program;
    GenerationSource source = GenerationSource::fallback;
    std::size_t attempts = 0;  // backend calls made
};

struct GenerationOptions {
    std::size_t max_repairs = 2;
    bool allow_fallback = true;
};

/// Extracts program text from a backend reply (code fences are stripped).
std::string extract_program_text(std::string_view reply);

/// Backend generation with parse/typecheck repair retries, then the fallback.
/// With `backend == nullptr` the fallback is used directly. Transport errors
/// propagate only when the fallback is disabled.
GenerationOutcome generate_program(std::string_view question, std::span<const std::string> labels,
                                   GeneratorBackend* backend, const GenerationOptions& options = {},
                                   std::span<const Exemplar> exemplars = bundled_exemplars(),
                                   const KnowledgeBase* kb = nullptr);

}  // namespace cvqa::progen
