#include "cvqa/progen.hpp"

#include <sstream>

#include "cvqa/embedded_data.hpp"
#include "cvqa/error.hpp"
#include "cvqa/jsonl.hpp"
#include "cvqa/text.hpp"
#include "http.hpp"

namespace cvqa::progen {

namespace {

constexpr std::array<std::string_view, 4> kQuestionTypes = {"identification", "comparison", "description",
                                                            "explanation"};

std::string signature_line(const dsl::FunctionSignature& f) {
    std::string s = "- " + f.name + "(";
    for (std::size_t i = 0; i < f.param_types.size(); ++i) {
        if (i > 0) s += ", ";
        s += dsl::to_string(f.param_types[i]);
    }
    if (f.variadic) s += ", ...";
    s += ") -> ";
    s += dsl::to_string(f.return_type);
    return s;
}

}  // namespace

std::string_view to_string(QuestionType q) { return kQuestionTypes[static_cast<std::size_t>(q)]; }

std::optional<QuestionType> parse_question_type(std::string_view name) {
    for (std::size_t i = 0; i < kQuestionTypes.size(); ++i) {
        if (kQuestionTypes[i] == name) return static_cast<QuestionType>(i);
    }
    return std::nullopt;
}

std::string_view to_string(GenerationSource s) {
    switch (s) {
        case GenerationSource::backend: return "backend";
        case GenerationSource::backend_repaired: return "backend_repaired";
        case GenerationSource::fallback: return "fallback";
    }
    return "?";
}

std::vector<Exemplar> load_exemplars(std::istream& in) {
    std::vector<Exemplar> out;
    for (const auto& rec : read_json_lines(in)) {
        Exemplar ex;
        ex.question = require_string(rec.value, "question", rec.line);
        ex.program = require_string(rec.value, "program", rec.line);
        const auto qtype = require_string(rec.value, "qtype", rec.line);
        auto parsed = parse_question_type(qtype);
        if (!parsed) throw ValidationError("line " + std::to_string(rec.line) + ": unknown qtype \"" + qtype + "\"");
        ex.qtype = *parsed;
        dsl::Program program;
        try {
            program = dsl::parse_program(ex.program);
        } catch (const dsl::ParseError& e) {
            throw ValidationError("line " + std::to_string(rec.line) + ": exemplar program does not parse: " + e.what());
        }
        if (auto diags = dsl::typecheck_program(program); !diags.empty()) {
            throw ValidationError("line " + std::to_string(rec.line) + ": exemplar program does not typecheck: " +
                                  diags.front().message);
        }
        out.push_back(std::move(ex));
    }
    return out;
}

const std::vector<Exemplar>& bundled_exemplars() {
    static const std::vector<Exemplar> exemplars = [] {
        std::istringstream in{std::string(embedded::exemplars)};
        return load_exemplars(in);
    }();
    return exemplars;
}

std::string build_prompt(std::string_view question, std::span<const Exemplar> exemplars,
                         std::span<const std::string> labels) {
    std::string p;
    p += "Bạn là bộ biên dịch câu hỏi về văn hóa Việt Nam thành chương trình thực thi được.\n";
    p += "Các hàm được phép dùng:\n";
    for (const auto& f : dsl::registry()) p += signature_line(f) + "\n";
    p += "Quy tắc ngữ pháp:\n";
    p += "- Mỗi dòng một lệnh dạng: biến = hàm(đối số, ...)\n";
    p += "- Đối số chỉ là biến đã gán ở dòng trước, chuỗi trong dấu ngoặc kép hoặc số nguyên; không lồng lời gọi hàm.\n";
    p += "- Tên biến bắt đầu bằng chữ thường, chỉ gồm chữ thường, chữ số và dấu gạch dưới.\n";
    p += "- Bộ chọn vùng hợp lệ: \"largest\", \"most_confident\", \"leftmost\", \"rightmost\".\n";
    p += "- Lệnh cuối cùng phải trả về Answer.\n";
    p += "Nếu câu hỏi có nhiều cách hiểu, hãy chọn cách hiểu khớp nhất với các đối tượng được phát hiện "
         "và ngữ cảnh văn hóa Việt Nam, chú ý thành ngữ và tiểu từ tình thái.\n";
    p += "Chỉ trả về chương trình, không giải thích.\n";

    for (std::size_t i = 0; i < exemplars.size(); ++i) {
        const auto& ex = exemplars[i];
        p += "\n### Ví dụ " + std::to_string(i + 1) + " (" + std::string(to_string(ex.qtype)) + ")\n";
        p += "Câu hỏi: " + ex.question + "\n";
        p += "Chương trình:\n" + ex.program;
        if (ex.program.empty() || ex.program.back() != '\n') p += "\n";
    }

    p += "\n### Đối tượng phát hiện\n";
    if (labels.empty()) p += "(không có)\n";
    for (const auto& label : labels) p += "- " + label + "\n";
    p += "\n### Câu hỏi\n";
    p += std::string(question) + "\n";
    p += "\n### Chương trình\n";
    return p;
}

RemoteGenerator::RemoteGenerator(std::string endpoint, std::string api_key, std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)), timeout_(timeout) {}

std::string RemoteGenerator::complete(const std::string& prompt) {
    std::vector<std::pair<std::string, std::string>> headers;
    if (!api_key_.empty()) headers.emplace_back("Authorization", "Bearer " + api_key_);
    const Json request{{"prompt", prompt}};
    const auto fail = [](ServiceError::Kind kind, const std::string& message, int status = 0) {
        return ServiceError(kind, message, status, ServiceError::Service::generator);
    };
    detail::HttpResponse response;
    try {
        response = detail::http_post(endpoint_, "/generate", request.dump(), "application/json", headers, timeout_);
    } catch (const ServiceError& e) {
        throw fail(e.kind(), e.what(), e.status());
    }
    if (response.status < 200 || response.status >= 300)
        throw fail(ServiceError::Kind::status, "generator returned status " + std::to_string(response.status),
                   response.status);
    Json body;
    try {
        body = Json::parse(response.body);
    } catch (const Json::parse_error&) {
        throw fail(ServiceError::Kind::schema, "generator response is not JSON");
    }
    if (!body.is_object() || !body.contains("text") || !body["text"].is_string())
        throw fail(ServiceError::Kind::schema, "generator response lacks a \"text\" string");
    return body["text"].get<std::string>();
}

KeywordTable KeywordTable::parse(std::string_view tsv) {
    KeywordTable table;
    std::istringstream in{std::string(tsv)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) throw FormatError("keyword rows need a tab-separated question type", line_no);
        auto qtype = parse_question_type(line.substr(tab + 1));
        if (!qtype) throw FormatError("unknown question type \"" + line.substr(tab + 1) + "\"", line_no);
        const auto pattern = line.substr(0, tab);
        table.rules_.push_back({text::normalize_text(pattern, false), text::normalize_text(pattern, true), *qtype});
    }
    return table;
}

const KeywordTable& KeywordTable::bundled() {
    static const KeywordTable table = parse(embedded::qtype_keywords);
    return table;
}

QuestionType KeywordTable::classify(std::string_view question) const {
    const auto normalized = text::normalize_text(question, false);
    const auto folded = text::normalize_text(question, true);
    for (const auto& rule : rules_) {
        if (normalized.find(rule.pattern) != std::string::npos) return rule.qtype;
    }
    // Questions typed without diacritics.
    if (normalized == folded) {
        for (const auto& rule : rules_) {
            if (folded.find(rule.folded_pattern) != std::string::npos) return rule.qtype;
        }
    }
    return QuestionType::identification;
}

dsl::Program fallback_generate(std::string_view question, std::span<const std::string> labels,
                               const KnowledgeBase* kb, const KeywordTable& keywords) {
    std::string identify = "identify_object";
    if (kb != nullptr && !labels.empty()) {
        auto candidates = kb->match(labels.front());
        if (!candidates.empty()) {
            switch (kb->get(candidates.front().entity_id).category) {
                case Category::cuisine: identify = "identify_food"; break;
                case Category::architecture:
                case Category::landscapes: identify = "identify_landmark"; break;
                case Category::traditional_clothing: identify = "identify_clothing"; break;
                default: break;
            }
        }
    }
    const bool landmark = identify == "identify_landmark";

    std::string src = "r = detect_objects()\ns = select_region(r, \"largest\")\ne = " + identify + "(s)\n";
    switch (keywords.classify(question)) {
        case QuestionType::identification:
            src += landmark ? "t = describe_architecture(e)\n" : "t = explain_cultural_significance(e)\n";
            src += "a = compose_answer(t)\n";
            break;
        case QuestionType::comparison:
            src += "t = compare_regional_variations(e)\nc = explain_cultural_significance(e)\na = compose_answer(t, c)\n";
            break;
        case QuestionType::description:
            src += landmark ? "t = describe_architecture(e)\n" : "t = describe_history(e)\n";
            src += "a = compose_answer(t)\n";
            break;
        case QuestionType::explanation:
            src += "h = describe_history(e)\nt = explain_cultural_significance(e)\na = compose_answer(h, t)\n";
            break;
    }
    return dsl::parse_program(src);
}

std::string extract_program_text(std::string_view reply) {
    const auto open = reply.find("```");
    if (open == std::string_view::npos) return std::string(reply);
    auto body_start = reply.find('\n', open);
    if (body_start == std::string_view::npos) return {};
    ++body_start;
    const auto close = reply.find("```", body_start);
    return std::string(reply.substr(body_start, close == std::string_view::npos ? std::string_view::npos
                                                                                 : close - body_start));
}

GenerationOutcome generate_program(std::string_view question, std::span<const std::string> labels,
                                   GeneratorBackend* backend, const GenerationOptions& options,
                                   std::span<const Exemplar> exemplars, const KnowledgeBase* kb) {
    GenerationOutcome outcome;
    if (backend != nullptr) {
        const auto base_prompt = build_prompt(question, exemplars, labels);
        std::string prompt = base_prompt;
        for (std::size_t attempt = 0; attempt <= options.max_repairs; ++attempt) {
            std::string reply;
            try {
                reply = backend->complete(prompt);
            } catch (const ServiceError&) {
                ++outcome.attempts;
                if (!options.allow_fallback) throw;
                break;
            }
            ++outcome.attempts;
            const auto program_text = extract_program_text(reply);
            std::string problems;
            try {
                auto program = dsl::parse_program(program_text);
                auto diags = dsl::typecheck_program(program);
                if (diags.empty()) {
                    outcome.program = std::move(program);
                    outcome.source = attempt == 0 ? GenerationSource::backend : GenerationSource::backend_repaired;
                    return outcome;
                }
                problems = dsl::format_diagnostics(diags);
            } catch (const dsl::ParseError& e) {
                problems = std::string(e.what()) + "\n";
            }
            prompt = base_prompt + program_text + "\n\n### Lỗi cần sửa\n" + problems + "\n### Chương trình đã sửa\n";
        }
    }
    outcome.program = fallback_generate(question, labels, kb);
    outcome.source = GenerationSource::fallback;
    return outcome;
}

}  // namespace cvqa::progen
