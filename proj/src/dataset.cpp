#include "cvqa/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>

#include "cvqa/error.hpp"
#include "cvqa/text.hpp"

namespace cvqa::dataset {

namespace {

constexpr std::array<Category, 4> kGrouped = {Category::musical_instruments, Category::folk_arts,
                                              Category::landscapes, Category::miscellaneous};

bool is_grouped(Category c) { return std::find(kGrouped.begin(), kGrouped.end(), c) != kGrouped.end(); }

long long count_tokens(std::string_view s) {
    return static_cast<long long>(text::split_tokens(text::normalize_text(s, false)).size());
}

// Percentages in tenths. When the counts partition the total, largest remainders
// make the rounded values sum to exactly 100.0; otherwise each is rounded half up.
std::vector<int> percent_tenths(const std::vector<long long>& counts, long long total) {
    std::vector<int> out(counts.size(), 0);
    if (total <= 0) return out;
    const long long sum = std::accumulate(counts.begin(), counts.end(), 0LL);
    if (sum != total) {
        for (std::size_t i = 0; i < counts.size(); ++i)
            out[i] = static_cast<int>((counts[i] * 2000 + total) / (2 * total));
        return out;
    }
    std::vector<long long> remainder(counts.size());
    long long assigned = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        out[i] = static_cast<int>(counts[i] * 1000 / total);
        remainder[i] = counts[i] * 1000 % total;
        assigned += out[i];
    }
    std::vector<std::size_t> order(counts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < 1000 && k < order.size(); ++k, ++assigned) ++out[order[k]];
    return out;
}

double round1(double v) { return std::round(v * 10.0) / 10.0; }

std::string thousands(long long v) {
    std::string digits = std::to_string(v < 0 ? -v : v);
    std::string out;
    for (std::size_t i = 0; i < digits.size(); ++i) {
        if (i > 0 && (digits.size() - i) % 3 == 0) out.push_back(',');
        out.push_back(digits[i]);
    }
    return v < 0 ? "-" + out : out;
}

std::string fixed1(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

DatasetStats build_stats(const std::array<long long, kCategoryCount>& counts,
                         const std::array<std::string, kCategoryCount>& complexity, long long total_images,
                         long long total_questions, long long question_tokens, long long answer_tokens) {
    DatasetStats stats;
    stats.total_images = total_images;
    stats.total_questions = total_questions;
    stats.category_sum = std::accumulate(counts.begin(), counts.end(), 0LL);
    if (stats.category_sum != total_images) {
        stats.warnings.push_back("category counts sum to " + thousands(stats.category_sum) +
                                 " but the corpus total is " + thousands(total_images) +
                                 "; percentages use the corpus total");
    }

    std::vector<long long> all(counts.begin(), counts.end());
    const auto pct = percent_tenths(all, total_images);
    for (std::size_t i = 0; i < kCategoryCount; ++i) {
        stats.categories.push_back({std::string(to_string(static_cast<Category>(i))), counts[i], pct[i], complexity[i]});
    }

    std::vector<long long> table_counts;
    std::vector<std::string> names;
    std::vector<std::string> levels;
    long long grouped = 0;
    std::set<std::string> grouped_levels;
    for (std::size_t i = 0; i < kCategoryCount; ++i) {
        const auto c = static_cast<Category>(i);
        if (is_grouped(c)) {
            grouped += counts[i];
            if (!complexity[i].empty()) grouped_levels.insert(complexity[i]);
            continue;
        }
        table_counts.push_back(counts[i]);
        names.emplace_back(to_string(c));
        levels.push_back(complexity[i]);
    }
    table_counts.push_back(grouped);
    names.emplace_back(kGroupedRowName);
    levels.push_back(grouped_levels.size() == 1 ? *grouped_levels.begin() : grouped_levels.empty() ? "" : "Mixed");
    const auto table_pct = percent_tenths(table_counts, total_images);
    for (std::size_t i = 0; i < table_counts.size(); ++i) {
        stats.table_rows.push_back({names[i], table_counts[i], table_pct[i], levels[i]});
    }

    if (total_images > 0) {
        stats.mean_questions_per_image =
            round1(static_cast<double>(total_questions) / static_cast<double>(total_images));
    }
    if (total_questions > 0) {
        stats.mean_question_length =
            round1(static_cast<double>(question_tokens) / static_cast<double>(total_questions));
        stats.mean_answer_length = round1(static_cast<double>(answer_tokens) / static_cast<double>(total_questions));
    }
    return stats;
}

}  // namespace

ManifestLoad load_manifest(std::istream& in, const KnowledgeBase* kb) {
    ManifestLoad result;
    std::set<std::string> seen;
    for (const auto& rec : read_json_lines(in)) {
        const auto& v = rec.value;
        DatasetRecord r;
        r.image_id = require_string(v, "image_id", rec.line);
        if (r.image_id.empty()) throw FormatError("field \"image_id\" must be non-empty", rec.line);
        if (!seen.insert(r.image_id).second)
            throw ValidationError("line " + std::to_string(rec.line) + ": duplicate image_id \"" + r.image_id + "\"");
        r.image_ref = optional_string(v, "image_ref", rec.line);
        const auto category = require_string(v, "category", rec.line);
        auto parsed = parse_category(category);
        if (!parsed) {
            throw ValidationError("line " + std::to_string(rec.line) + ": unknown category \"" + category +
                                  "\" for image \"" + r.image_id + "\"");
        }
        r.category = *parsed;
        r.complexity = optional_string(v, "complexity", rec.line);

        auto qs = v.find("questions");
        if (qs != v.end() && !qs->is_null() && !qs->is_array())
            throw FormatError("field \"questions\" must be a list", rec.line);
        if (qs == v.end() || qs->is_null() || qs->empty())
            throw ValidationError("line " + std::to_string(rec.line) + ": image \"" + r.image_id + "\" has no questions");
        for (const auto& q : *qs) {
            if (!q.is_object()) throw FormatError("each question must be an object", rec.line);
            QuestionRecord question;
            question.question = require_string(q, "question", rec.line);
            question.answer = optional_string(q, "answer", rec.line);
            const auto qtype = require_string(q, "qtype", rec.line);
            auto parsed_qtype = progen::parse_question_type(qtype);
            if (!parsed_qtype)
                throw ValidationError("line " + std::to_string(rec.line) + ": unknown qtype \"" + qtype + "\"");
            question.qtype = *parsed_qtype;
            question.gold_entities = string_list(q, "gold_entities", rec.line, false);
            if (kb != nullptr) {
                for (const auto& id : question.gold_entities) {
                    if (kb->find(id) == nullptr) {
                        result.warnings.push_back("line " + std::to_string(rec.line) + ": image \"" + r.image_id +
                                                  "\" names unknown gold entity \"" + id + "\"");
                    }
                }
            }
            r.questions.push_back(std::move(question));
        }
        result.records.push_back(std::move(r));
    }
    return result;
}

ManifestLoad load_manifest_file(const std::string& path, const KnowledgeBase* kb) {
    std::ifstream in(path);
    if (!in) throw IoError("manifest file", path);
    return load_manifest(in, kb);
}

Json to_json(const DatasetRecord& r) {
    Json questions = Json::array();
    for (const auto& q : r.questions) {
        questions.push_back(Json{{"question", q.question},
                                 {"answer", q.answer},
                                 {"qtype", std::string(progen::to_string(q.qtype))},
                                 {"gold_entities", q.gold_entities}});
    }
    Json out{{"image_id", r.image_id}, {"image_ref", r.image_ref}, {"category", std::string(to_string(r.category))}};
    if (!r.complexity.empty()) out["complexity"] = r.complexity;
    out["questions"] = questions;
    return out;
}

std::string serialize_manifest(std::span<const DatasetRecord> records) {
    std::string out;
    for (const auto& r : records) out += dump_line(to_json(r)) + "\n";
    return out;
}

bool is_counts_manifest(std::istream& in) {
    const auto start = in.tellg();
    std::string line;
    bool counts = false;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            auto v = Json::parse(line);
            counts = v.is_object() && v.contains("kind");
        } catch (const Json::parse_error&) {
        }
        break;
    }
    in.clear();
    in.seekg(start);
    return counts;
}

CountsManifest load_counts_manifest(std::istream& in) {
    CountsManifest m;
    bool have_totals = false;
    std::set<Category> seen;
    for (const auto& rec : read_json_lines(in)) {
        const auto kind = require_string(rec.value, "kind", rec.line);
        if (kind == "totals") {
            m.total_images = require_integer(rec.value, "images", rec.line);
            m.total_questions = require_integer(rec.value, "questions", rec.line);
            m.question_tokens = rec.value.contains("question_tokens") ? require_integer(rec.value, "question_tokens", rec.line) : 0;
            m.answer_tokens = rec.value.contains("answer_tokens") ? require_integer(rec.value, "answer_tokens", rec.line) : 0;
            have_totals = true;
        } else if (kind == "category") {
            const auto name = require_string(rec.value, "category", rec.line);
            auto c = parse_category(name);
            if (!c) throw ValidationError("line " + std::to_string(rec.line) + ": unknown category \"" + name + "\"");
            if (!seen.insert(*c).second)
                throw ValidationError("line " + std::to_string(rec.line) + ": category \"" + name + "\" listed twice");
            const auto count = require_integer(rec.value, "count", rec.line);
            if (count < 0) throw ValidationError("line " + std::to_string(rec.line) + ": negative count");
            m.counts[static_cast<std::size_t>(*c)] = count;
            m.complexity[static_cast<std::size_t>(*c)] = optional_string(rec.value, "complexity", rec.line);
        } else {
            throw FormatError("unknown record kind \"" + kind + "\"", rec.line);
        }
    }
    if (!have_totals) {
        m.total_images = std::accumulate(m.counts.begin(), m.counts.end(), 0LL);
    }
    if (m.total_images <= 0) throw ValidationError("counts manifest describes no images");
    return m;
}

std::span<const Category> grouped_categories() { return kGrouped; }

DatasetStats compute_stats(std::span<const DatasetRecord> records) {
    if (records.empty()) throw ValidationError("cannot compute statistics of an empty manifest");
    std::array<long long, kCategoryCount> counts{};
    std::array<std::string, kCategoryCount> complexity{};
    long long questions = 0;
    long long question_tokens = 0;
    long long answer_tokens = 0;
    for (const auto& r : records) {
        const auto idx = static_cast<std::size_t>(r.category);
        ++counts[idx];
        // Smallest non-empty label, so the result does not depend on record order.
        if (!r.complexity.empty() && (complexity[idx].empty() || r.complexity < complexity[idx]))
            complexity[idx] = r.complexity;
        for (const auto& q : r.questions) {
            ++questions;
            question_tokens += count_tokens(q.question);
            answer_tokens += count_tokens(q.answer);
        }
    }
    return build_stats(counts, complexity, static_cast<long long>(records.size()), questions, question_tokens,
                       answer_tokens);
}

DatasetStats compute_stats(const CountsManifest& m) {
    return build_stats(m.counts, m.complexity, m.total_images, m.total_questions, m.question_tokens, m.answer_tokens);
}

std::string format_percent(int tenths) {
    return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10) + "%";
}

std::string format_stats_table(const DatasetStats& stats) {
    std::vector<std::vector<std::string>> rows;
    rows.push_back({"Cultural Category", "Sample Count", "Percentage", "Complexity Level"});
    for (const auto& r : stats.table_rows) rows.push_back({r.name, thousands(r.count), format_percent(r.percent_tenths), r.complexity});
    rows.push_back({"Total", thousands(stats.total_images), "100.0%", ""});

    std::array<std::size_t, 4> width{};
    auto display_width = [](const std::string& s) { return text::decode_utf8(s).size(); };
    for (const auto& row : rows)
        for (std::size_t c = 0; c < 4; ++c) width[c] = std::max(width[c], display_width(row[c]));

    std::string out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::string line;
        for (std::size_t c = 0; c < 4; ++c) {
            if (c > 0) line += " | ";
            line += rows[i][c];
            if (c < 3) line.append(width[c] - display_width(rows[i][c]), ' ');
        }
        while (!line.empty() && line.back() == ' ') line.pop_back();
        out += line + "\n";
        if (i == 0 || i + 2 == rows.size()) {
            std::string rule;
            for (std::size_t c = 0; c < 4; ++c) {
                if (c > 0) rule += "-+-";
                rule.append(width[c], '-');
            }
            out += rule + "\n";
        }
    }
    out += "\nImages: " + thousands(stats.total_images) + "\n";
    out += "Questions: " + thousands(stats.total_questions) + "\n";
    out += "Questions per image: " + fixed1(stats.mean_questions_per_image) + "\n";
    out += "Mean question length (tokens): " + fixed1(stats.mean_question_length) + "\n";
    out += "Mean answer length (tokens): " + fixed1(stats.mean_answer_length) + "\n";
    for (const auto& w : stats.warnings) out += "warning: " + w + "\n";
    return out;
}

Json to_json(const DatasetStats& stats) {
    auto rows_json = [](const std::vector<CategoryRow>& rows) {
        Json arr = Json::array();
        for (const auto& r : rows) {
            arr.push_back(Json{{"name", r.name},
                               {"count", r.count},
                               {"percentage", format_percent(r.percent_tenths)},
                               {"complexity", r.complexity}});
        }
        return arr;
    };
    return Json{{"kind", "dataset_stats"},
                {"total_images", stats.total_images},
                {"total_questions", stats.total_questions},
                {"category_sum", stats.category_sum},
                {"mean_questions_per_image", stats.mean_questions_per_image},
                {"mean_question_length", stats.mean_question_length},
                {"mean_answer_length", stats.mean_answer_length},
                {"categories", rows_json(stats.categories)},
                {"table_rows", rows_json(stats.table_rows)},
                {"warnings", stats.warnings}};
}

}  // namespace cvqa::dataset
