#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "cvqa/error.hpp"
#include "cvqa/evalkit.hpp"
#include "cvqa/text.hpp"

namespace cvqa::evalkit {

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts ngrams(const Tokens& tokens, std::size_t n) {
    NgramCounts counts;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                          tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
    }
    return counts;
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
    std::vector<std::size_t> row(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = 0;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = a[i - 1] == b[j - 1] ? diag + 1 : std::max(row[j], row[j - 1]);
            diag = up;
        }
    }
    return row[b.size()];
}

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

}  // namespace

Tokens tokenize(std::string_view text) { return text::split_tokens(text::normalize_text(text, false)); }

BleuScore bleu4(const Tokens& candidate, std::span<const Tokens> references) {
    const bool any_reference =
        std::any_of(references.begin(), references.end(), [](const Tokens& r) { return !r.empty(); });
    if (candidate.empty() || !any_reference) return {0.0, true};

    double log_sum = 0.0;
    for (std::size_t n = 1; n <= 4; ++n) {
        const auto cand = ngrams(candidate, n);
        NgramCounts max_ref;
        for (const auto& ref : references) {
            for (const auto& [gram, count] : ngrams(ref, n)) max_ref[gram] = std::max(max_ref[gram], count);
        }
        std::size_t matched = 0;
        std::size_t total = 0;
        for (const auto& [gram, count] : cand) {
            total += count;
            auto it = max_ref.find(gram);
            if (it != max_ref.end()) matched += std::min(count, it->second);
        }
        double numerator = static_cast<double>(matched);
        double denominator = static_cast<double>(total);
        if (matched == 0) {
            if (n == 1) return {0.0, false};
            numerator += 1.0;
            denominator += 1.0;
        }
        log_sum += std::log(numerator / denominator);
    }

    const auto c = candidate.size();
    std::size_t r = 0;
    std::size_t best_gap = SIZE_MAX;
    for (const auto& ref : references) {
        const std::size_t gap = ref.size() > c ? ref.size() - c : c - ref.size();
        if (gap < best_gap || (gap == best_gap && ref.size() < r)) {
            best_gap = gap;
            r = ref.size();
        }
    }
    const double bp = c > r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
    return {bp * std::exp(log_sum / 4.0), false};
}

double rouge_l(const Tokens& candidate, const Tokens& reference, double beta) {
    if (candidate.empty() || reference.empty()) return 0.0;
    const auto lcs = static_cast<double>(lcs_length(candidate, reference));
    if (lcs == 0.0) return 0.0;
    const double p = lcs / static_cast<double>(candidate.size());
    const double r = lcs / static_cast<double>(reference.size());
    const double b2 = beta * beta;
    return (1.0 + b2) * p * r / (r + b2 * p);
}

double meteor_lite(const Tokens& candidate, const Tokens& reference) {
    if (candidate.empty() || reference.empty()) return 0.0;
    // Each candidate token takes the first unused identical reference token.
    std::vector<bool> used(reference.size(), false);
    std::vector<std::ptrdiff_t> aligned(candidate.size(), -1);
    std::size_t matches = 0;
    for (std::size_t i = 0; i < candidate.size(); ++i) {
        for (std::size_t j = 0; j < reference.size(); ++j) {
            if (!used[j] && reference[j] == candidate[i]) {
                used[j] = true;
                aligned[i] = static_cast<std::ptrdiff_t>(j);
                ++matches;
                break;
            }
        }
    }
    if (matches == 0) return 0.0;

    std::size_t chunks = 0;
    for (std::size_t i = 0; i < candidate.size(); ++i) {
        if (aligned[i] < 0) continue;
        const bool continues = i > 0 && aligned[i - 1] >= 0 && aligned[i] == aligned[i - 1] + 1;
        if (!continues) ++chunks;
    }

    const double m = static_cast<double>(matches);
    const double p = m / static_cast<double>(candidate.size());
    const double r = m / static_cast<double>(reference.size());
    const double f = 10.0 * p * r / (r + 9.0 * p);
    const double penalty = 0.5 * std::pow(static_cast<double>(chunks) / m, 3.0);
    return std::clamp(f * (1.0 - penalty), 0.0, 1.0);
}

double cultural_accuracy(const std::optional<std::string>& predicted, std::span<const std::string> gold) {
    if (!predicted) return 0.0;
    return std::find(gold.begin(), gold.end(), *predicted) != gold.end() ? 1.0 : 0.0;
}

double explanation_quality(const explain::Explanation& e, const explain::ConsistencyReport& report,
                           const QualityWeights& weights) {
    const auto& checks = report.checks;
    const double passing =
        checks.empty() ? 0.0
                       : static_cast<double>(std::count_if(checks.begin(), checks.end(),
                                                           [](const explain::Check& c) { return c.pass; })) /
                             static_cast<double>(checks.size());
    const double linked =
        e.evidence.empty() ? 0.0
                           : static_cast<double>(std::count_if(e.evidence.begin(), e.evidence.end(),
                                                               [](const explain::EvidenceItem& i) {
                                                                   return i.entity_id.has_value();
                                                               })) /
                                 static_cast<double>(e.evidence.size());
    const bool complete = !e.uncertain && !e.identification.empty() && !e.cultural_context.empty() &&
                          report.passed(explain::CheckId::section_complete);
    const double score = weights.consistency * passing + weights.linked_evidence * linked +
                         weights.complete * (complete ? 1.0 : 0.0);
    return std::clamp(score, 0.0, 1.0);
}

double cohen_kappa(std::span<const std::string> labels_a, std::span<const std::string> labels_b) {
    if (labels_a.size() != labels_b.size())
        throw ValidationError("label lists differ in length (" + std::to_string(labels_a.size()) + " vs " +
                              std::to_string(labels_b.size()) + ")");
    if (labels_a.empty()) throw ValidationError("label lists are empty");
    const double n = static_cast<double>(labels_a.size());
    std::map<std::string, std::pair<std::size_t, std::size_t>> marginals;
    std::size_t agree = 0;
    for (std::size_t i = 0; i < labels_a.size(); ++i) {
        ++marginals[labels_a[i]].first;
        ++marginals[labels_b[i]].second;
        if (labels_a[i] == labels_b[i]) ++agree;
    }
    const double p_o = static_cast<double>(agree) / n;
    double p_e = 0.0;
    for (const auto& [label, counts] : marginals) {
        p_e += (static_cast<double>(counts.first) / n) * (static_cast<double>(counts.second) / n);
    }
    if (p_e >= 1.0) return 1.0;
    return (p_o - p_e) / (1.0 - p_e);
}

std::string_view to_string(AblationConfig c) {
    switch (c) {
        case AblationConfig::full: return "full";
        case AblationConfig::no_kb: return "no_kb";
        case AblationConfig::no_visual: return "no_visual";
        case AblationConfig::no_program: return "no_program";
    }
    return "?";
}

std::optional<AblationConfig> parse_ablation_config(std::string_view name) {
    for (auto c : {AblationConfig::full, AblationConfig::no_kb, AblationConfig::no_visual, AblationConfig::no_program}) {
        if (to_string(c) == name) return c;
    }
    return std::nullopt;
}

MetricAggregate aggregate(std::span<const MetricRow> rows) {
    MetricAggregate agg;
    if (rows.empty()) return agg;
    for (const auto& r : rows) {
        agg.bleu4 += r.bleu4;
        agg.rouge_l += r.rouge_l;
        agg.meteor_lite += r.meteor_lite;
        agg.cultural_accuracy += r.cultural_accuracy;
        agg.explanation_quality += r.explanation_quality;
    }
    const double n = static_cast<double>(rows.size());
    agg.bleu4 /= n;
    agg.rouge_l /= n;
    agg.meteor_lite /= n;
    agg.cultural_accuracy /= n;
    agg.explanation_quality /= n;
    return agg;
}

MetricReport make_report(std::vector<MetricRow> rows, AblationConfig config) {
    MetricReport report;
    report.aggregate = aggregate(rows);
    report.n = rows.size();
    report.failures = static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const MetricRow& r) { return !r.error.empty(); }));
    report.per_item = std::move(rows);
    report.config = config;
    return report;
}

std::string report_to_jsonl(const MetricReport& report) {
    std::string out;
    const std::string config(to_string(report.config));
    for (const auto& r : report.per_item) {
        Json line{{"kind", "item"},
                  {"config", config},
                  {"item_id", r.item_id},
                  {"bleu4", r.bleu4},
                  {"rouge_l", r.rouge_l},
                  {"meteor_lite", r.meteor_lite},
                  {"cultural_accuracy", r.cultural_accuracy},
                  {"explanation_quality", r.explanation_quality}};
        if (!r.error.empty()) line["error"] = r.error;
        out += dump_line(line) + "\n";
    }
    const auto& a = report.aggregate;
    out += dump_line(Json{{"kind", "summary"},
                          {"config", config},
                          {"n", report.n},
                          {"failures", report.failures},
                          {"aggregate",
                           Json{{"bleu4", a.bleu4},
                                {"rouge_l", a.rouge_l},
                                {"meteor_lite", a.meteor_lite},
                                {"cultural_accuracy", a.cultural_accuracy},
                                {"explanation_quality", a.explanation_quality}}}}) +
           "\n";
    return out;
}

std::string report_table(std::span<const MetricReport> reports) {
    const std::vector<std::string> header = {"Method/config", "BLEU-4", "Cultural Accuracy", "Explanation Quality"};
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : reports) {
        rows.push_back({std::string(to_string(r.config)), fixed3(r.aggregate.bleu4),
                        fixed3(r.aggregate.cultural_accuracy), fixed3(r.aggregate.explanation_quality)});
    }
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        width[c] = header[c].size();
        for (const auto& row : rows) width[c] = std::max(width[c], row[c].size());
    }
    auto emit = [&](const std::vector<std::string>& cells) {
        std::string line;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c > 0) line += " | ";
            line += cells[c];
            if (c + 1 < cells.size()) line.append(width[c] - cells[c].size(), ' ');
        }
        return line + "\n";
    };
    std::string out = emit(header);
    std::string rule;
    for (std::size_t c = 0; c < width.size(); ++c) {
        if (c > 0) rule += "-+-";
        rule.append(width[c], '-');
    }
    out += rule + "\n";
    for (const auto& row : rows) out += emit(row);
    return out;
}

}  // namespace cvqa::evalkit
