#include "cvqa/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "cvqa/dataset.hpp"
#include "cvqa/error.hpp"
#include "cvqa/evalkit.hpp"
#include "cvqa/explain.hpp"
#include "cvqa/kb.hpp"
#include "cvqa/pipeline.hpp"

namespace cvqa {

namespace {

const std::string kDataDir = CVQA_DATA_DIR;

struct Options {
    std::string kb = kDataDir + "/starter_kb.jsonl";
    std::string detections;
    std::string detector_url;
    std::string generator = "fallback";
    std::string generator_url;
    std::string exemplars;
    double threshold = 0.75;
    std::size_t k = 3;
    std::vector<std::string> configs;
    std::string format = "human";
    std::string out;
    unsigned long long seed = 0;
    bool no_fallback = false;
    int threads = 0;

    std::string image_id;
    std::string question;
    std::string svg;
    int width = 640;
    int height = 480;
    std::string manifest = kDataDir + "/manifests/sample.jsonl";
    std::size_t sample = 0;
    std::vector<std::string> kappa;
    std::string mention;
    std::string dataset_path;
};

bool json_lines(const Options& o) { return o.format == "json-lines"; }

PipelineConfig pipeline_config(const Options& o, evalkit::AblationConfig ablation) {
    PipelineConfig c;
    c.kb_path = o.kb;
    c.detector_url = o.detector_url;
    c.detections_path = o.detector_url.empty() && o.detections.empty() ? kDataDir + "/fixtures/detections.jsonl" : o.detections;
    c.generator = o.generator == "remote" ? GeneratorKind::remote : GeneratorKind::fallback;
    c.generator_url = o.generator_url;
    if (const char* key = std::getenv("CVQA_GENERATOR_API_KEY")) c.generator_api_key = key;
    c.exemplars_path = o.exemplars;
    c.threshold = o.threshold;
    c.k = o.k;
    c.ablation = ablation;
    c.format = json_lines(o) ? OutputFormat::json_lines : OutputFormat::human;
    c.allow_fallback = !o.no_fallback;
    return c;
}

evalkit::AblationConfig single_config(const Options& o) {
    if (o.configs.empty()) return evalkit::AblationConfig::full;
    if (o.configs.size() > 1) throw CLI::ValidationError("--config", "only one configuration is accepted here");
    return *evalkit::parse_ablation_config(o.configs.front());
}

std::string run_answer_cmd(const Options& o, bool with_overlay) {
    Pipeline pipeline(pipeline_config(o, single_config(o)));
    const auto result = pipeline.answer(o.image_id, o.question);
    std::string text = json_lines(o) ? answer_to_jsonl(result) : answer_to_text(result);
    if (!with_overlay) return text;

    const auto svg = explain::render_overlay_svg(result.explanation, o.width, o.height);
    if (!o.svg.empty()) {
        std::ofstream file(o.svg, std::ios::binary);
        if (!file) throw IoError("overlay output", o.svg);
        file << svg;
    } else if (json_lines(o)) {
        text += dump_line(Json{{"kind", "overlay"}, {"svg", svg}}) + "\n";
    } else {
        text += "\n" + svg;
    }
    return text;
}

std::vector<EvalItem> load_items(const Options& o, const KnowledgeBase& kb, std::vector<std::string>& warnings) {
    auto manifest = dataset::load_manifest_file(o.manifest, &kb);
    warnings = std::move(manifest.warnings);
    auto items = eval_items(manifest.records);
    if (o.sample > 0 && o.sample < items.size()) {
        std::vector<EvalItem> picked;
        std::mt19937_64 rng(o.seed);
        std::sample(items.begin(), items.end(), std::back_inserter(picked), o.sample, rng);
        items = std::move(picked);
    }
    return items;
}

std::vector<std::string> read_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("label file", path);
    std::vector<std::string> labels;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty()) labels.push_back(line);
    }
    return labels;
}

std::string run_eval_cmd(const Options& o, bool ablate, std::ostream& err) {
    if (!o.kappa.empty()) {
        const auto a = read_labels(o.kappa[0]);
        const auto b = read_labels(o.kappa[1]);
        const double kappa = evalkit::cohen_kappa(a, b);
        if (json_lines(o)) return dump_line(Json{{"kind", "kappa"}, {"n", a.size()}, {"kappa", kappa}}) + "\n";
        char buf[64];
        std::snprintf(buf, sizeof buf, "kappa = %.3f (n = %zu)\n", kappa, a.size());
        return buf;
    }

    std::vector<evalkit::AblationConfig> configs;
    if (ablate && o.configs.empty()) {
        configs = {evalkit::AblationConfig::full, evalkit::AblationConfig::no_kb, evalkit::AblationConfig::no_visual,
                   evalkit::AblationConfig::no_program};
    } else if (ablate) {
        for (const auto& name : o.configs) configs.push_back(*evalkit::parse_ablation_config(name));
    } else {
        configs = {single_config(o)};
    }

    Pipeline pipeline(pipeline_config(o, configs.front()));
    std::vector<std::string> warnings;
    const auto items = load_items(o, pipeline.kb(), warnings);
    for (const auto& w : warnings) err << "warning: " << w << "\n";

    std::vector<evalkit::MetricReport> reports;
    for (auto config : configs) reports.push_back(run_ablation(pipeline, items, config));

    std::string text;
    if (json_lines(o)) {
        for (const auto& r : reports) text += evalkit::report_to_jsonl(r);
        return text;
    }
    text = evalkit::report_table(reports);
    for (const auto& r : reports) {
        if (r.failures > 0) {
            text += std::string(evalkit::to_string(r.config)) + ": " + std::to_string(r.failures) + " of " +
                    std::to_string(r.n) + " items failed\n";
        }
    }
    return text;
}

std::string run_kb_lookup(const Options& o) {
    const auto kb = KnowledgeBase::load_file(o.kb);
    const auto matches = match_entity(o.mention, kb, o.threshold);
    std::string text;
    if (json_lines(o)) {
        for (const auto& m : matches) {
            auto line = to_json(m);
            line["canonical_name"] = kb.get(m.entity_id).canonical_name;
            text += dump_line(line) + "\n";
        }
        return text;
    }
    if (matches.empty()) return "no entity matches \"" + o.mention + "\"\n";
    for (const auto& m : matches) {
        const auto& e = kb.get(m.entity_id);
        char score[32];
        std::snprintf(score, sizeof score, "%.3f", m.score);
        text += m.entity_id + "\t" + e.canonical_name + "\t" + std::string(to_string(e.category)) + "\t" + score +
                "\t" + std::string(to_string(m.method)) + "\n";
    }
    return text;
}

std::string run_dataset_stats(const Options& o) {
    std::ifstream in(o.dataset_path);
    if (!in) throw IoError("manifest file", o.dataset_path);
    dataset::DatasetStats stats;
    if (dataset::is_counts_manifest(in)) {
        stats = dataset::compute_stats(dataset::load_counts_manifest(in));
    } else {
        const auto manifest = dataset::load_manifest(in);
        stats = dataset::compute_stats(manifest.records);
        stats.warnings.insert(stats.warnings.end(), manifest.warnings.begin(), manifest.warnings.end());
    }
    return json_lines(o) ? dump_line(dataset::to_json(stats)) + "\n" : dataset::format_stats_table(stats);
}

std::string run_dataset_validate(const Options& o, std::ostream& err) {
    const auto kb = KnowledgeBase::load_file(o.kb);
    const auto manifest = dataset::load_manifest_file(o.dataset_path, &kb);
    std::size_t questions = 0;
    for (const auto& r : manifest.records) questions += r.questions.size();
    for (const auto& w : manifest.warnings) err << "warning: " << w << "\n";
    if (json_lines(o)) {
        return dump_line(Json{{"kind", "validation"},
                              {"records", manifest.records.size()},
                              {"questions", questions},
                              {"warnings", manifest.warnings}}) +
               "\n";
    }
    return "ok: " + std::to_string(manifest.records.size()) + " records, " + std::to_string(questions) +
           " questions, " + std::to_string(manifest.warnings.size()) + " warnings\n";
}

void add_pipeline_options(CLI::App* cmd, Options& o) {
    cmd->add_option("--detections", o.detections, "Detection fixture file (JSON lines)");
    cmd->add_option("--detector-url", o.detector_url, "Remote detector base URL");
    cmd->add_option("--generator", o.generator, "Program generator backend")
        ->check(CLI::IsMember({"fallback", "remote"}));
    cmd->add_option("--generator-url", o.generator_url, "Remote generator base URL");
    cmd->add_option("--exemplars", o.exemplars, "Few-shot exemplar file (JSON lines)");
    cmd->add_option("--k", o.k, "Number of evidence regions");
    cmd->add_flag("--no-fallback", o.no_fallback, "Fail instead of using the rule-based generator");
}

void add_config_option(CLI::App* cmd, Options& o, bool many) {
    auto* opt = cmd->add_option("--config", o.configs, "Ablation configuration")
                    ->check(CLI::IsMember({"full", "no_kb", "no_visual", "no_program"}));
    if (!many) opt->expected(1);
}

int error_code(const std::exception& e) {
    if (dynamic_cast<const IoError*>(&e)) return kExitIo;
    if (auto* s = dynamic_cast<const ServiceError*>(&e))
        return s->service() == ServiceError::Service::generator ? kExitGenerator : kExitDetector;
    if (dynamic_cast<const NotFoundError*>(&e)) return kExitNotFound;
    if (dynamic_cast<const FormatError*>(&e) || dynamic_cast<const ValidationError*>(&e)) return kExitData;
    return kExitInternal;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Culturally grounded visual question answering over Vietnamese cultural knowledge.", "cvqa"};
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--kb", o.kb, "Knowledge base file (JSON lines)");
    app.add_option("--threshold", o.threshold, "Entity match threshold")->check(CLI::Range(0.0, 1.0));
    app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"human", "json-lines"}));
    app.add_option("--out", o.out, "Write output to this file instead of stdout");
    app.add_option("--seed", o.seed, "Seed for item sampling");
    app.add_option("--threads", o.threads, "Worker threads for eval/ablate (0: runtime default)");

    auto* answer = app.add_subcommand("answer", "Answer a question about one image");
    answer->add_option("image_id", o.image_id)->required();
    answer->add_option("question", o.question)->required();
    add_pipeline_options(answer, o);
    add_config_option(answer, o, false);

    auto* explain_cmd = app.add_subcommand("explain", "Answer and render an SVG evidence overlay");
    explain_cmd->add_option("image_id", o.image_id)->required();
    explain_cmd->add_option("question", o.question)->required();
    explain_cmd->add_option("--svg", o.svg, "Write the overlay to this file");
    explain_cmd->add_option("--width", o.width, "Overlay width in pixels")->check(CLI::PositiveNumber);
    explain_cmd->add_option("--height", o.height, "Overlay height in pixels")->check(CLI::PositiveNumber);
    add_pipeline_options(explain_cmd, o);
    add_config_option(explain_cmd, o, false);

    auto* eval = app.add_subcommand("eval", "Score a question manifest");
    eval->add_option("--manifest", o.manifest, "Question manifest (JSON lines)");
    eval->add_option("--sample", o.sample, "Score a seeded random subset of this many items");
    eval->add_option("--kappa", o.kappa, "Cohen's kappa between two label files")->expected(2);
    add_pipeline_options(eval, o);
    add_config_option(eval, o, false);

    auto* ablate = app.add_subcommand("ablate", "Score a manifest under ablation configurations");
    ablate->add_option("--manifest", o.manifest, "Question manifest (JSON lines)");
    ablate->add_option("--sample", o.sample, "Score a seeded random subset of this many items");
    add_pipeline_options(ablate, o);
    add_config_option(ablate, o, true);

    auto* kb = app.add_subcommand("kb", "Knowledge base utilities");
    kb->require_subcommand(1);
    auto* lookup = kb->add_subcommand("lookup", "Match a mention against the knowledge base");
    lookup->add_option("mention", o.mention)->required();

    auto* ds = app.add_subcommand("dataset", "Dataset utilities");
    ds->require_subcommand(1);
    auto* stats = ds->add_subcommand("stats", "Composition statistics of a record or counts manifest");
    stats->add_option("manifest", o.dataset_path)->required();
    auto* validate = ds->add_subcommand("validate", "Check a record manifest");
    validate->add_option("manifest", o.dataset_path)->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        if (o.format != "json-lines" && o.format != "human") throw CLI::ValidationError("--format", o.format);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << "error: " << e.what() << "\n";
        err << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().back()->help());
        return kExitUsage;
    }

#ifdef _OPENMP
    if (o.threads > 0) omp_set_num_threads(o.threads);
#endif

    try {
        std::string text;
        if (answer->parsed()) text = run_answer_cmd(o, false);
        else if (explain_cmd->parsed()) text = run_answer_cmd(o, true);
        else if (eval->parsed()) text = run_eval_cmd(o, false, err);
        else if (ablate->parsed()) text = run_eval_cmd(o, true, err);
        else if (lookup->parsed()) text = run_kb_lookup(o);
        else if (stats->parsed()) text = run_dataset_stats(o);
        else if (validate->parsed()) text = run_dataset_validate(o, err);

        if (o.out.empty()) {
            out << text;
        } else {
            std::ofstream file(o.out, std::ios::binary);
            if (!file) throw IoError("output file", o.out);
            file << text;
        }
        return kExitOk;
    } catch (const CLI::ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return error_code(e);
    }
}

}  // namespace cvqa
