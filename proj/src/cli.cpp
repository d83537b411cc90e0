#include "autokg/cli.hpp"

#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "autokg/error.hpp"
#include "autokg/graph_io.hpp"
#include "autokg/pipeline.hpp"

namespace autokg {
namespace {

void install_logger(bool verbose, bool quiet) {
    static const std::shared_ptr<spdlog::logger> logger = [] {
        auto l = std::make_shared<spdlog::logger>("autokg", std::make_shared<spdlog::sinks::stderr_sink_mt>());
        l->set_pattern("[%l] %v");
        return l;
    }();
    spdlog::set_default_logger(logger);
    logger->set_level(quiet ? spdlog::level::err : verbose ? spdlog::level::debug : spdlog::level::info);
}

struct BuildArgs {
    std::string input, dict, config, out, dot, report;
    bool no_sf = false;
    bool no_fdn = false;
    std::optional<std::uint64_t> seed;
};

int run_build(const BuildArgs& a) {
    PipelineConfig cfg = load_config(a.config);
    cfg.dictionary_path = a.dict;
    if (a.no_sf) cfg.ablation.enable_sf = false;
    if (a.no_fdn) cfg.ablation.enable_fdn = false;
    if (a.seed) cfg.global_seed = *a.seed;
    const std::string text = read_file(a.input);
    const PipelineResult r = run_pipeline(text, cfg);
    export_json(r.final, a.out);
    if (!a.dot.empty()) export_dot(r.final, a.dot);
    if (!a.report.empty()) write_file(a.report, r.report.to_json().dump(2) + "\n");
    spdlog::info("wrote {}", a.out);
    return 0;
}

int run_eval(const std::string& graph_path, const std::string& metric) {
    if (metric != "asfas") throw ConfigError("unknown metric '" + metric + "'");
    const KnowledgeGraph g = import_json(graph_path);
    const Matrix* h = nullptr;
    for (Stage s : {Stage::Final, Stage::Denoised, Stage::Raw}) {
        if ((h = g.feature(s))) break;
    }
    if (!h) throw Error("graph carries no features to evaluate");
    std::cout << fmt::format("{:.6f}", asfas(g, *h)) << "\n";
    return 0;
}

int run_bench_cmd(const std::string& spec_path, const std::string& out) {
    const BenchSpec spec = load_bench_spec(spec_path);
    const auto rows = run_bench(spec);
    write_file(out, bench_csv(rows));
    spdlog::info("wrote {} rows to {}", rows.size(), out);
    return 0;
}

int run_extract(const std::string& input, const std::string& mode, const std::string& config,
                const std::string& fixture) {
    PipelineConfig cfg = config.empty() ? parse_config("") : load_config(config);
    if (mode == "rule") cfg.extractor = ExtractorMode::Rule;
    else if (mode == "fixture") cfg.extractor = ExtractorMode::Fixture;
    else cfg.extractor = ExtractorMode::Llm;
    if (!fixture.empty()) cfg.fixture_path = fixture;
    cfg.validate();
    const std::string text = read_file(input);
    std::string used;
    const ExtractionResult r = run_extraction(text, cfg, &used);
    spdlog::info("{} entities, {} relations ({} extractor)", r.entities.size(), r.relations.size(), used);
    std::cout << dump_extraction(r);
    return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"Knowledge graph construction from Bengali text", "autokg"};
    app.require_subcommand(1);
    bool verbose = false;
    bool quiet = false;
    app.add_flag("-v,--verbose", verbose, "Debug logging");
    app.add_flag("-q,--quiet", quiet, "Errors only");

    BuildArgs b;
    std::uint64_t seed = 0;
    auto* build = app.add_subcommand("build", "Run the full pipeline on a text file");
    build->add_option("--input", b.input, "Input text (UTF-8)")->required()->check(CLI::ExistingFile);
    build->add_option("--dict", b.dict, "Bilingual dictionary TSV")->required()->check(CLI::ExistingFile);
    build->add_option("--config", b.config, "Pipeline config")->required()->check(CLI::ExistingFile);
    build->add_option("--out", b.out, "Output graph JSON")->required();
    build->add_option("--dot", b.dot, "Also write a DOT file");
    build->add_option("--report", b.report, "Also write the run report JSON");
    build->add_flag("--no-sf", b.no_sf, "Disable semantic filtering");
    build->add_flag("--no-fdn", b.no_fdn, "Disable feature denoising");
    auto* seed_opt = build->add_option("--seed", seed, "Global seed");

    std::string graph_path;
    std::string metric = "asfas";
    auto* eval = app.add_subcommand("eval", "Score a graph JSON file");
    eval->add_option("--graph", graph_path, "Graph JSON")->required()->check(CLI::ExistingFile);
    eval->add_option("--metric", metric, "Metric")->check(CLI::IsMember({"asfas"}));

    std::string spec_path, csv_out;
    auto* bench = app.add_subcommand("bench", "Synthetic ablation sweep");
    bench->add_option("--spec", spec_path, "Bench spec")->required()->check(CLI::ExistingFile);
    bench->add_option("--out", csv_out, "Output CSV")->required();

    std::string ex_input, ex_mode = "rule", ex_config, ex_fixture;
    auto* extract = app.add_subcommand("extract", "Print extracted entities and relations as JSON");
    extract->add_option("--input", ex_input, "Input text (UTF-8)")->required()->check(CLI::ExistingFile);
    extract->add_option("--mode", ex_mode, "Extractor")->check(CLI::IsMember({"rule", "fixture", "llm"}));
    extract->add_option("--config", ex_config, "Pipeline config")->check(CLI::ExistingFile);
    extract->add_option("--fixture", ex_fixture, "Pre-recorded extraction JSON")->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            std::cout << app.help();
            return 0;
        }
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }
    install_logger(verbose, quiet);
    if (*seed_opt) b.seed = seed;

    try {
        if (*build) return run_build(b);
        if (*eval) return run_eval(graph_path, metric);
        if (*bench) return run_bench_cmd(spec_path, csv_out);
        if (*extract) return run_extract(ex_input, ex_mode, ex_config, ex_fixture);
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 2;
    }
    return 1;
}

}  // namespace autokg
