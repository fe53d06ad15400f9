// SPDX-License-Identifier: Apache-2.0
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "audioqa/eval.hpp"
#include "audioqa/http_backend.hpp"
#include "audioqa/mock_backend.hpp"

using namespace audioqa;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitDataset = 2;
constexpr int kExitBackend = 3;

struct CliConfig {
    BackendConfig llm;
    BackendConfig allm;
    BackendConfig asr;
    std::string prompt_dir;
    int max_iterations = 3;
    int workers = 4;
    bool normalize = true;
};

CliConfig load_config(const std::string& path) {
    CliConfig cfg;
    if (path.empty()) return cfg;
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file: " + path);
    const auto j = nlohmann::json::parse(in);
    if (j.contains("llm")) cfg.llm = backend_config_from_json(j["llm"]);
    if (j.contains("allm")) cfg.allm = backend_config_from_json(j["allm"]);
    if (j.contains("asr")) cfg.asr = backend_config_from_json(j["asr"]);
    cfg.prompt_dir = j.value("prompt_dir", "");
    cfg.max_iterations = j.value("max_iterations", 3);
    cfg.workers = j.value("workers", 4);
    cfg.normalize = j.value("normalize", true);
    return cfg;
}

BackendSet make_backends(const CliConfig& cfg, const std::string& mock_script) {
    if (!mock_script.empty()) {
        BackendConfig mock_cfg;
        mock_cfg.max_retries = 3;
        mock_cfg.backoff_base_ms = 1;
        auto mock = MockBackend::from_file(mock_cfg, mock_script);
        return BackendSet{mock, mock, mock};
    }
    return BackendSet{
        std::make_shared<HttpBackend>(cfg.llm),
        std::make_shared<HttpBackend>(cfg.allm),
        std::make_shared<HttpBackend>(cfg.asr),
    };
}

PromptLibrary make_prompts(const CliConfig& cfg) {
    if (!cfg.prompt_dir.empty()) return PromptLibrary::from_directory(cfg.prompt_dir);
    return PromptLibrary{};
}

std::vector<int> parse_budgets(const std::string& spec) {
    std::vector<int> out;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoi(trim(tok)));
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Audio multiple-choice QA pipeline and benchmark harness"};
    app.require_subcommand(1);
    app.fallthrough(); // let --config / --mock-script appear after the subcommand too

    std::string config_path, dataset_path, mock_script, out_dir = "out", sample_id, budgets_spec;
    int max_iterations = -1, workers = -1;
    uint64_t seed = 0;

    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--mock-script", mock_script, "scripted mock backend instead of live HTTP");

    auto* run = app.add_subcommand("run", "run the pipeline on one dataset sample");
    run->add_option("--dataset", dataset_path, "JSONL dataset")->required();
    run->add_option("--id", sample_id, "sample id (defaults to the first sample)");
    run->add_option("--max-iterations", max_iterations);
    run->add_option("--out", out_dir, "trace output directory");

    auto* eval = app.add_subcommand("eval", "evaluate a dataset and write reports");
    eval->add_option("--dataset", dataset_path)->required();
    eval->add_option("--max-iterations", max_iterations);
    eval->add_option("--workers", workers);
    eval->add_option("--out", out_dir);

    auto* sweep = app.add_subcommand("sweep", "evaluate at several iteration budgets");
    sweep->add_option("--dataset", dataset_path)->required();
    sweep->add_option("--budgets", budgets_spec, "comma-separated budgets, e.g. 0,1,2,3")
        ->required();
    sweep->add_option("--workers", workers);
    sweep->add_option("--out", out_dir);

    auto* baseline = app.add_subcommand("baseline", "seeded random-guess baseline");
    baseline->add_option("--dataset", dataset_path)->required();
    baseline->add_option("--seed", seed);

    auto* report = app.add_subcommand("report", "re-render reports from saved results");
    report->add_option("--dataset", dataset_path)->required();
    report->add_option("--out", out_dir, "directory holding results.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        const CliConfig cfg = load_config(config_path);
        EvalOptions opts;
        opts.pipeline.max_iterations = max_iterations >= 0 ? max_iterations : cfg.max_iterations;
        opts.workers = workers > 0 ? workers : cfg.workers;
        opts.normalize = cfg.normalize;

        if (baseline->parsed()) {
            const auto data = load_dataset(dataset_path);
            const auto b = random_baseline(data.samples, seed);
            std::cout << "analytic expectation: " << b.analytic_expectation_pct << "\n"
                      << "empirical accuracy:   " << b.empirical_pct << "\n\n"
                      << b.report.to_markdown();
            return kExitOk;
        }

        if (report->parsed()) {
            const auto data = load_dataset(dataset_path);
            const auto results =
                read_results_file(std::filesystem::path(out_dir) / "results.json");
            const auto rep = score(results, data.samples);
            std::ofstream(std::filesystem::path(out_dir) / "report.csv") << rep.to_csv();
            std::ofstream(std::filesystem::path(out_dir) / "report.md") << rep.to_markdown();
            std::cout << rep.to_markdown();
            return kExitOk;
        }

        const PromptLibrary prompts = make_prompts(cfg);

        if (run->parsed()) {
            const auto data = load_dataset(dataset_path);
            const BenchmarkSample* sample = nullptr;
            for (const auto& s : data.samples)
                if (sample_id.empty() || s.id == sample_id) {
                    sample = &s;
                    break;
                }
            if (!sample) throw DatasetError("sample id not found: " + sample_id);
            const auto backends = make_backends(cfg, mock_script);
            opts.pipeline.write_traces = true;
            opts.pipeline.trace_dir = out_dir;
            const auto result = run_pipeline(sample->audio, sample->question, backends, prompts,
                                             opts.pipeline, sample->id);
            std::cout << result.trace.to_json().dump(2) << "\n";
            return kExitOk;
        }

        if (eval->parsed()) {
            const auto data = load_dataset(dataset_path);
            for (const auto& rej : data.rejected)
                std::cerr << "rejected line " << rej.line_number << ": " << rej.reason << "\n";
            const auto backends = make_backends(cfg, mock_script);
            opts.pipeline.write_traces = true;
            opts.pipeline.trace_dir = std::filesystem::path(out_dir) / "traces";
            std::filesystem::create_directories(out_dir);
            const auto results = evaluate_samples(data.samples, backends, prompts, opts);
            const auto rep = score(results, data.samples);
            write_results_file(results, std::filesystem::path(out_dir) / "results.json");
            std::ofstream(std::filesystem::path(out_dir) / "report.csv") << rep.to_csv();
            std::ofstream(std::filesystem::path(out_dir) / "report.md") << rep.to_markdown();
            std::cout << rep.to_markdown();
            return kExitOk;
        }

        if (sweep->parsed()) {
            const auto data = load_dataset(dataset_path);
            const auto budgets = parse_budgets(budgets_spec);
            const auto table = sweep_iterations(
                data.samples, [&] { return make_backends(cfg, mock_script); }, prompts, opts,
                budgets);
            std::filesystem::create_directories(out_dir);
            std::ostringstream md;
            for (const auto& [budget, rep] : table) {
                md << "## max_iterations = " << budget << "\n\n" << rep.to_markdown() << "\n";
                std::ofstream(std::filesystem::path(out_dir) /
                              ("sweep_" + std::to_string(budget) + ".csv"))
                    << rep.to_csv();
            }
            std::ofstream(std::filesystem::path(out_dir) / "sweep.md") << md.str();
            std::cout << md.str();
            return kExitOk;
        }
    } catch (const DatasetError& e) {
        std::cerr << "dataset error: " << e.what() << "\n";
        return kExitDataset;
    } catch (const AuthError& e) {
        std::cerr << "backend auth error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const TransportError& e) {
        std::cerr << "backend unreachable: " << e.what() << "\n";
        return kExitBackend;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
