// Command-line front end for the staged pipeline. Talks to the core only
// through the C API in mathsmith/mathsmith.h.

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mathsmith/mathsmith.h"

namespace {

struct PipelineDeleter {
    void operator()(ms_pipeline* p) const { ms_pipeline_close(p); }
};
using PipelineHandle = std::unique_ptr<ms_pipeline, PipelineDeleter>;

struct Options {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;
};

int fail(const char* stage, ms_status status) {
    std::fprintf(stderr, "mathsmith: %s: %s (%s)\n", stage, ms_last_error(),
                 ms_status_name(status));
    return 1;
}

PipelineHandle open_pipeline(const Options& options, int& exit_code) {
    ms_pipeline* raw = nullptr;
    if (ms_status status = ms_pipeline_open(options.config_path.c_str(), &raw)) {
        exit_code = fail("config", status);
        return nullptr;
    }
    PipelineHandle pipeline(raw);
    for (const auto& [key, value] : options.overrides) {
        if (ms_status status = ms_pipeline_set_option(pipeline.get(), key.c_str(), value.c_str())) {
            exit_code = fail("config", status);
            return nullptr;
        }
    }
    exit_code = 0;
    return pipeline;
}

int run_stages(const Options& options, const std::vector<std::string>& stages) {
    int exit_code = 0;
    PipelineHandle pipeline = open_pipeline(options, exit_code);
    if (!pipeline) return exit_code;
    for (const std::string& stage : stages) {
        char* summary = nullptr;
        ms_status status = ms_pipeline_run_stage(pipeline.get(), stage.c_str(), &summary);
        if (status != MS_OK) return fail(stage.c_str(), status);
        std::printf("== %s ==\n%s\n", stage.c_str(), summary ? summary : "{}");
        ms_string_free(summary);
    }
    return 0;
}

int run_stats(const Options& options) {
    int exit_code = 0;
    PipelineHandle pipeline = open_pipeline(options, exit_code);
    if (!pipeline) return exit_code;
    char* stats = nullptr;
    if (ms_status status = ms_pipeline_stats(pipeline.get(), &stats)) return fail("stats", status);
    std::printf("%s\n", stats ? stats : "{}");
    ms_string_free(stats);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Concept-graph math instruction-data synthesis and evaluation pipeline"};
    app.require_subcommand(1);

    Options options;
    app.add_option("--config", options.config_path, "Pipeline config file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);

    auto add_override = [&](const std::string& key) {
        return [&options, key](const std::string& value) {
            options.overrides.emplace_back(key, value);
        };
    };
    app.add_option_function<std::string>("--seed", add_override("walk.seed"),
                                         "Random seed for the walk sampler");
    app.add_option_function<std::string>("--epochs", add_override("walk.epochs"),
                                         "Enumeration epochs over the topic nodes");
    app.add_option_function<std::string>("--k-fewshot", add_override("generation.k_fewshot"),
                                         "Few-shot exemplars per generation prompt");
    app.add_option_function<std::string>("--ngram", add_override("decontamination.ngram"),
                                         "Word n-gram size for the contamination screen");
    app.add_option_function<std::string>("--threshold", add_override("decontamination.threshold"),
                                         "N-gram overlap fraction that flags a candidate");
    app.add_option_function<std::string>("--template", add_override("eval.template"),
                                         "Evaluation prompt template (alpaca|custom)");
    app.add_option_function<std::string>("--workers", add_override("workers"),
                                         "Worker threads for gateway fan-out");

    const char* stage_docs[][2] = {
        {"extract", "Extract and prune concepts from the seed corpus"},
        {"build-graph", "Build the weighted concept co-occurrence graph"},
        {"sample", "Sample concept compositions via random walks"},
        {"generate", "Generate question-solution pairs for compositions"},
        {"decontaminate", "Drop candidates colliding with benchmark test questions"},
        {"emit", "Merge seeds and survivors into the training dataset"},
        {"evaluate", "Run the unified zero-shot evaluation protocol"},
    };
    std::vector<CLI::App*> stage_commands;
    for (const auto& [name, doc] : stage_docs) stage_commands.push_back(app.add_subcommand(name, doc));
    CLI::App* all = app.add_subcommand("run-all", "Run every synthesis stage in order");
    CLI::App* stats = app.add_subcommand("stats", "Print pipeline statistics");

    CLI11_PARSE(app, argc, argv);

    if (stats->parsed()) return run_stats(options);
    if (all->parsed()) {
        return run_stages(options, {"extract", "build-graph", "sample", "generate",
                                    "decontaminate", "emit"});
    }
    for (size_t i = 0; i < stage_commands.size(); ++i) {
        if (stage_commands[i]->parsed()) return run_stages(options, {stage_docs[i][0]});
    }
    return 1;
}
