#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mathsmith/eval.hpp"
#include "mathsmith/gateway.hpp"
#include "mathsmith/graph.hpp"
#include "mathsmith/io.hpp"

namespace mathsmith {

struct PipelineConfig {
    std::filesystem::path work_dir = "out";
    std::filesystem::path seeds_path;
    std::filesystem::path manifest_path;
    int workers = 4;

    // gateway
    GatewayConfig gateway;
    std::string gateway_mode = "mock"; // "mock" or "http"
    std::optional<std::filesystem::path> mock_fixtures;
    std::string model_id = "gpt-3.5-turbo-0613";
    double synthesis_temperature = 0.7; // evaluation always runs greedy (0)
    int max_tokens = 1024;

    // graph + walk
    double epsilon = 1e-5;
    WalkPolicy walk;
    int64_t epochs = 1;

    // extraction / generation
    bool extraction_retry_failed_parse = false;
    size_t k_fewshot = 2;
    bool generation_retry_failed_parse = false;
    bool validate_generated = false;
    std::string judge_model_id = "gpt-4";

    // decontamination
    size_t ngram = 8;
    double threshold = 0.6;

    // evaluation
    EvalConfig eval;
    std::string eval_driver = "echo"; // "echo" or "gateway"
};

// Reads a JSON config file (sections: paths at top level, "gateway", "walk",
// "generation", "decontamination", "eval"). Relative paths resolve against
// the config file's directory.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

// Dotted-key override, e.g. ("walk.seed", "42") or ("decontamination.threshold",
// "0.6"). Raises Errc::invalid_argument for unknown keys or unparseable values.
void apply_override(PipelineConfig& config, const std::string& key, const std::string& value);

extern const std::vector<std::string> kStageNames; // pipeline order, excludes "stats"

// Staged, resumable pipeline runner. Each stage reads its predecessor's
// artifact from work_dir and writes its own through a temp-file rename.
// A content-hash stamp (inputs + outputs) makes re-running a completed
// stage with unchanged inputs a byte-level no-op.
class Pipeline {
  public:
    explicit Pipeline(PipelineConfig config);

    // Returns a summary object: {"stage", "skipped", "outputs", ...counters}.
    Json run_stage(const std::string& stage);

    // Inventory sizes, degree histograms, composition counts, yield and
    // contamination counters for whatever artifacts currently exist.
    Json stats() const;

    const PipelineConfig& config() const { return config_; }

    std::filesystem::path artifact_path(const std::string& name) const;

  private:
    struct StageResult {
        Json counters;
        std::vector<std::pair<std::filesystem::path, std::string>> outputs; // path -> content
    };

    StageResult stage_extract();
    StageResult stage_build_graph();
    StageResult stage_sample();
    StageResult stage_generate();
    StageResult stage_decontaminate();
    StageResult stage_emit();
    StageResult stage_evaluate();

    std::vector<std::filesystem::path> stage_inputs(const std::string& stage) const;
    std::string stage_config_fingerprint(const std::string& stage) const;

    std::shared_ptr<Gateway> gateway();

    PipelineConfig config_;
    std::shared_ptr<Gateway> gateway_;
};

} // namespace mathsmith
