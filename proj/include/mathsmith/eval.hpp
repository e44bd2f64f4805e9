#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mathsmith {

struct EvalConfig {
    // "alpaca" or a custom template containing the {question} slot exactly
    // once.
    std::string template_name = "alpaca";
    std::string custom_template;
    std::vector<std::string> datasets;
};

struct EvalItem {
    std::string dataset;
    std::string id;
    std::string question;
    std::string gold;
};

struct EvalRecord {
    std::string dataset;
    std::string id;
    std::string gold;
    std::string completion;
    std::optional<std::string> extracted;
    bool verdict = false; // always false when extracted is empty
};

struct DatasetScore {
    std::string name;
    int64_t total = 0;
    int64_t correct = 0;
    double accuracy = 0.0;
};

struct EvalReport {
    std::vector<DatasetScore> datasets;
    double micro = 0.0; // total correct / total items
    double macro = 0.0; // unweighted mean of per-dataset accuracies
    int64_t total = 0;
    int64_t correct = 0;
};

// Zero-shot prompt: the shared Alpaca wrapper, or a custom template with
// {question} substituted. Never includes demonstrations. Raises
// Errc::bad_template when a custom template does not contain the slot
// exactly once.
std::string render_eval_prompt(const std::string& question, const EvalConfig& config);

// Answer extraction in priority order: (1) content of the last balanced
// \boxed{...}; (2) text after the last "the answer is" / "answer:" marker up
// to end of line; (3) the last number-like token (integer, decimal, simple
// fraction, percent). Total over arbitrary text; nullopt when nothing fires.
std::optional<std::string> extract_answer(const std::string& completion);

// Tiered high-precision equivalence: (a) normalized string equality
// (case/whitespace/decorative-punctuation-insensitive, LaTeX spacing
// stripped); (b) exact rational comparison with relative tolerance 1e-4
// (fractions and \frac evaluated exactly, "x%" = x/100); (c) unordered
// element-wise match of comma-separated multi-part answers under (a)/(b).
bool verify(const std::string& extracted, const std::string& gold);

// Exposed for tests: the tier-(a) canonical form.
std::string normalize_answer(const std::string& answer);

// Per-dataset accuracy plus micro/macro averages. `known_datasets`, when
// non-empty, is the dataset universe: records outside it raise
// Errc::unknown_dataset, and listed datasets with zero records are excluded
// from the macro mean.
EvalReport aggregate(const std::vector<EvalRecord>& records,
                     const std::vector<std::string>& known_datasets = {});

// One-prompt-in, one-completion-out model under a greedy-decoding contract:
// generate() must return the single most probable completion so repeated
// runs are identical.
class ModelDriver {
  public:
    virtual ~ModelDriver() = default;
    virtual std::string generate(const std::string& prompt) = 0;
};

// Runs the unified protocol over the items: render, complete, extract,
// verify. Driver failures propagate as Errc::driver tagged with the
// question id.
std::vector<EvalRecord> run_eval(ModelDriver& driver, const std::vector<EvalItem>& items,
                                 const EvalConfig& config);

} // namespace mathsmith
