#include "mathsmith/pipeline.hpp"

#include <atomic>
#include <charconv>
#include <iostream>
#include <map>
#include <set>
#include <thread>

#include "mathsmith/concepts.hpp"
#include "mathsmith/dataset_io.hpp"
#include "mathsmith/decontamination.hpp"
#include "mathsmith/errors.hpp"
#include "mathsmith/qa.hpp"
#include "mathsmith/text.hpp"

namespace mathsmith {

namespace fs = std::filesystem;

const std::vector<std::string> kStageNames = {
    "extract", "build-graph", "sample", "generate", "decontaminate", "emit", "evaluate",
};

// ---------------------------------------------------------------------------
// Config

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    if (p.empty()) return {};
    fs::path candidate(p);
    return candidate.is_absolute() ? candidate : base / candidate;
}

// Index-pulling worker pool; item handlers must be independent. The first
// exception wins and is rethrown on the caller thread after join.
void parallel_for(size_t count, int workers, const std::function<void(size_t)>& body) {
    if (count == 0) return;
    int n = std::max(1, std::min<int>(workers, static_cast<int>(count)));
    if (n == 1) {
        for (size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(n));
    for (int t = 0; t < n; ++t) {
        pool.emplace_back([&] {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace

PipelineConfig load_pipeline_config(const fs::path& path) {
    Json doc = Json::parse(read_text_file(path), nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        raise(Errc::malformed_record, "config is not valid JSON: " + path.string());
    const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");

    PipelineConfig config;
    config.work_dir = resolve(base, doc.value("work_dir", "out"));
    config.seeds_path = resolve(base, doc.value("seeds_path", ""));
    config.manifest_path = resolve(base, doc.value("manifest_path", ""));
    config.workers = doc.value("workers", 4);

    if (doc.contains("gateway")) {
        const Json& g = doc["gateway"];
        config.gateway_mode = g.value("mode", "mock");
        config.gateway.endpoint = g.value("endpoint", "");
        config.gateway.api_key_env = g.value("api_key_env", "MATHSMITH_API_KEY");
        config.gateway.max_concurrent_requests = g.value("max_concurrent_requests", 4);
        config.gateway.retry_budget = g.value("retry_budget", 2);
        config.gateway.backoff_base_ms = g.value("backoff_base_ms", 250);
        config.gateway.timeout_seconds = g.value("timeout_seconds", 120);
        if (g.contains("cache_dir") && g["cache_dir"].is_string())
            config.gateway.cache_dir = resolve(base, g["cache_dir"].get<std::string>());
        if (g.contains("fixtures_path") && g["fixtures_path"].is_string())
            config.mock_fixtures = resolve(base, g["fixtures_path"].get<std::string>());
        config.model_id = g.value("model_id", config.model_id);
        config.synthesis_temperature = g.value("temperature", config.synthesis_temperature);
        config.max_tokens = g.value("max_tokens", config.max_tokens);
    }
    if (doc.contains("graph")) {
        config.epsilon = doc["graph"].value("epsilon", config.epsilon);
    }
    if (doc.contains("walk")) {
        const Json& w = doc["walk"];
        config.walk.seed = w.value("seed", uint64_t{0});
        config.walk.topic_steps_min = w.value("topic_steps_min", 1);
        config.walk.topic_steps_max = w.value("topic_steps_max", 2);
        config.walk.kp_steps_min = w.value("kp_steps_min", 0);
        config.walk.kp_steps_max = w.value("kp_steps_max", 4);
        config.epochs = w.value("epochs", int64_t{1});
    }
    if (doc.contains("extraction")) {
        config.extraction_retry_failed_parse = doc["extraction"].value("retry_failed_parse", false);
    }
    if (doc.contains("generation")) {
        const Json& g = doc["generation"];
        config.k_fewshot = g.value("k_fewshot", size_t{2});
        config.generation_retry_failed_parse = g.value("retry_failed_parse", false);
        config.validate_generated = g.value("validate", false);
        config.judge_model_id = g.value("judge_model_id", config.judge_model_id);
    }
    if (doc.contains("decontamination")) {
        const Json& d = doc["decontamination"];
        config.ngram = d.value("ngram", size_t{8});
        config.threshold = d.value("threshold", 0.6);
    }
    if (doc.contains("eval")) {
        const Json& e = doc["eval"];
        config.eval.template_name = e.value("template", "alpaca");
        config.eval.custom_template = e.value("custom_template", "");
        if (e.contains("datasets"))
            config.eval.datasets = e["datasets"].get<std::vector<std::string>>();
        config.eval_driver = e.value("driver", "echo");
    }
    return config;
}

void apply_override(PipelineConfig& config, const std::string& key, const std::string& value) {
    auto as_i64 = [&]() {
        int64_t out = 0;
        auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
        if (ec != std::errc() || p != value.data() + value.size())
            raise(Errc::invalid_argument, "not an integer: " + value);
        return out;
    };
    auto as_f64 = [&]() {
        try {
            size_t used = 0;
            double out = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
            return out;
        } catch (const std::exception&) {
            raise(Errc::invalid_argument, "not a number: " + value);
        }
    };

    if (key == "walk.seed") config.walk.seed = static_cast<uint64_t>(as_i64());
    else if (key == "walk.epochs") config.epochs = as_i64();
    else if (key == "generation.k_fewshot") config.k_fewshot = static_cast<size_t>(as_i64());
    else if (key == "decontamination.ngram") config.ngram = static_cast<size_t>(as_i64());
    else if (key == "decontamination.threshold") config.threshold = as_f64();
    else if (key == "eval.template") config.eval.template_name = value;
    else if (key == "eval.custom_template") { config.eval.template_name = "custom"; config.eval.custom_template = value; }
    else if (key == "eval.driver") config.eval_driver = value;
    else if (key == "workers") config.workers = static_cast<int>(as_i64());
    else if (key == "graph.epsilon") config.epsilon = as_f64();
    else raise(Errc::invalid_argument, "unknown config override: " + key);
}

// ---------------------------------------------------------------------------
// Pipeline

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)) {}

fs::path Pipeline::artifact_path(const std::string& name) const { return config_.work_dir / name; }

std::shared_ptr<Gateway> Pipeline::gateway() {
    if (!gateway_) {
        if (config_.gateway_mode == "mock") {
            if (!config_.mock_fixtures)
                raise(Errc::invalid_argument, "gateway mode is mock but no fixtures_path given");
            gateway_ = make_gateway(config_.gateway, config_.mock_fixtures);
        } else if (config_.gateway_mode == "http") {
            gateway_ = make_gateway(config_.gateway, std::nullopt);
        } else {
            raise(Errc::invalid_argument, "unknown gateway mode: " + config_.gateway_mode);
        }
    }
    return gateway_;
}

std::vector<fs::path> Pipeline::stage_inputs(const std::string& stage) const {
    if (stage == "extract") return {config_.seeds_path};
    if (stage == "build-graph") return {artifact_path("inventory.json")};
    if (stage == "sample") return {artifact_path("graph.json")};
    if (stage == "generate")
        return {artifact_path("compositions.jsonl"), artifact_path("inventory.json"),
                config_.seeds_path};
    if (stage == "decontaminate") return {artifact_path("generated.jsonl"), config_.manifest_path};
    if (stage == "emit") return {artifact_path("filtered.jsonl"), config_.seeds_path};
    if (stage == "evaluate") return {config_.manifest_path};
    raise(Errc::stage, "unknown stage: " + stage);
}

// The slice of configuration that affects a stage's output; part of the
// stamp, so changing a knob re-runs the stage.
std::string Pipeline::stage_config_fingerprint(const std::string& stage) const {
    Json fp;
    fp["model_id"] = config_.model_id;
    fp["temperature"] = config_.synthesis_temperature;
    fp["max_tokens"] = config_.max_tokens;
    if (stage == "build-graph") fp["epsilon"] = config_.epsilon;
    if (stage == "sample") {
        fp["seed"] = config_.walk.seed;
        fp["epochs"] = config_.epochs;
        fp["topic_steps"] = {config_.walk.topic_steps_min, config_.walk.topic_steps_max};
        fp["kp_steps"] = {config_.walk.kp_steps_min, config_.walk.kp_steps_max};
    }
    if (stage == "generate") {
        fp["k_fewshot"] = config_.k_fewshot;
        fp["validate"] = config_.validate_generated;
        fp["judge"] = config_.judge_model_id;
        fp["retry"] = config_.generation_retry_failed_parse;
    }
    if (stage == "extract") fp["retry"] = config_.extraction_retry_failed_parse;
    if (stage == "decontaminate") {
        fp["ngram"] = config_.ngram;
        fp["threshold"] = config_.threshold;
    }
    if (stage == "evaluate") {
        fp["template"] = config_.eval.template_name;
        fp["custom_template"] = config_.eval.custom_template;
        fp["datasets"] = config_.eval.datasets;
        fp["driver"] = config_.eval_driver;
    }
    return fp.dump();
}

Json Pipeline::run_stage(const std::string& stage) {
    if (std::find(kStageNames.begin(), kStageNames.end(), stage) == kStageNames.end())
        raise(Errc::stage, "unknown stage: " + stage);

    // Stamp check: identical inputs + config and intact outputs -> no-op.
    uint64_t inputs_hash = fnv1a64(stage_config_fingerprint(stage));
    for (const fs::path& input : stage_inputs(stage)) {
        if (input.empty() || !fs::exists(input))
            raise(Errc::stage, stage + ": missing input " +
                                   (input.empty() ? std::string("(unset path)") : input.string()));
        inputs_hash = fnv1a64(read_text_file(input), inputs_hash);
    }
    const fs::path stamp_path = config_.work_dir / ".stamps" / (stage + ".json");
    if (fs::exists(stamp_path)) {
        Json stamp = Json::parse(read_text_file(stamp_path), nullptr, false);
        if (!stamp.is_discarded() && stamp.value("inputs", "") == to_hex16(inputs_hash)) {
            bool intact = true;
            for (const auto& [file, hash] : stamp.value("outputs", Json::object()).items()) {
                fs::path out = config_.work_dir / file;
                if (!fs::exists(out) || to_hex16(hash_file(out)) != hash.get<std::string>()) {
                    intact = false;
                    break;
                }
            }
            if (intact) {
                Json summary = stamp.value("summary", Json::object());
                summary["stage"] = stage;
                summary["skipped"] = true;
                return summary;
            }
        }
    }

    StageResult result;
    if (stage == "extract") result = stage_extract();
    else if (stage == "build-graph") result = stage_build_graph();
    else if (stage == "sample") result = stage_sample();
    else if (stage == "generate") result = stage_generate();
    else if (stage == "decontaminate") result = stage_decontaminate();
    else if (stage == "emit") result = stage_emit();
    else result = stage_evaluate();

    Json stamp;
    stamp["inputs"] = to_hex16(inputs_hash);
    stamp["outputs"] = Json::object();
    for (const auto& [path, content] : result.outputs) {
        write_text_file_atomic(path, content);
        stamp["outputs"][path.filename().string()] = to_hex16(fnv1a64(content));
    }
    stamp["summary"] = result.counters;
    write_text_file_atomic(stamp_path, stamp.dump(2) + "\n");

    Json summary = result.counters;
    summary["stage"] = stage;
    summary["skipped"] = false;
    return summary;
}

// ---------------------------------------------------------------------------
// Stages

namespace {

std::vector<SeedQuestion> train_seeds(const fs::path& seeds_path) {
    std::vector<SeedQuestion> seeds;
    for (SeedQuestion& seed : load_dataset(seeds_path)) {
        if (seed.split == Split::train) seeds.push_back(std::move(seed));
    }
    if (seeds.empty()) raise(Errc::stage, "seed corpus has no train-split records");
    return seeds;
}

Json inventory_to_json(const ConceptInventory& inventory) {
    Json doc;
    doc["topics"] = Json::array();
    for (const auto& [label, count] : inventory.topics)
        doc["topics"].push_back({{"label", label}, {"count", count}});
    doc["kps"] = Json::array();
    for (const auto& [label, count] : inventory.knowledge_points)
        doc["kps"].push_back({{"label", label}, {"count", count}});
    doc["extractions"] = Json::array();
    for (const Extraction& e : inventory.extractions)
        doc["extractions"].push_back(
            {{"seed_id", e.seed_id}, {"topics", e.topics}, {"kps", e.knowledge_points}});
    doc["dropped_seed_ids"] = inventory.dropped_seed_ids;
    return doc;
}

ConceptInventory inventory_from_json(const Json& doc) {
    ConceptInventory inventory;
    for (const auto& node : doc.at("topics"))
        inventory.topics[node.at("label").get<std::string>()] = node.at("count").get<int>();
    for (const auto& node : doc.at("kps"))
        inventory.knowledge_points[node.at("label").get<std::string>()] = node.at("count").get<int>();
    for (const auto& node : doc.at("extractions")) {
        Extraction e;
        e.seed_id = node.at("seed_id").get<std::string>();
        e.topics = node.at("topics").get<std::vector<std::string>>();
        e.knowledge_points = node.at("kps").get<std::vector<std::string>>();
        inventory.extractions.push_back(std::move(e));
    }
    if (doc.contains("dropped_seed_ids"))
        inventory.dropped_seed_ids = doc["dropped_seed_ids"].get<std::vector<std::string>>();
    return inventory;
}

} // namespace

Pipeline::StageResult Pipeline::stage_extract() {
    std::vector<SeedQuestion> seeds = train_seeds(config_.seeds_path);
    auto gw = gateway();

    struct Slot {
        std::optional<Extraction> extraction;
        bool retried = false;
        bool failed = false;
    };
    std::vector<Slot> slots(seeds.size());

    parallel_for(seeds.size(), config_.workers, [&](size_t i) {
        const SeedQuestion& seed = seeds[i];
        std::string prompt = build_extraction_prompt(seed);
        ChatRequest request = ChatRequest::single_user(prompt, config_.model_id,
                                                       config_.synthesis_temperature,
                                                       config_.max_tokens);
        auto attempt = [&](const ChatRequest& r) -> std::optional<Extraction> {
            try {
                return parse_extraction(gw->chat(r).text, seed.id);
            } catch (const Error& e) {
                if (e.code() == Errc::parse || e.code() == Errc::malformed_response)
                    return std::nullopt;
                throw;
            }
        };
        slots[i].extraction = attempt(request);
        if (!slots[i].extraction && config_.extraction_retry_failed_parse) {
            // Re-prompt once with a format nudge appended; the changed text
            // also bypasses any cached completion.
            ChatRequest retry = request;
            retry.messages.back().text +=
                "\n\nList the sections exactly as \"Topics:\" and \"Knowledge Points:\" "
                "with one item per line.";
            slots[i].retried = true;
            slots[i].extraction = attempt(retry);
        }
        slots[i].failed = !slots[i].extraction.has_value();
    });

    std::vector<Extraction> extractions;
    int64_t failures = 0;
    int64_t retried = 0;
    for (size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].retried) ++retried;
        if (slots[i].extraction) {
            extractions.push_back(std::move(*slots[i].extraction));
        } else {
            ++failures;
            std::cerr << "extract: skipped unparseable extraction for seed " << seeds[i].id << "\n";
        }
    }
    if (extractions.empty()) raise(Errc::empty_inventory, "no extraction parsed successfully");

    ConceptInventory inventory = prune_singletons(extractions);
    for (const std::string& id : inventory.dropped_seed_ids)
        std::cerr << "extract: pruning emptied extraction for seed " << id << "\n";

    Json counters;
    counters["seeds"] = seeds.size();
    counters["extracted"] = extractions.size();
    counters["parse_failures"] = failures;
    counters["retried"] = retried;
    counters["dropped_by_pruning"] = inventory.dropped_seed_ids.size();
    counters["topics"] = inventory.topics.size();
    counters["knowledge_points"] = inventory.knowledge_points.size();

    StageResult result;
    result.counters = counters;
    result.outputs.emplace_back(artifact_path("inventory.json"),
                                inventory_to_json(inventory).dump(2) + "\n");
    result.outputs.emplace_back(artifact_path("extract.stats.json"), counters.dump(2) + "\n");
    return result;
}

Pipeline::StageResult Pipeline::stage_build_graph() {
    Json doc = Json::parse(read_text_file(artifact_path("inventory.json")));
    ConceptInventory inventory = inventory_from_json(doc);
    ConceptGraph graph = ConceptGraph::build(inventory, config_.epsilon);

    Json counters;
    counters["topics"] = graph.topics().size();
    counters["kps"] = graph.kps().size();
    counters["tt_edges"] = graph.edge_count(Subgraph::topic_topic);
    counters["tk_edges"] = graph.edge_count(Subgraph::topic_kp);
    counters["kk_edges"] = graph.edge_count(Subgraph::kp_kp);
    counters["epsilon"] = graph.epsilon();

    StageResult result;
    result.counters = counters;
    result.outputs.emplace_back(artifact_path("graph.json"), graph.serialize());
    result.outputs.emplace_back(artifact_path("build-graph.stats.json"), counters.dump(2) + "\n");
    return result;
}

Pipeline::StageResult Pipeline::stage_sample() {
    ConceptGraph graph = ConceptGraph::load(artifact_path("graph.json"));
    WalkPolicy policy = config_.walk;

    std::vector<Json> lines;
    EnumerationStats stats =
        enumerate_compositions(graph, policy, config_.epochs, [&](const ConceptComposition& c) {
            Json line;
            line["id"] = c.id;
            line["topics"] = c.topics;
            line["kps"] = c.kps;
            Json trace = Json::array();
            for (const TraceStep& step : c.trace) trace.push_back({step.phase, step.node});
            line["trace"] = trace;
            line["epoch"] = c.epoch;
            line["start_topic"] = c.start_topic;
            lines.push_back(std::move(line));
            return true;
        });

    Json counters;
    counters["attempted"] = stats.attempted;
    counters["dead_ends"] = stats.dead_ends;
    counters["duplicates"] = stats.duplicates;
    counters["emitted"] = stats.emitted;
    counters["epochs"] = config_.epochs;

    StageResult result;
    result.counters = counters;
    result.outputs.emplace_back(artifact_path("compositions.jsonl"), jsonl_to_string(lines));
    result.outputs.emplace_back(artifact_path("sample.stats.json"), counters.dump(2) + "\n");
    return result;
}

namespace {

ConceptComposition composition_from_json(const Json& line) {
    ConceptComposition c;
    c.id = line.at("id").get<std::string>();
    c.topics = line.at("topics").get<std::vector<std::string>>();
    c.kps = line.at("kps").get<std::vector<std::string>>();
    c.epoch = line.value("epoch", int64_t{0});
    c.start_topic = line.value("start_topic", "");
    return c;
}

} // namespace

Pipeline::StageResult Pipeline::stage_generate() {
    std::vector<Json> composition_lines = read_jsonl(artifact_path("compositions.jsonl"));
    Json inventory_doc = Json::parse(read_text_file(artifact_path("inventory.json")));
    ConceptInventory inventory = inventory_from_json(inventory_doc);
    std::vector<SeedQuestion> seeds = train_seeds(config_.seeds_path);

    // Exemplar pool: seed question + answer joined with the seed's pruned
    // extraction record (the only KP annotation the seeds carry).
    std::map<std::string, const SeedQuestion*> seed_by_id;
    for (const SeedQuestion& seed : seeds) seed_by_id[seed.id] = &seed;
    std::vector<FewShotExemplar> pool;
    for (const Extraction& e : inventory.extractions) {
        auto it = seed_by_id.find(e.seed_id);
        if (it == seed_by_id.end()) continue;
        FewShotExemplar exemplar;
        exemplar.seed_id = e.seed_id;
        exemplar.question = it->second->question;
        exemplar.solution = it->second->answer;
        exemplar.kp_set.insert(e.knowledge_points.begin(), e.knowledge_points.end());
        pool.push_back(std::move(exemplar));
    }
    if (pool.size() < config_.k_fewshot)
        raise(Errc::pool_too_small, "exemplar pool smaller than k_fewshot");

    auto gw = gateway();

    struct Slot {
        std::optional<QAPair> pair;
        bool retried = false;
        bool judge_failed = false;
    };
    std::vector<Slot> slots(composition_lines.size());

    parallel_for(composition_lines.size(), config_.workers, [&](size_t i) {
        ConceptComposition composition = composition_from_json(composition_lines[i]);
        std::vector<FewShotExemplar> exemplars =
            select_fewshot(composition, pool, config_.k_fewshot);
        std::string prompt = build_generation_prompt(composition, exemplars);
        ChatRequest request = ChatRequest::single_user(prompt, config_.model_id,
                                                       config_.synthesis_temperature,
                                                       config_.max_tokens);

        auto attempt = [&](const ChatRequest& r) -> std::optional<QAPair> {
            try {
                QAPair pair = parse_qa(gw->chat(r).text);
                pair.composition_id = composition.id;
                for (const FewShotExemplar& e : exemplars) pair.exemplar_ids.push_back(e.seed_id);
                pair.model_id = config_.model_id;
                pair.prompt_hash = prompt_hash(r);
                return pair;
            } catch (const Error& e) {
                if (e.code() == Errc::parse || e.code() == Errc::malformed_response)
                    return std::nullopt;
                throw;
            }
        };

        slots[i].pair = attempt(request);
        if (!slots[i].pair && config_.generation_retry_failed_parse) {
            ChatRequest retry = request;
            retry.messages.back().text +=
                "\n\nRespond with exactly one \"Question:\" section followed by one "
                "\"Solution:\" section.";
            slots[i].retried = true;
            slots[i].pair = attempt(retry);
        }

        if (slots[i].pair && config_.validate_generated) {
            try {
                slots[i].pair = validate_pair(*slots[i].pair, *gw, config_.judge_model_id,
                                              config_.max_tokens);
            } catch (const Error& e) {
                if (e.code() != Errc::judge_unavailable) throw;
                slots[i].judge_failed = true; // keep the unvalidated pair
            }
        }
    });

    std::vector<Json> lines;
    int64_t parse_failures = 0;
    int64_t retried = 0;
    int64_t replaced = 0;
    int64_t judge_failures = 0;
    for (size_t i = 0; i < slots.size(); ++i) {
        if (slots[i].retried) ++retried;
        if (slots[i].judge_failed) ++judge_failures;
        if (!slots[i].pair) {
            ++parse_failures;
            std::cerr << "generate: dropped unparseable generation for composition "
                      << composition_lines[i].value("id", "?") << "\n";
            continue;
        }
        const QAPair& pair = *slots[i].pair;
        if (pair.replaced) ++replaced;
        Json line;
        line["question"] = pair.question;
        line["solution"] = pair.solution;
        line["composition_id"] = pair.composition_id;
        line["exemplar_ids"] = pair.exemplar_ids;
        line["model_id"] = pair.model_id;
        line["prompt_hash"] = pair.prompt_hash;
        line["replaced"] = pair.replaced;
        lines.push_back(std::move(line));
    }

    Json counters;
    counters["compositions"] = composition_lines.size();
    counters["generated"] = lines.size();
    counters["parse_failures"] = parse_failures;
    counters["retried"] = retried;
    counters["validated"] = config_.validate_generated;
    counters["replaced"] = replaced;
    counters["judge_failures"] = judge_failures;
    counters["yield"] = composition_lines.empty()
                            ? 0.0
                            : static_cast<double>(lines.size()) /
                                  static_cast<double>(composition_lines.size());

    StageResult result;
    result.counters = counters;
    result.outputs.emplace_back(artifact_path("generated.jsonl"), jsonl_to_string(lines));
    result.outputs.emplace_back(artifact_path("generate.stats.json"), counters.dump(2) + "\n");
    return result;
}

namespace {

std::vector<TestQuestion> manifest_test_questions(const DatasetManifest& manifest) {
    std::vector<TestQuestion> questions;
    for (const DatasetEntry& entry : manifest.datasets) {
        if (entry.test_path.empty()) continue;
        for (const SeedQuestion& record : load_dataset(entry.test_path)) {
            if (record.split != Split::test) continue;
            questions.push_back({entry.name + "/" + record.id, record.question});
        }
    }
    return questions;
}

} // namespace

Pipeline::StageResult Pipeline::stage_decontaminate() {
    std::vector<Json> generated = read_jsonl(artifact_path("generated.jsonl"));
    DatasetManifest manifest = load_manifest(config_.manifest_path);
    std::vector<TestQuestion> test_questions = manifest_test_questions(manifest);
    if (test_questions.empty()) raise(Errc::stage, "manifest provides no test questions");

    ContaminationIndex index(test_questions, config_.ngram);

    std::vector<Json> surviving;
    std::vector<Json> report;
    int64_t flagged_exact = 0;
    int64_t flagged_ngram = 0;
    for (const Json& line : generated) {
        const std::string candidate = line.at("question").get<std::string>();
        ContaminationVerdict verdict = index.check(candidate, config_.threshold);
        Json entry;
        entry["candidate_id"] = line.value("composition_id", "");
        entry["flagged"] = verdict.flagged;
        entry["rule"] = verdict.rule;
        entry["matched_test_id"] = verdict.matched_test_id;
        report.push_back(std::move(entry));
        if (verdict.flagged) {
            if (verdict.rule == "exact") ++flagged_exact;
            else ++flagged_ngram;
        } else {
            surviving.push_back(line);
        }
    }

    Json counters;
    counters["candidates"] = generated.size();
    counters["test_questions"] = index.question_count();
    counters["flagged_exact"] = flagged_exact;
    counters["flagged_ngram"] = flagged_ngram;
    counters["surviving"] = surviving.size();

    StageResult result;
    result.counters = counters;
    result.outputs.emplace_back(artifact_path("filtered.jsonl"), jsonl_to_string(surviving));
    result.outputs.emplace_back(artifact_path("decontam_report.jsonl"), jsonl_to_string(report));
    result.outputs.emplace_back(artifact_path("decontaminate.stats.json"), counters.dump(2) + "\n");
    return result;
}

Pipeline::StageResult Pipeline::stage_emit() {
    std::vector<Json> filtered = read_jsonl(artifact_path("filtered.jsonl"));
    std::vector<SeedQuestion> seeds = train_seeds(config_.seeds_path);

    std::vector<QAPair> generated;
    generated.reserve(filtered.size());
    for (const Json& line : filtered) {
        QAPair pair;
        pair.question = line.at("question").get<std::string>();
        pair.solution = line.at("solution").get<std::string>();
        pair.composition_id = line.value("composition_id", "");
        generated.push_back(std::move(pair));
    }

    std::vector<TrainingRecord> records = merge_training_sets(generated, seeds);

    std::vector<Json> lines;
    lines.reserve(records.size());
    for (const TrainingRecord& record : records) {
        Json line;
        line["prompt"] = record.prompt;
        line["completion"] = record.completion;
        line["origin"] = record.origin == Origin::seed ? "seed" : "generated";
        lines.push_back(std::move(line));
    }

    Json counters;
    counters["seed_records"] = seeds.size();
    counters["generated_records"] = generated.size();
    counters["total"] = records.size();

    StageResult result;
    result.counters = counters;
    result.outputs.emplace_back(artifact_path("dataset.jsonl"), jsonl_to_string(lines));
    result.outputs.emplace_back(artifact_path("emit.stats.json"), counters.dump(2) + "\n");
    return result;
}

namespace {

// Closed-loop driver for smoke tests: answers every prompt with the gold
// answer of the question it was rendered from.
class EchoDriver : public ModelDriver {
  public:
    EchoDriver(const std::vector<EvalItem>& items, const EvalConfig& config) {
        for (const EvalItem& item : items)
            by_prompt_[render_eval_prompt(item.question, config)] = item.gold;
    }
    std::string generate(const std::string& prompt) override {
        auto it = by_prompt_.find(prompt);
        if (it == by_prompt_.end()) return "";
        return "The answer is " + it->second + ".";
    }

  private:
    std::map<std::string, std::string> by_prompt_;
};

// Greedy-decoding contract: temperature pinned to 0, single completion.
class GatewayDriver : public ModelDriver {
  public:
    GatewayDriver(std::shared_ptr<Gateway> gateway, std::string model_id, int max_tokens)
        : gateway_(std::move(gateway)), model_id_(std::move(model_id)), max_tokens_(max_tokens) {}
    std::string generate(const std::string& prompt) override {
        return gateway_->chat(ChatRequest::single_user(prompt, model_id_, 0.0, max_tokens_)).text;
    }

  private:
    std::shared_ptr<Gateway> gateway_;
    std::string model_id_;
    int max_tokens_;
};

} // namespace

Pipeline::StageResult Pipeline::stage_evaluate() {
    DatasetManifest manifest = load_manifest(config_.manifest_path);

    std::vector<std::string> dataset_names;
    std::vector<EvalItem> items;
    for (const DatasetEntry& entry : manifest.datasets) {
        if (!config_.eval.datasets.empty() &&
            std::find(config_.eval.datasets.begin(), config_.eval.datasets.end(), entry.name) ==
                config_.eval.datasets.end())
            continue;
        dataset_names.push_back(entry.name);
        if (entry.test_path.empty()) continue;
        for (const SeedQuestion& record : load_dataset(entry.test_path)) {
            if (record.split != Split::test) continue;
            items.push_back({entry.name, record.id, record.question, record.answer});
        }
    }
    if (items.empty()) raise(Errc::stage, "no test items selected for evaluation");

    std::unique_ptr<ModelDriver> driver;
    if (config_.eval_driver == "echo") {
        driver = std::make_unique<EchoDriver>(items, config_.eval);
    } else if (config_.eval_driver == "gateway") {
        driver = std::make_unique<GatewayDriver>(gateway(), config_.model_id, config_.max_tokens);
    } else {
        raise(Errc::invalid_argument, "unknown eval driver: " + config_.eval_driver);
    }

    std::vector<EvalRecord> records = run_eval(*driver, items, config_.eval);
    EvalReport report = aggregate(records, dataset_names);

    std::vector<Json> record_lines;
    record_lines.reserve(records.size());
    for (const EvalRecord& record : records) {
        Json line;
        line["dataset"] = record.dataset;
        line["id"] = record.id;
        line["gold"] = record.gold;
        line["completion"] = record.completion;
        line["extracted"] = record.extracted ? Json(*record.extracted) : Json(nullptr);
        line["verdict"] = record.verdict;
        record_lines.push_back(std::move(line));
    }

    Json report_doc;
    report_doc["datasets"] = Json::array();
    for (const DatasetScore& score : report.datasets)
        report_doc["datasets"].push_back({{"name", score.name},
                                          {"total", score.total},
                                          {"correct", score.correct},
                                          {"accuracy", score.accuracy}});
    report_doc["micro"] = report.micro;
    report_doc["macro"] = report.macro;
    report_doc["total"] = report.total;
    report_doc["correct"] = report.correct;

    StageResult result;
    result.counters = report_doc;
    result.outputs.emplace_back(artifact_path("eval_records.jsonl"), jsonl_to_string(record_lines));
    result.outputs.emplace_back(artifact_path("report.json"), report_doc.dump(2) + "\n");
    return result;
}

// ---------------------------------------------------------------------------
// Stats

Json Pipeline::stats() const {
    Json doc;
    doc["work_dir"] = config_.work_dir.string();
    for (const std::string& stage : kStageNames) {
        fs::path stats_file = artifact_path(stage + ".stats.json");
        if (stage == "evaluate") stats_file = artifact_path("report.json");
        if (fs::exists(stats_file)) {
            Json parsed = Json::parse(read_text_file(stats_file), nullptr, false);
            if (!parsed.is_discarded()) doc[stage] = parsed;
        }
    }
    // Degree histograms: degree -> node count, per sub-graph (topic side of
    // the hybrid graph).
    fs::path graph_path = artifact_path("graph.json");
    if (fs::exists(graph_path)) {
        ConceptGraph graph = ConceptGraph::load(graph_path);
        auto histogram = [&](Subgraph subgraph, size_t nodes) {
            std::map<size_t, int64_t> buckets;
            for (size_t i = 0; i < nodes; ++i)
                buckets[graph.neighbors(subgraph, static_cast<uint32_t>(i)).size()]++;
            Json out = Json::object();
            for (const auto& [degree, count] : buckets) out[std::to_string(degree)] = count;
            return out;
        };
        Json degrees;
        degrees["tt"] = histogram(Subgraph::topic_topic, graph.topics().size());
        degrees["tk_topic_side"] = histogram(Subgraph::topic_kp, graph.topics().size());
        degrees["kk"] = histogram(Subgraph::kp_kp, graph.kps().size());
        doc["graph_degrees"] = degrees;
    }
    return doc;
}

} // namespace mathsmith
