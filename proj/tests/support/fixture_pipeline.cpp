#include "support/fixture_pipeline.hpp"

#include <map>

#include "mathsmith/dataset_io.hpp"
#include "mathsmith/gateway.hpp"
#include "mathsmith/io.hpp"
#include "mathsmith/qa.hpp"

namespace mathsmith::testsupport {

namespace fs = std::filesystem;

fs::path fixture_dir() { return fs::path(FIXTURE_DIR); }
fs::path seeds_path() { return fixture_dir() / "seeds.jsonl"; }
fs::path manifest_path() { return fixture_dir() / "manifest.json"; }

std::map<std::string, std::string> extraction_responses() {
    Json doc = Json::parse(read_text_file(fixture_dir() / "extraction_responses.json"));
    std::map<std::string, std::string> responses;
    for (const auto& [seed_id, text] : doc.items()) responses[seed_id] = text.get<std::string>();
    return responses;
}

ConceptInventory fixture_inventory() {
    auto responses = extraction_responses();
    std::vector<Extraction> extractions;
    for (const SeedQuestion& seed : load_dataset(seeds_path())) {
        extractions.push_back(parse_extraction(responses.at(seed.id), seed.id));
    }
    return prune_singletons(extractions);
}

namespace {

std::string hash_of_prompt(const std::string& prompt) {
    ChatRequest request = ChatRequest::single_user(prompt, "mock-model", 0.7, 512);
    return prompt_hash(request);
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += sep;
        out += parts[i];
    }
    return out;
}

} // namespace

E2eWorkspace build_e2e_workspace(const fs::path& root, uint64_t seed, int64_t epochs,
                                 size_t k_fewshot) {
    fs::create_directories(root);

    E2eWorkspace ws;
    ws.root = root;
    ws.config_path = root / "config.json";
    ws.fixtures_path = root / "mock_fixtures.jsonl";
    ws.work_dir = root / "out";

    std::vector<SeedQuestion> seeds = load_dataset(seeds_path());
    auto responses = extraction_responses();

    std::vector<Json> fixture_lines;
    for (const SeedQuestion& sq : seeds) {
        Json line;
        line["hash"] = hash_of_prompt(build_extraction_prompt(sq));
        line["response"] = responses.at(sq.id);
        fixture_lines.push_back(std::move(line));
    }

    // Replay the synthesis path to learn every generation prompt in advance.
    ConceptInventory inventory = fixture_inventory();
    ConceptGraph graph = ConceptGraph::build(inventory, 1e-5);

    std::map<std::string, const SeedQuestion*> seed_by_id;
    for (const SeedQuestion& sq : seeds) seed_by_id[sq.id] = &sq;
    std::vector<FewShotExemplar> pool;
    for (const Extraction& e : inventory.extractions) {
        const SeedQuestion* sq = seed_by_id.at(e.seed_id);
        FewShotExemplar exemplar;
        exemplar.seed_id = e.seed_id;
        exemplar.question = sq->question;
        exemplar.solution = sq->answer;
        exemplar.kp_set.insert(e.knowledge_points.begin(), e.knowledge_points.end());
        pool.push_back(std::move(exemplar));
    }

    // Two planted contaminated generations (one verbatim test question, one
    // mangled but normalization-equal) and one unparseable generation.
    std::vector<SeedQuestion> arith_test = load_dataset(fixture_dir() / "mini_arith_test.jsonl");
    std::vector<SeedQuestion> algebra_test = load_dataset(fixture_dir() / "mini_algebra_test.jsonl");
    const std::string verbatim = arith_test.at(0).question;
    std::string mangled = "  " + algebra_test.at(0).question + " ";
    for (char& c : mangled) {
        if (c == 'a') c = 'A';
    }

    WalkPolicy policy;
    policy.seed = seed;
    int64_t index = 0;
    enumerate_compositions(graph, policy, epochs, [&](const ConceptComposition& composition) {
        std::vector<FewShotExemplar> exemplars = select_fewshot(composition, pool, k_fewshot);
        std::string prompt = build_generation_prompt(composition, exemplars);
        std::string response;
        if (index == 0) {
            response = "Question: " + verbatim + "\nSolution: Count the eggs carefully. The answer is 7.";
            ws.planted_exact++;
            ws.planted_ids.push_back(composition.id);
        } else if (index == 1) {
            response = "Question: " + mangled + "\nSolution: Undo each operation. The answer is 13.";
            ws.planted_exact++;
            ws.planted_ids.push_back(composition.id);
        } else if (index == 2) {
            response = "Here is a question without the required markers.";
            ws.planted_unparseable++;
        } else {
            response = "Question: Using " + join(composition.kps, "; ") + " within " +
                       composition.topics.front() + ", find the value of item " +
                       std::to_string(index) +
                       ".\nSolution: Combine the listed ideas step by step. The answer is " +
                       std::to_string(index) + ".";
        }
        Json line;
        line["hash"] = hash_of_prompt(prompt);
        line["response"] = response;
        fixture_lines.push_back(std::move(line));
        ++index;
        return true;
    });
    ws.compositions = index;

    write_jsonl_atomic(ws.fixtures_path, fixture_lines);

    Json config;
    config["work_dir"] = ws.work_dir.string();
    config["seeds_path"] = seeds_path().string();
    config["manifest_path"] = manifest_path().string();
    config["workers"] = 4;
    config["gateway"] = {{"mode", "mock"},
                         {"fixtures_path", ws.fixtures_path.string()},
                         {"model_id", "mock-model"},
                         {"temperature", 0.7},
                         {"max_tokens", 512}};
    config["graph"] = {{"epsilon", 1e-5}};
    config["walk"] = {{"seed", seed}, {"epochs", epochs}};
    config["generation"] = {{"k_fewshot", k_fewshot}};
    config["decontamination"] = {{"ngram", 8}, {"threshold", 0.6}};
    config["eval"] = {{"driver", "echo"}, {"template", "alpaca"}};
    write_text_file_atomic(ws.config_path, config.dump(2) + "\n");

    return ws;
}

} // namespace mathsmith::testsupport
