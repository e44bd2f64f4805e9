#pragma once

// Shared helpers for the end-to-end tests: builds a mock-gateway fixture
// file covering every prompt the pipeline will issue over the 20-seed
// fixture corpus, plus the matching pipeline config. Everything is derived
// with the same library calls the pipeline uses, so the replay is exact.

#include <filesystem>
#include <string>
#include <vector>

#include "mathsmith/concepts.hpp"
#include "mathsmith/graph.hpp"

namespace mathsmith::testsupport {

struct E2eWorkspace {
    std::filesystem::path root;
    std::filesystem::path config_path;
    std::filesystem::path fixtures_path; // mock gateway fixture file
    std::filesystem::path work_dir;
    // What the fixture builder planted, for assertions:
    int64_t compositions = 0;          // unique compositions the sampler will emit
    int64_t planted_exact = 0;         // mock generations echoing a test question
    int64_t planted_unparseable = 0;   // mock generations without a Solution: marker
    std::vector<std::string> planted_ids;
};

// Fixture corpus paths (checked-in files).
std::filesystem::path fixture_dir();
std::filesystem::path seeds_path();
std::filesystem::path manifest_path();

// Canned extraction responses keyed by seed id.
std::map<std::string, std::string> extraction_responses();

// The inventory the pipeline will compute from the canned responses.
ConceptInventory fixture_inventory();

// Assembles config + mock fixtures under `root` (created if missing).
E2eWorkspace build_e2e_workspace(const std::filesystem::path& root, uint64_t seed = 17,
                                 int64_t epochs = 5, size_t k_fewshot = 2);

} // namespace mathsmith::testsupport
