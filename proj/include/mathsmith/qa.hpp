#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "mathsmith/gateway.hpp"
#include "mathsmith/graph.hpp"

namespace mathsmith {

struct FewShotExemplar {
    std::string seed_id;
    std::string question;
    std::string solution;
    std::set<std::string> kp_set; // non-empty
};

struct QAPair {
    std::string question;
    std::string solution;
    std::string composition_id;
    std::vector<std::string> exemplar_ids;
    std::string model_id;
    std::string prompt_hash;
    bool replaced = false; // solution swapped in by the validation pass
};

// 1 - |a∩b| / |a∪b|. Raises Errc::undefined_distance when both sets are
// empty.
double jaccard_distance(const std::set<std::string>& a, const std::set<std::string>& b);

// The k pool entries closest to the composition's KP set by Jaccard
// distance; ties broken by ascending seed_id so selection is deterministic.
std::vector<FewShotExemplar> select_fewshot(const ConceptComposition& composition,
                                            const std::vector<FewShotExemplar>& pool, size_t k);

std::string format_exemplar_block(const std::vector<FewShotExemplar>& exemplars);

// Generation prompt: topics and knowledge points one per line, exemplars as
// Question:/Solution: blocks, and the fixed response-format instruction.
std::string build_generation_prompt(const ConceptComposition& composition,
                                    const std::vector<FewShotExemplar>& exemplars);

// Splits a completion on the first top-level "Question:" marker and the
// first "Solution:" marker after it. Later occurrences of either marker
// stay inside the solution body. Raises Errc::parse when a marker is
// missing or a part is empty.
QAPair parse_qa(const std::string& response);

// Optional second-model check: asks the judge for a reference solution,
// then for a CORRECT/INCORRECT verdict on the original; on INCORRECT the
// solution is replaced and the pair is marked. Raises Errc::judge_unavailable
// when the judge cannot be reached or returns no verdict.
QAPair validate_pair(const QAPair& pair, Gateway& gateway, const std::string& judge_model_id,
                     int max_tokens = 1024);

} // namespace mathsmith
