#pragma once

#include <map>
#include <string>
#include <vector>

namespace mathsmith {

enum class Split { train, test };
const char* split_name(Split split);
Split split_from_name(const std::string& name);

struct SeedQuestion {
    std::string id;
    std::string dataset;
    std::string question;
    std::string answer;
    Split split = Split::train;
};

// Topics and knowledge points extracted from one seed question. Labels are
// normalized and unique within each list.
struct Extraction {
    std::string seed_id;
    std::vector<std::string> topics;           // 1..2
    std::vector<std::string> knowledge_points; // 1..5
};

struct ConceptInventory {
    std::map<std::string, int> topics;           // label -> extraction count
    std::map<std::string, int> knowledge_points; // label -> extraction count
    std::vector<Extraction> extractions;
    std::vector<std::string> dropped_seed_ids;   // extractions emptied by pruning
};

// Label cleanup: trim, collapse internal whitespace, strip trailing
// punctuation. Case is preserved; near-duplicate labels that differ only in
// case stay distinct on purpose.
std::string normalize_label(const std::string& raw);

// Instantiates the concept-extraction prompt for one seed question.
std::string build_extraction_prompt(const SeedQuestion& seed);

// Recovers topics and knowledge points from a completion laid out as
// "Topics:" / "Knowledge Points:" sections with one list item per line.
// Raises Errc::parse when a section is missing or a cardinality bound
// (1-2 topics, 1-5 knowledge points) is violated.
Extraction parse_extraction(const std::string& response, const std::string& seed_id = "");

// Removes every label that occurs in exactly one extraction, then drops
// extractions left without topics or without knowledge points, iterating
// until stable so every surviving label occurs at least twice.
ConceptInventory prune_singletons(const std::vector<Extraction>& extractions);

} // namespace mathsmith
