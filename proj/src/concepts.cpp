#include "mathsmith/concepts.hpp"

#include <algorithm>
#include <optional>
#include <set>

#include "mathsmith/errors.hpp"
#include "mathsmith/prompts.hpp"
#include "mathsmith/text.hpp"

namespace mathsmith {

const char* split_name(Split split) { return split == Split::train ? "train" : "test"; }

Split split_from_name(const std::string& name) {
    if (name == "train") return Split::train;
    if (name == "test") return Split::test;
    raise(Errc::malformed_record, "unknown split: " + name);
}

std::string normalize_label(const std::string& raw) {
    std::string label = collapse_whitespace(trim(raw));
    while (!label.empty()) {
        char c = label.back();
        if (c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?') {
            label.pop_back();
        } else {
            break;
        }
    }
    return trim(label);
}

std::string build_extraction_prompt(const SeedQuestion& seed) {
    if (trim(seed.question).empty())
        raise(Errc::precondition, "seed question is empty: " + seed.id);
    return replace_all(prompts::kConceptExtraction, "{seed_question}", seed.question);
}

namespace {

// Strips a leading "1." / "2)" / "-" / "*" bullet from a list line.
std::string strip_bullet(const std::string& line) {
    size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    size_t digits = i;
    while (digits < line.size() && line[digits] >= '0' && line[digits] <= '9') ++digits;
    if (digits > i && digits < line.size() && (line[digits] == '.' || line[digits] == ')')) {
        return line.substr(digits + 1);
    }
    if (i < line.size() && (line[i] == '-' || line[i] == '*')) {
        return line.substr(i + 1);
    }
    return line;
}

struct Section {
    size_t header_line;
    size_t content_offset; // within the header line, after the colon
    bool is_topics;
};

} // namespace

Extraction parse_extraction(const std::string& response, const std::string& seed_id) {
    if (trim(response).empty()) raise(Errc::precondition, "empty extraction response");

    const std::vector<std::string> lines = split_lines(response);

    // Locate section headers; tolerant of singular/plural and case drift.
    auto classify = [](const std::string& line) -> std::optional<std::pair<bool, size_t>> {
        std::string stripped = trim(line);
        for (const char* header : {"topics:", "topic:"}) {
            if (find_ci(stripped, header) == 0) return {{true, std::string(header).size()}};
        }
        for (const char* header : {"knowledge points:", "knowledge point:"}) {
            if (find_ci(stripped, header) == 0) return {{false, std::string(header).size()}};
        }
        return std::nullopt;
    };

    std::vector<std::string> topics;
    std::vector<std::string> kps;
    bool saw_topics = false;
    bool saw_kps = false;
    std::vector<std::string>* current = nullptr;

    for (const std::string& line : lines) {
        if (auto section = classify(line)) {
            if (section->first) {
                saw_topics = true;
                current = &topics;
            } else {
                saw_kps = true;
                current = &kps;
            }
            // Inline content after the header ("Topics: Algebra").
            std::string rest = trim(line).substr(section->second);
            std::string label = normalize_label(strip_bullet(rest));
            if (!label.empty() && current) current->push_back(label);
            continue;
        }
        if (!current) continue;
        std::string label = normalize_label(strip_bullet(line));
        if (!label.empty()) current->push_back(label);
    }

    auto dedup = [](std::vector<std::string>& labels) {
        std::set<std::string> seen;
        std::vector<std::string> unique;
        for (std::string& label : labels) {
            if (seen.insert(label).second) unique.push_back(std::move(label));
        }
        labels = std::move(unique);
    };
    dedup(topics);
    dedup(kps);

    if (!saw_topics) raise(Errc::parse, "missing Topics section");
    if (!saw_kps) raise(Errc::parse, "missing Knowledge Points section");
    if (topics.empty() || topics.size() > 2)
        raise(Errc::parse, "expected 1-2 topics, got " + std::to_string(topics.size()));
    if (kps.empty() || kps.size() > 5)
        raise(Errc::parse, "expected 1-5 knowledge points, got " + std::to_string(kps.size()));

    Extraction extraction;
    extraction.seed_id = seed_id;
    extraction.topics = std::move(topics);
    extraction.knowledge_points = std::move(kps);
    return extraction;
}

ConceptInventory prune_singletons(const std::vector<Extraction>& extractions) {
    if (extractions.empty()) raise(Errc::precondition, "no extractions to prune");

    std::vector<Extraction> alive = extractions;
    std::vector<std::string> dropped;

    // Dropping an emptied extraction can orphan other labels, so iterate to
    // a fixed point; each round removes at least one label or extraction.
    while (true) {
        std::map<std::string, int> topic_counts;
        std::map<std::string, int> kp_counts;
        for (const Extraction& e : alive) {
            for (const std::string& t : e.topics) topic_counts[t]++;
            for (const std::string& k : e.knowledge_points) kp_counts[k]++;
        }

        bool changed = false;
        std::vector<Extraction> next;
        next.reserve(alive.size());
        for (Extraction& e : alive) {
            auto keep = [&](std::vector<std::string>& labels, const std::map<std::string, int>& counts) {
                auto removed = std::erase_if(labels, [&](const std::string& label) {
                    return counts.at(label) < 2;
                });
                if (removed > 0) changed = true;
            };
            keep(e.topics, topic_counts);
            keep(e.knowledge_points, kp_counts);
            if (e.topics.empty() || e.knowledge_points.empty()) {
                dropped.push_back(e.seed_id);
                changed = true;
            } else {
                next.push_back(std::move(e));
            }
        }
        alive = std::move(next);
        if (!changed) break;
        if (alive.empty()) break;
    }

    if (alive.empty()) raise(Errc::empty_inventory, "pruning removed every extraction");

    ConceptInventory inventory;
    for (const Extraction& e : alive) {
        for (const std::string& t : e.topics) inventory.topics[t]++;
        for (const std::string& k : e.knowledge_points) inventory.knowledge_points[k]++;
    }
    inventory.extractions = std::move(alive);
    std::sort(dropped.begin(), dropped.end());
    inventory.dropped_seed_ids = std::move(dropped);
    return inventory;
}

} // namespace mathsmith
