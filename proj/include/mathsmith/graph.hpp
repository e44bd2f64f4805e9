#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mathsmith/concepts.hpp"
#include "mathsmith/rng.hpp"

namespace mathsmith {

enum class Subgraph { topic_topic, topic_kp, kp_kp };
const char* subgraph_name(Subgraph subgraph);

// Tri-partite co-occurrence graph over topics and knowledge points.
// Three undirected edge sets (topic-topic, topic-KP, KP-KP) carry raw
// co-occurrence counts; the walk weights each edge as log(count + epsilon).
class ConceptGraph {
  public:
    struct Neighbor {
        uint32_t node; // index into topics() or kps() depending on sub-graph
        int64_t count;
    };

    static ConceptGraph build(const ConceptInventory& inventory, double epsilon);

    double epsilon() const { return epsilon_; }
    const std::vector<std::string>& topics() const { return topics_; }
    const std::vector<std::string>& kps() const { return kps_; }
    const std::vector<int64_t>& topic_counts() const { return topic_counts_; }
    const std::vector<int64_t>& kp_counts() const { return kp_counts_; }

    // Neighbors sorted by node index; empty when isolated in that sub-graph.
    // For topic_kp the node is a topic index and neighbors are KP indices.
    const std::vector<Neighbor>& neighbors(Subgraph subgraph, uint32_t node) const;

    int64_t edge_count(Subgraph subgraph) const;
    int64_t total_weight(Subgraph subgraph) const;
    int64_t weight(Subgraph subgraph, const std::string& u, const std::string& v) const;

    uint32_t topic_index(const std::string& label) const; // raises unknown_label
    uint32_t kp_index(const std::string& label) const;

    std::string serialize() const; // node tables then per-sub-graph edge triples
    void save(const std::filesystem::path& path) const;
    static ConceptGraph load(const std::filesystem::path& path);

  private:
    double epsilon_ = 1e-5;
    std::vector<std::string> topics_;
    std::vector<std::string> kps_;
    std::vector<int64_t> topic_counts_;
    std::vector<int64_t> kp_counts_;
    // adjacency[subgraph][node] -> sorted neighbor list. For topic_kp the
    // forward table is indexed by topic; kp_to_topic_ is kept for symmetry
    // checks and degree stats.
    std::vector<std::vector<Neighbor>> tt_;
    std::vector<std::vector<Neighbor>> tk_;
    std::vector<std::vector<Neighbor>> kk_;
    std::vector<std::vector<Neighbor>> kp_to_topic_;

    friend struct GraphAccess;
};

// Eq.-style transition law: probability of stepping from `node` to each
// neighbor, computed as a softmax over log(count + epsilon) adjusted
// weights. Probabilities are positive and sum to 1. Raises
// Errc::isolated_node when the node has no neighbors in that sub-graph.
std::vector<double> transition_distribution(const ConceptGraph& graph, Subgraph subgraph,
                                            uint32_t node);

struct WalkPolicy {
    int topic_steps_min = 1;
    int topic_steps_max = 2;
    int kp_steps_min = 0;
    int kp_steps_max = 4;
    uint64_t seed = 0;
};

struct TraceStep {
    std::string phase; // "start", "tt", "tk", "kk"
    std::string node;
};

struct ConceptComposition {
    std::string id;
    std::vector<std::string> topics; // deduplicated, insertion order, 1..3
    std::vector<std::string> kps;    // deduplicated, insertion order, 1..5
    std::vector<TraceStep> trace;
    int64_t epoch = 0;
    std::string start_topic;

    // Order-insensitive identity used for global deduplication.
    std::string dedup_key() const;
};

// One four-phase walk: 1-2 steps in the topic graph, one topic->KP step,
// 0-4 steps in the KP graph. Revisits consume a step but the sets
// deduplicate. A phase truncates early if the current node is isolated in
// the phase's sub-graph; if the topic->KP step is impossible the walk is a
// dead end (Errc::dead_end) because a composition must contain a KP.
ConceptComposition sample_composition(const ConceptGraph& graph, const WalkPolicy& policy,
                                      uint32_t start_topic, Rng& rng);

struct EnumerationStats {
    int64_t attempted = 0;
    int64_t dead_ends = 0;
    int64_t duplicates = 0;
    int64_t emitted = 0;
};

// Iterates every topic once per epoch as the walk start, deduplicates
// compositions globally by their (topics, kps) sets, and feeds survivors to
// the sink in a deterministic order. Each walk draws from its own stream
// derived from (policy.seed, epoch, topic index), so the output is
// reproducible and independent of scheduling. Sink returns false to stop.
EnumerationStats enumerate_compositions(const ConceptGraph& graph, const WalkPolicy& policy,
                                        int64_t epochs,
                                        const std::function<bool(const ConceptComposition&)>& sink);

} // namespace mathsmith
