#include "mathsmith/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include "mathsmith/errors.hpp"
#include "mathsmith/io.hpp"

namespace mathsmith {

const char* subgraph_name(Subgraph subgraph) {
    switch (subgraph) {
        case Subgraph::topic_topic: return "tt";
        case Subgraph::topic_kp: return "tk";
        case Subgraph::kp_kp: return "kk";
    }
    return "tt";
}

namespace {

using EdgeMap = std::map<std::pair<uint32_t, uint32_t>, int64_t>;

void bump_undirected(EdgeMap& edges, uint32_t a, uint32_t b) {
    if (a == b) return;
    if (a > b) std::swap(a, b);
    edges[{a, b}]++;
}

std::vector<std::vector<ConceptGraph::Neighbor>> to_adjacency(const EdgeMap& edges, size_t nodes,
                                                              bool directed_forward_only) {
    std::vector<std::vector<ConceptGraph::Neighbor>> adjacency(nodes);
    for (const auto& [edge, count] : edges) {
        adjacency[edge.first].push_back({edge.second, count});
        if (!directed_forward_only) adjacency[edge.second].push_back({edge.first, count});
    }
    for (auto& list : adjacency) {
        std::sort(list.begin(), list.end(),
                  [](const auto& a, const auto& b) { return a.node < b.node; });
    }
    return adjacency;
}

} // namespace

struct GraphAccess {
    static ConceptGraph make(double epsilon, std::vector<std::string> topics,
                             std::vector<std::string> kps, std::vector<int64_t> topic_counts,
                             std::vector<int64_t> kp_counts, const EdgeMap& tt, const EdgeMap& tk,
                             const EdgeMap& kk) {
        ConceptGraph graph;
        graph.epsilon_ = epsilon;
        graph.topics_ = std::move(topics);
        graph.kps_ = std::move(kps);
        graph.topic_counts_ = std::move(topic_counts);
        graph.kp_counts_ = std::move(kp_counts);
        graph.tt_ = to_adjacency(tt, graph.topics_.size(), false);
        graph.kk_ = to_adjacency(kk, graph.kps_.size(), false);
        // tk pairs are stored as (topic index, kp index); both directions kept.
        graph.tk_.assign(graph.topics_.size(), {});
        graph.kp_to_topic_.assign(graph.kps_.size(), {});
        for (const auto& [edge, count] : tk) {
            graph.tk_[edge.first].push_back({edge.second, count});
            graph.kp_to_topic_[edge.second].push_back({edge.first, count});
        }
        for (auto& list : graph.tk_)
            std::sort(list.begin(), list.end(),
                      [](const auto& a, const auto& b) { return a.node < b.node; });
        for (auto& list : graph.kp_to_topic_)
            std::sort(list.begin(), list.end(),
                      [](const auto& a, const auto& b) { return a.node < b.node; });
        return graph;
    }
};

ConceptGraph ConceptGraph::build(const ConceptInventory& inventory, double epsilon) {
    if (inventory.extractions.empty()) raise(Errc::empty_inventory, "inventory has no extractions");
    if (!(epsilon > 0)) raise(Errc::invalid_argument, "epsilon must be > 0");

    std::vector<std::string> topics;
    std::vector<std::string> kps;
    std::vector<int64_t> topic_counts;
    std::vector<int64_t> kp_counts;
    std::map<std::string, uint32_t> topic_index;
    std::map<std::string, uint32_t> kp_index;
    for (const auto& [label, count] : inventory.topics) {
        topic_index[label] = static_cast<uint32_t>(topics.size());
        topics.push_back(label);
        topic_counts.push_back(count);
    }
    for (const auto& [label, count] : inventory.knowledge_points) {
        kp_index[label] = static_cast<uint32_t>(kps.size());
        kps.push_back(label);
        kp_counts.push_back(count);
    }

    EdgeMap tt, tk, kk;
    for (const Extraction& e : inventory.extractions) {
        std::vector<uint32_t> t_ids, k_ids;
        for (const std::string& t : e.topics) {
            auto it = topic_index.find(t);
            if (it == topic_index.end())
                raise(Errc::unknown_label, "extraction topic not in inventory: " + t);
            t_ids.push_back(it->second);
        }
        for (const std::string& k : e.knowledge_points) {
            auto it = kp_index.find(k);
            if (it == kp_index.end())
                raise(Errc::unknown_label, "extraction KP not in inventory: " + k);
            k_ids.push_back(it->second);
        }
        for (size_t i = 0; i < t_ids.size(); ++i)
            for (size_t j = i + 1; j < t_ids.size(); ++j) bump_undirected(tt, t_ids[i], t_ids[j]);
        for (size_t i = 0; i < k_ids.size(); ++i)
            for (size_t j = i + 1; j < k_ids.size(); ++j) bump_undirected(kk, k_ids[i], k_ids[j]);
        for (uint32_t t : t_ids)
            for (uint32_t k : k_ids) tk[{t, k}]++;
    }

    return GraphAccess::make(epsilon, std::move(topics), std::move(kps), std::move(topic_counts),
                             std::move(kp_counts), tt, tk, kk);
}

const std::vector<ConceptGraph::Neighbor>& ConceptGraph::neighbors(Subgraph subgraph,
                                                                   uint32_t node) const {
    switch (subgraph) {
        case Subgraph::topic_topic: return tt_.at(node);
        case Subgraph::topic_kp: return tk_.at(node);
        case Subgraph::kp_kp: return kk_.at(node);
    }
    return tt_.at(node);
}

int64_t ConceptGraph::edge_count(Subgraph subgraph) const {
    int64_t total = 0;
    switch (subgraph) {
        case Subgraph::topic_topic:
            for (const auto& list : tt_) total += static_cast<int64_t>(list.size());
            return total / 2;
        case Subgraph::topic_kp:
            for (const auto& list : tk_) total += static_cast<int64_t>(list.size());
            return total;
        case Subgraph::kp_kp:
            for (const auto& list : kk_) total += static_cast<int64_t>(list.size());
            return total / 2;
    }
    return 0;
}

int64_t ConceptGraph::total_weight(Subgraph subgraph) const {
    int64_t total = 0;
    auto sum = [&](const std::vector<std::vector<Neighbor>>& adjacency) {
        for (const auto& list : adjacency)
            for (const Neighbor& n : list) total += n.count;
    };
    switch (subgraph) {
        case Subgraph::topic_topic: sum(tt_); return total / 2;
        case Subgraph::topic_kp: sum(tk_); return total;
        case Subgraph::kp_kp: sum(kk_); return total / 2;
    }
    return 0;
}

uint32_t ConceptGraph::topic_index(const std::string& label) const {
    auto it = std::lower_bound(topics_.begin(), topics_.end(), label);
    if (it == topics_.end() || *it != label) raise(Errc::unknown_label, "unknown topic: " + label);
    return static_cast<uint32_t>(it - topics_.begin());
}

uint32_t ConceptGraph::kp_index(const std::string& label) const {
    auto it = std::lower_bound(kps_.begin(), kps_.end(), label);
    if (it == kps_.end() || *it != label) raise(Errc::unknown_label, "unknown KP: " + label);
    return static_cast<uint32_t>(it - kps_.begin());
}

int64_t ConceptGraph::weight(Subgraph subgraph, const std::string& u, const std::string& v) const {
    uint32_t a, b;
    switch (subgraph) {
        case Subgraph::topic_topic:
            a = topic_index(u);
            b = topic_index(v);
            break;
        case Subgraph::topic_kp:
            a = topic_index(u);
            b = kp_index(v);
            break;
        case Subgraph::kp_kp:
            a = kp_index(u);
            b = kp_index(v);
            break;
        default: return 0;
    }
    for (const Neighbor& n : neighbors(subgraph, a)) {
        if (n.node == b) return n.count;
    }
    return 0;
}

std::vector<double> transition_distribution(const ConceptGraph& graph, Subgraph subgraph,
                                            uint32_t node) {
    const auto& neighbors = graph.neighbors(subgraph, node);
    if (neighbors.empty())
        raise(Errc::isolated_node, std::string("node has no neighbors in sub-graph ") +
                                       subgraph_name(subgraph));

    // Softmax over adjusted weights f = log(count + epsilon), stabilized by
    // subtracting the max before exponentiation.
    std::vector<double> logits(neighbors.size());
    double max_logit = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < neighbors.size(); ++i) {
        logits[i] = std::log(static_cast<double>(neighbors[i].count) + graph.epsilon());
        max_logit = std::max(max_logit, logits[i]);
    }
    double denom = 0.0;
    for (double& logit : logits) {
        logit = std::exp(logit - max_logit);
        denom += logit;
    }
    for (double& logit : logits) logit /= denom;
    return logits;
}

std::string ConceptComposition::dedup_key() const {
    std::vector<std::string> t = topics;
    std::vector<std::string> k = kps;
    std::sort(t.begin(), t.end());
    std::sort(k.begin(), k.end());
    std::string key;
    for (const std::string& label : t) {
        key += label;
        key += '\x1f';
    }
    key += '\x1e';
    for (const std::string& label : k) {
        key += label;
        key += '\x1f';
    }
    return key;
}

ConceptComposition sample_composition(const ConceptGraph& graph, const WalkPolicy& policy,
                                      uint32_t start_topic, Rng& rng) {
    if (start_topic >= graph.topics().size())
        raise(Errc::unknown_label, "start topic index out of range");

    ConceptComposition composition;
    composition.start_topic = graph.topics()[start_topic];
    composition.topics.push_back(composition.start_topic);
    composition.trace.push_back({"start", composition.start_topic});

    auto add_unique = [](std::vector<std::string>& labels, const std::string& label) {
        if (std::find(labels.begin(), labels.end(), label) == labels.end())
            labels.push_back(label);
    };

    // Phase 1: 1-2 steps in the topic graph.
    uint32_t current_topic = start_topic;
    int64_t topic_steps = static_cast<int64_t>(
        rng.between(static_cast<uint64_t>(policy.topic_steps_min),
                    static_cast<uint64_t>(policy.topic_steps_max)));
    for (int64_t step = 0; step < topic_steps; ++step) {
        const auto& nbrs = graph.neighbors(Subgraph::topic_topic, current_topic);
        if (nbrs.empty()) break; // isolated mid-walk: truncate the phase
        auto probs = transition_distribution(graph, Subgraph::topic_topic, current_topic);
        current_topic = nbrs[rng.pick(probs)].node;
        const std::string& label = graph.topics()[current_topic];
        add_unique(composition.topics, label);
        composition.trace.push_back({"tt", label});
    }

    // Phase 2: exactly one step into the KP layer, departing from the
    // last-visited topic. Without it the composition would carry no KP, so
    // an isolated topic here is a dead end rather than a truncation.
    const auto& tk_nbrs = graph.neighbors(Subgraph::topic_kp, current_topic);
    if (tk_nbrs.empty())
        raise(Errc::dead_end,
              "topic has no knowledge-point edge: " + graph.topics()[current_topic]);
    auto tk_probs = transition_distribution(graph, Subgraph::topic_kp, current_topic);
    uint32_t current_kp = tk_nbrs[rng.pick(tk_probs)].node;
    composition.kps.push_back(graph.kps()[current_kp]);
    composition.trace.push_back({"tk", graph.kps()[current_kp]});

    // Phase 3: 0-4 steps in the KP graph.
    int64_t kp_steps = static_cast<int64_t>(
        rng.between(static_cast<uint64_t>(policy.kp_steps_min),
                    static_cast<uint64_t>(policy.kp_steps_max)));
    for (int64_t step = 0; step < kp_steps; ++step) {
        const auto& nbrs = graph.neighbors(Subgraph::kp_kp, current_kp);
        if (nbrs.empty()) break;
        auto probs = transition_distribution(graph, Subgraph::kp_kp, current_kp);
        current_kp = nbrs[rng.pick(probs)].node;
        const std::string& label = graph.kps()[current_kp];
        add_unique(composition.kps, label);
        composition.trace.push_back({"kk", label});
    }

    return composition;
}

EnumerationStats enumerate_compositions(const ConceptGraph& graph, const WalkPolicy& policy,
                                        int64_t epochs,
                                        const std::function<bool(const ConceptComposition&)>& sink) {
    if (epochs < 1) raise(Errc::precondition, "epochs must be >= 1");

    EnumerationStats stats;
    std::unordered_set<std::string> seen;
    const int64_t num_topics = static_cast<int64_t>(graph.topics().size());
    int64_t next_id = 0;

    for (int64_t epoch = 0; epoch < epochs; ++epoch) {
        for (int64_t topic = 0; topic < num_topics; ++topic) {
            stats.attempted++;
            // Independent stream per (epoch, topic): replays identically no
            // matter how walks are scheduled.
            Rng rng(splitmix64_at(policy.seed,
                                  static_cast<uint64_t>(epoch) * static_cast<uint64_t>(num_topics) +
                                      static_cast<uint64_t>(topic)));
            ConceptComposition composition;
            try {
                composition = sample_composition(graph, policy, static_cast<uint32_t>(topic), rng);
            } catch (const Error& e) {
                if (e.code() == Errc::dead_end) {
                    stats.dead_ends++;
                    continue;
                }
                throw;
            }
            if (!seen.insert(composition.dedup_key()).second) {
                stats.duplicates++;
                continue;
            }
            composition.epoch = epoch;
            composition.id = "c" + std::to_string(next_id++);
            stats.emitted++;
            if (!sink(composition)) return stats;
        }
    }
    return stats;
}

std::string ConceptGraph::serialize() const {
    Json doc;
    doc["epsilon"] = epsilon_;
    doc["topics"] = Json::array();
    for (size_t i = 0; i < topics_.size(); ++i)
        doc["topics"].push_back({{"label", topics_[i]}, {"count", topic_counts_[i]}});
    doc["kps"] = Json::array();
    for (size_t i = 0; i < kps_.size(); ++i)
        doc["kps"].push_back({{"label", kps_[i]}, {"count", kp_counts_[i]}});

    auto dump_edges = [](const std::vector<std::vector<Neighbor>>& adjacency, bool undirected) {
        Json edges = Json::array();
        for (uint32_t u = 0; u < adjacency.size(); ++u) {
            for (const Neighbor& n : adjacency[u]) {
                if (undirected && n.node < u) continue; // store each pair once
                edges.push_back({u, n.node, n.count});
            }
        }
        return edges;
    };
    doc["edges"] = Json::object();
    doc["edges"]["tt"] = dump_edges(tt_, true);
    doc["edges"]["tk"] = dump_edges(tk_, false);
    doc["edges"]["kk"] = dump_edges(kk_, true);
    return doc.dump(2) + "\n";
}

void ConceptGraph::save(const std::filesystem::path& path) const {
    write_text_file_atomic(path, serialize());
}

ConceptGraph ConceptGraph::load(const std::filesystem::path& path) {
    Json doc = Json::parse(read_text_file(path), nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        raise(Errc::malformed_record, "graph file is not valid JSON: " + path.string());

    std::vector<std::string> topics, kps;
    std::vector<int64_t> topic_counts, kp_counts;
    for (const auto& node : doc.at("topics")) {
        topics.push_back(node.at("label").get<std::string>());
        topic_counts.push_back(node.at("count").get<int64_t>());
    }
    for (const auto& node : doc.at("kps")) {
        kps.push_back(node.at("label").get<std::string>());
        kp_counts.push_back(node.at("count").get<int64_t>());
    }

    auto load_edges = [](const Json& edges) {
        EdgeMap out;
        for (const auto& edge : edges) {
            out[{edge.at(0).get<uint32_t>(), edge.at(1).get<uint32_t>()}] = edge.at(2).get<int64_t>();
        }
        return out;
    };
    return GraphAccess::make(doc.at("epsilon").get<double>(), std::move(topics), std::move(kps),
                             std::move(topic_counts), std::move(kp_counts),
                             load_edges(doc.at("edges").at("tt")), load_edges(doc.at("edges").at("tk")),
                             load_edges(doc.at("edges").at("kk")));
}

} // namespace mathsmith
