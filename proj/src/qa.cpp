#include "mathsmith/qa.hpp"

#include <algorithm>

#include "mathsmith/errors.hpp"
#include "mathsmith/prompts.hpp"
#include "mathsmith/text.hpp"

namespace mathsmith {

double jaccard_distance(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) raise(Errc::undefined_distance, "both sets empty");
    size_t intersection = 0;
    for (const std::string& item : a) intersection += b.count(item);
    size_t unions = a.size() + b.size() - intersection;
    return 1.0 - static_cast<double>(intersection) / static_cast<double>(unions);
}

std::vector<FewShotExemplar> select_fewshot(const ConceptComposition& composition,
                                            const std::vector<FewShotExemplar>& pool, size_t k) {
    if (k < 1) raise(Errc::precondition, "k must be >= 1");
    if (pool.size() < k)
        raise(Errc::pool_too_small, "pool has " + std::to_string(pool.size()) +
                                        " exemplars, need " + std::to_string(k));

    std::set<std::string> kp_set(composition.kps.begin(), composition.kps.end());
    std::vector<std::pair<double, const FewShotExemplar*>> scored;
    scored.reserve(pool.size());
    for (const FewShotExemplar& exemplar : pool)
        scored.emplace_back(jaccard_distance(exemplar.kp_set, kp_set), &exemplar);
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return a.second->seed_id < b.second->seed_id;
    });

    std::vector<FewShotExemplar> selected;
    selected.reserve(k);
    for (size_t i = 0; i < k; ++i) selected.push_back(*scored[i].second);
    return selected;
}

std::string format_exemplar_block(const std::vector<FewShotExemplar>& exemplars) {
    std::string block;
    for (size_t i = 0; i < exemplars.size(); ++i) {
        if (i > 0) block += "\n\n";
        block += "Question: " + exemplars[i].question + "\n";
        block += "Solution: " + exemplars[i].solution;
    }
    return block;
}

std::string build_generation_prompt(const ConceptComposition& composition,
                                    const std::vector<FewShotExemplar>& exemplars) {
    auto one_per_line = [](const std::vector<std::string>& labels) {
        std::string out;
        for (size_t i = 0; i < labels.size(); ++i) {
            if (i > 0) out += '\n';
            out += labels[i];
        }
        return out;
    };
    std::string prompt = prompts::kQaGeneration;
    prompt = replace_all(prompt, "{few_shot_examples}", format_exemplar_block(exemplars));
    prompt = replace_all(prompt, "{topics}", one_per_line(composition.topics));
    prompt = replace_all(prompt, "{knowledge_points}", one_per_line(composition.kps));
    return prompt;
}

QAPair parse_qa(const std::string& response) {
    if (trim(response).empty()) raise(Errc::precondition, "empty generation response");

    size_t q_marker = find_ci(response, "question:");
    if (q_marker == std::string::npos) raise(Errc::parse, "missing Question: marker");
    size_t q_start = q_marker + std::string("question:").size();
    size_t s_marker = find_ci(response, "solution:", q_start);
    if (s_marker == std::string::npos) raise(Errc::parse, "missing Solution: marker");
    size_t s_start = s_marker + std::string("solution:").size();

    QAPair pair;
    pair.question = trim(response.substr(q_start, s_marker - q_start));
    pair.solution = trim(response.substr(s_start));
    if (pair.question.empty()) raise(Errc::parse, "empty question part");
    if (pair.solution.empty()) raise(Errc::parse, "empty solution part");
    return pair;
}

QAPair validate_pair(const QAPair& pair, Gateway& gateway, const std::string& judge_model_id,
                     int max_tokens) {
    std::string reference;
    try {
        ChatRequest solve = ChatRequest::single_user(
            "Act as a Math Teacher and solve the provided question. Show your work and finish "
            "with the final answer on its own line as \"The answer is <answer>.\"\n\n"
            "Provided question: " + pair.question,
            judge_model_id, 0.0, max_tokens);
        reference = gateway.chat(solve).text;

        ChatRequest judge = ChatRequest::single_user(
            "Act as a Math Teacher and decide whether the proposed solution reaches the same "
            "final answer as the reference solution. Reply with exactly one word: CORRECT or "
            "INCORRECT.\n\n"
            "Question: " + pair.question + "\n\n"
            "Reference solution: " + reference + "\n\n"
            "Proposed solution: " + pair.solution + "\n\n"
            "Verdict:",
            judge_model_id, 0.0, max_tokens);
        std::string verdict = lower_ascii(trim(gateway.chat(judge).text));

        // "incorrect" contains "correct"; test it first.
        if (verdict.find("incorrect") != std::string::npos) {
            QAPair corrected = pair;
            corrected.solution = reference;
            corrected.replaced = true;
            return corrected;
        }
        if (verdict.find("correct") != std::string::npos) return pair;
        raise(Errc::judge_unavailable, "judge returned no verdict: " + verdict);
    } catch (const Error& e) {
        if (e.code() == Errc::judge_unavailable) throw;
        raise(Errc::judge_unavailable, std::string("judge request failed: ") + e.what());
    }
}

} // namespace mathsmith
