#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace mathsmith {

// Matching canon: lowercase, whitespace runs collapsed to single spaces,
// punctuation stripped except digits, letters and the math operators
// + - * / = ^ . , (bytes >= 0x80 pass through). Idempotent.
std::string normalize_for_matching(const std::string& text);

struct TestQuestion {
    std::string id;
    std::string question;
};

struct ContaminationVerdict {
    bool flagged = false;
    std::string rule;            // "exact" or "ngram"; empty when clean
    std::string matched_test_id; // empty when clean
};

// Exact-match set plus a word-level n-gram inverted index over normalized
// benchmark test questions. Immutable once built; queries are pure.
class ContaminationIndex {
  public:
    ContaminationIndex(const std::vector<TestQuestion>& test_questions, size_t n);

    size_t ngram_size() const { return n_; }
    size_t question_count() const { return exact_.size(); }

    // Flagged when the normalized candidate equals an indexed question, or
    // when at least `threshold` of the candidate's n-grams appear in the
    // index. The verdict names the rule and the colliding test question.
    ContaminationVerdict check(const std::string& candidate, double threshold) const;

  private:
    size_t n_;
    std::unordered_map<std::string, std::string> exact_;            // normalized -> test id
    std::unordered_map<uint64_t, std::vector<uint32_t>> ngrams_;    // ngram hash -> question ids
    std::vector<std::string> ids_;
};

} // namespace mathsmith
