#include "mathsmith/decontamination.hpp"

#include <algorithm>
#include <map>

#include "mathsmith/errors.hpp"
#include "mathsmith/text.hpp"

namespace mathsmith {

std::string normalize_for_matching(const std::string& text) {
    std::string kept;
    kept.reserve(text.size());
    for (char c : text) {
        unsigned char uc = static_cast<unsigned char>(c);
        if (uc >= 0x80) {
            kept.push_back(c);
        } else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
            kept.push_back(c);
        } else if (c >= 'A' && c <= 'Z') {
            kept.push_back(static_cast<char>(c - 'A' + 'a'));
        } else if (c == '+' || c == '-' || c == '*' || c == '/' || c == '=' || c == '^' ||
                   c == '.' || c == ',') {
            kept.push_back(c);
        } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
            kept.push_back(' ');
        }
        // other ASCII punctuation is dropped
    }
    return trim(collapse_whitespace(kept));
}

namespace {

std::vector<std::string> words_of(const std::string& normalized) {
    std::vector<std::string> words;
    size_t start = 0;
    for (size_t i = 0; i <= normalized.size(); ++i) {
        if (i == normalized.size() || normalized[i] == ' ') {
            if (i > start) words.push_back(normalized.substr(start, i - start));
            start = i + 1;
        }
    }
    return words;
}

uint64_t ngram_hash(const std::vector<std::string>& words, size_t begin, size_t n) {
    uint64_t h = fnv1a64("");
    for (size_t i = begin; i < begin + n; ++i) {
        h = fnv1a64(words[i], h);
        h = fnv1a64(" ", h);
    }
    return h;
}

} // namespace

ContaminationIndex::ContaminationIndex(const std::vector<TestQuestion>& test_questions, size_t n)
    : n_(n) {
    if (test_questions.empty()) raise(Errc::precondition, "no test questions to index");
    if (n < 3) raise(Errc::invalid_argument, "n-gram size must be >= 3");

    for (const TestQuestion& tq : test_questions) {
        std::string normalized = normalize_for_matching(tq.question);
        if (normalized.empty()) continue;
        if (exact_.emplace(normalized, tq.id).second == false) continue; // duplicate question
        uint32_t qid = static_cast<uint32_t>(ids_.size());
        ids_.push_back(tq.id);
        std::vector<std::string> words = words_of(normalized);
        if (words.size() < n_) continue;
        for (size_t i = 0; i + n_ <= words.size(); ++i) {
            auto& postings = ngrams_[ngram_hash(words, i, n_)];
            if (postings.empty() || postings.back() != qid) postings.push_back(qid);
        }
    }
}

ContaminationVerdict ContaminationIndex::check(const std::string& candidate,
                                               double threshold) const {
    std::string normalized = normalize_for_matching(candidate);

    if (auto it = exact_.find(normalized); it != exact_.end()) {
        return {true, "exact", it->second};
    }

    std::vector<std::string> words = words_of(normalized);
    if (words.size() < n_) return {};
    size_t total = words.size() - n_ + 1;
    size_t hits = 0;
    std::map<uint32_t, size_t> per_question;
    for (size_t i = 0; i + n_ <= words.size(); ++i) {
        auto it = ngrams_.find(ngram_hash(words, i, n_));
        if (it == ngrams_.end()) continue;
        ++hits;
        for (uint32_t qid : it->second) per_question[qid]++;
    }
    double fraction = static_cast<double>(hits) / static_cast<double>(total);
    if (fraction >= threshold) {
        // Attribute to the test question sharing the most n-grams; ties go
        // to the lowest question index for determinism.
        uint32_t best = 0;
        size_t best_hits = 0;
        for (const auto& [qid, count] : per_question) {
            if (count > best_hits) {
                best = qid;
                best_hits = count;
            }
        }
        return {true, "ngram", ids_.at(best)};
    }
    return {};
}

} // namespace mathsmith
