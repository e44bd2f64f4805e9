#include "mathsmith/corpus_prep.hpp"

#include "mathsmith/errors.hpp"
#include "mathsmith/prompts.hpp"
#include "mathsmith/text.hpp"

namespace mathsmith {

bool is_bad_question(const std::string& question) {
    const std::string lowered = lower_ascii(question);
    static const char* keywords[] = {
        "?",
        "which of the following",
        "which one",
        "which is",
        "the following",
        "which statement",
    };
    for (const char* keyword : keywords) {
        if (lowered.find(keyword) != std::string::npos) return true;
    }
    return false;
}

namespace {

// True when the line is a printed answer choice such as "A. 5", "(B) 6",
// "C) 7" or "D: 8" for one of the known labels.
bool is_choice_line(const std::string& line, const std::map<std::string, std::string>& choices) {
    std::string stripped = trim(line);
    if (stripped.empty()) return false;
    bool parenthesized = stripped.front() == '(';
    if (parenthesized) stripped = stripped.substr(1);
    for (const auto& [label, text] : choices) {
        (void)text;
        if (stripped.size() < label.size() || stripped.compare(0, label.size(), label) != 0) continue;
        std::string rest = stripped.substr(label.size());
        if (parenthesized) {
            if (!rest.empty() && rest.front() == ')') return true;
            continue;
        }
        if (!rest.empty() && (rest.front() == '.' || rest.front() == ')' || rest.front() == ':'))
            return true;
    }
    return false;
}

} // namespace

WordProblem mc_to_word(const std::string& question, const std::map<std::string, std::string>& choices,
                       const std::string& correct_label) {
    if (is_bad_question(question))
        raise(Errc::filter_rejected, "question depends on the multiple-choice format");
    auto it = choices.find(correct_label);
    if (it == choices.end()) raise(Errc::unknown_label, "correct label not in choices: " + correct_label);

    std::string stem;
    for (const std::string& line : split_lines(question)) {
        if (is_choice_line(line, choices)) continue;
        if (!stem.empty()) stem += '\n';
        stem += line;
    }
    stem = trim(stem);
    if (stem.empty()) raise(Errc::filter_rejected, "question is only a choice block");
    return {stem, it->second};
}

std::string build_translation_prompt(const std::string& questions) {
    if (trim(questions).empty()) raise(Errc::precondition, "no questions to translate");
    return replace_all(prompts::kTranslation, "{questions}", questions);
}

std::string build_textbook_prompt(const std::string& chapter_text, TextbookKind kind,
                                  const std::string& demo) {
    if (trim(chapter_text).empty()) raise(Errc::precondition, "chapter text is empty");
    const char* tpl =
        kind == TextbookKind::questions ? prompts::kTextbookQuestions : prompts::kTextbookAnswers;
    std::string prompt = replace_all(tpl, "{demo}", demo);
    return replace_all(prompt, "{chapter}", chapter_text);
}

} // namespace mathsmith
