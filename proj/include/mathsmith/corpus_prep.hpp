#pragma once

#include <map>
#include <string>

namespace mathsmith {

// Verbatim keyword screen for questions that lean on the multiple-choice
// format. The "?" keyword is part of the published list and rejects any
// interrogative question; see README for the consequences.
bool is_bad_question(const std::string& question);

struct WordProblem {
    std::string question;
    std::string answer;
};

// Converts a multiple-choice item to a word problem: the stem keeps its
// wording minus the printed choice block, the answer becomes the correct
// choice's content. Raises Errc::filter_rejected when the stem trips the
// keyword screen and Errc::unknown_label when correct_label is not a choice.
WordProblem mc_to_word(const std::string& question, const std::map<std::string, std::string>& choices,
                       const std::string& correct_label);

// Chinese-to-English translation prompt over a block of questions.
std::string build_translation_prompt(const std::string& questions);

enum class TextbookKind { questions, answers };

// Exercise/answer extraction prompt for one manually segmented chapter; the
// chapter text is fenced in triple backticks. `demo` may be empty.
std::string build_textbook_prompt(const std::string& chapter_text, TextbookKind kind,
                                  const std::string& demo = "");

} // namespace mathsmith
