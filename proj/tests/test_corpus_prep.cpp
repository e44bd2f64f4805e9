#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mathsmith/corpus_prep.hpp"
#include "mathsmith/text.hpp"
#include "support/test_util.hpp"

using namespace mathsmith;
using mathsmith::testsupport::errc_of;

TEST_CASE("keyword screen hits each published keyword") {
    CHECK(is_bad_question("Which of the following is prime"));
    CHECK(is_bad_question("Pick WHICH ONE works"));
    CHECK(is_bad_question("Decide which is larger"));
    CHECK(is_bad_question("Consider the following numbers"));
    CHECK(is_bad_question("Select which statement holds"));
    CHECK(is_bad_question("Is 7 prime?")); // the "?" keyword
    CHECK_FALSE(is_bad_question("compute 2+2"));
    CHECK_FALSE(is_bad_question("Find the sum of 3 and 4."));
}

TEST_CASE("keyword screen is case-insensitive") {
    std::mt19937_64 rng(3);
    std::vector<std::string> samples = {
        "Which Statement is true", "THE FOLLOWING holds", "solve for x",
        "What is 1+1?",            "evaluate 9*9",        "WHICH ONE",
    };
    for (const std::string& q : samples) {
        std::string shuffled_case = q;
        for (char& c : shuffled_case) {
            if (rng() % 2) {
                if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
                else if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
            }
        }
        CHECK(is_bad_question(q) == is_bad_question(shuffled_case));
        CHECK(is_bad_question(q) == is_bad_question(lower_ascii(q)));
    }
}

TEST_CASE("mc_to_word pairs the stem with the correct choice") {
    std::map<std::string, std::string> choices = {{"A", "5"}, {"B", "6"}};
    WordProblem wp = mc_to_word("Compute 2+3.\nA. 5\nB. 6", choices, "A");
    CHECK(wp.question == "Compute 2+3.");
    CHECK(wp.answer == "5");
}

TEST_CASE("choice block formats are stripped") {
    std::map<std::string, std::string> choices = {{"A", "1"}, {"B", "2"}, {"C", "3"}, {"D", "4"}};
    const std::string stem = "Evaluate the expression 8 - 4.";
    for (const std::string block : {
             "A. 1\nB. 2\nC. 3\nD. 4",
             "(A) 1\n(B) 2\n(C) 3\n(D) 4",
             "A) 1\nB) 2\nC) 3\nD) 4",
             "A: 1\nB: 2\nC: 3\nD: 4",
         }) {
        WordProblem wp = mc_to_word(stem + "\n" + block, choices, "C");
        CHECK(wp.question == stem);
        CHECK(wp.answer == "3");
        // No choice-label line survives.
        for (const std::string line : {"A.", "(A)", "A)", "B.", "(B)"})
            CHECK(wp.question.find(line) == std::string::npos);
    }
}

TEST_CASE("mc_to_word error paths") {
    std::map<std::string, std::string> choices = {{"A", "5"}, {"B", "6"}};
    CHECK(errc_of([&] { mc_to_word("Compute 2+3.", choices, "E"); }) == Errc::unknown_label);
    CHECK(errc_of([&] { mc_to_word("Decide which statement holds.", choices, "A"); }) ==
          Errc::filter_rejected);
    CHECK(errc_of([&] { mc_to_word("Is 5 even?", choices, "A"); }) == Errc::filter_rejected);
}

TEST_CASE("translation prompt instantiates the template") {
    std::string prompt = build_translation_prompt("1. 一道数学题 $x^2$");
    CHECK(prompt.find("I want you to act as a Math Translator.") != std::string::npos);
    CHECK(prompt.find("keep the math formula in Latex format") != std::string::npos);
    CHECK(prompt.find("# Chinese Math Questions #:") != std::string::npos);
    CHECK(prompt.find("1. 一道数学题 $x^2$") != std::string::npos);
    CHECK(prompt.find("# English Math Questions #:") != std::string::npos);
    CHECK(errc_of([] { build_translation_prompt("  "); }) == Errc::precondition);
}

TEST_CASE("textbook prompts for questions and answers") {
    std::string questions = build_textbook_prompt("1) solve x", TextbookKind::questions, "demo");
    CHECK(questions.find("convert raw messy questions") != std::string::npos);
    CHECK(questions.find("retain the original question numbers") != std::string::npos);
    CHECK(questions.find("```\n1) solve x\n```") != std::string::npos);
    CHECK(questions.find("demo") != std::string::npos);

    std::string answers = build_textbook_prompt("1) x=2", TextbookKind::answers);
    CHECK(answers.find("convert raw messy answers") != std::string::npos);
    CHECK(answers.find("retain the original answer numbers") != std::string::npos);
    CHECK(answers.find("```\n1) x=2\n```") != std::string::npos);

    CHECK(errc_of([] { build_textbook_prompt("", TextbookKind::questions); }) == Errc::precondition);
}
