#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mathsmith/concepts.hpp"
#include "mathsmith/text.hpp"
#include "support/fixture_pipeline.hpp"
#include "support/test_util.hpp"

using namespace mathsmith;
using mathsmith::testsupport::errc_of;

TEST_CASE("extraction prompt instantiates the template") {
    SeedQuestion seed{"s1", "d", "What is 2+2?", "4", Split::train};
    std::string prompt = build_extraction_prompt(seed);
    CHECK(prompt.find("Act as a Math Teacher and analyze the provided question.") !=
          std::string::npos);
    CHECK(prompt.find("Provided question: What is 2+2?") != std::string::npos);
    CHECK(prompt.find("Analysis:") != std::string::npos);
}

TEST_CASE("braces in the question are preserved verbatim") {
    SeedQuestion seed{"s1", "d", "Evaluate {x} when {x} = 3.", "3", Split::train};
    std::string prompt = build_extraction_prompt(seed);
    CHECK(prompt.find("Evaluate {x} when {x} = 3.") != std::string::npos);
}

TEST_CASE("empty question violates the precondition") {
    SeedQuestion seed{"s1", "d", "   ", "4", Split::train};
    CHECK(errc_of([&] { build_extraction_prompt(seed); }) == Errc::precondition);
}

TEST_CASE("parse_extraction recovers labeled sections") {
    Extraction e = parse_extraction(
        "Topics:\n1. Arithmetic\nKnowledge Points:\n1. Addition of values\n2. Counting", "s1");
    CHECK(e.seed_id == "s1");
    REQUIRE(e.topics.size() == 1);
    CHECK(e.topics[0] == "Arithmetic");
    REQUIRE(e.knowledge_points.size() == 2);
    CHECK(e.knowledge_points[0] == "Addition of values");
    CHECK(e.knowledge_points[1] == "Counting");
}

TEST_CASE("parse_extraction cardinality bounds") {
    CHECK(errc_of([] {
              parse_extraction("Topics:\n1. A\n2. B\n3. C\nKnowledge Points:\n1. x");
          }) == Errc::parse);
    CHECK(errc_of([] {
              parse_extraction("Topics:\n1. A\nKnowledge Points:\n1. a\n2. b\n3. c\n4. d\n5. e\n6. f");
          }) == Errc::parse);
    CHECK(errc_of([] { parse_extraction("Knowledge Points:\n1. x"); }) == Errc::parse);
    CHECK(errc_of([] { parse_extraction("Topics:\n1. A"); }) == Errc::parse);
    CHECK(errc_of([] { parse_extraction("   "); }) == Errc::precondition);
}

TEST_CASE("labels are normalized, case preserved") {
    Extraction e = parse_extraction(
        "Topics:\n1.   Arithmetic   operations  \nKnowledge Points:\n1. Addition of values.");
    CHECK(e.topics[0] == "Arithmetic operations");
    CHECK(e.knowledge_points[0] == "Addition of values");

    CHECK(normalize_label("  a   B  c ?!.") == "a B c");
    CHECK(normalize_label("x") == "x");
}

TEST_CASE("normalization is idempotent on random inputs") {
    std::mt19937_64 rng(11);
    const std::string alphabet = "aB «.,;:!? \t\n";
    for (int i = 0; i < 300; ++i) {
        std::string s;
        size_t len = rng() % 24;
        for (size_t j = 0; j < len; ++j) s.push_back(alphabet[rng() % alphabet.size()]);
        std::string once = normalize_label(s);
        CHECK(normalize_label(once) == once);
    }
}

TEST_CASE("tolerant headers: singular, inline content, bullets") {
    Extraction e = parse_extraction(
        "topic: Algebra\nknowledge point:\n- Solving linear equations\n* Substitution");
    REQUIRE(e.topics.size() == 1);
    CHECK(e.topics[0] == "Algebra");
    REQUIRE(e.knowledge_points.size() == 2);
    CHECK(e.knowledge_points[1] == "Substitution");
}

TEST_CASE("render then parse is lossless for labels") {
    std::mt19937_64 rng(23);
    std::vector<std::string> vocabulary = {"Algebra",  "Geometry", "Fractions",
                                           "Counting", "Addition", "Limits"};
    for (int trial = 0; trial < 100; ++trial) {
        size_t n_topics = 1 + rng() % 2;
        size_t n_kps = 1 + rng() % 5;
        std::vector<std::string> topics, kps;
        for (size_t i = 0; i < n_topics; ++i) topics.push_back(vocabulary[i]);
        for (size_t i = 0; i < n_kps; ++i) kps.push_back(vocabulary[i] + " skill");
        std::string response = "Topics:\n";
        for (size_t i = 0; i < topics.size(); ++i)
            response += std::to_string(i + 1) + ". " + topics[i] + "\n";
        response += "Knowledge Points:\n";
        for (size_t i = 0; i < kps.size(); ++i)
            response += std::to_string(i + 1) + ". " + kps[i] + "\n";
        Extraction e = parse_extraction(response);
        CHECK(e.topics == topics);
        CHECK(e.knowledge_points == kps);
    }
}

TEST_CASE("prune_singletons removes rare labels and empty extractions") {
    std::vector<Extraction> extractions = {
        {"s1", {"A"}, {"x", "y"}},
        {"s2", {"A"}, {"x"}},
        {"s3", {"B"}, {"y"}},
    };
    // B occurs once -> s3 loses its only topic and is dropped; y then only
    // occurs in s1, so y is pruned as well.
    ConceptInventory inventory = prune_singletons(extractions);
    CHECK(inventory.topics.size() == 1);
    CHECK(inventory.topics.at("A") == 2);
    CHECK(inventory.knowledge_points.size() == 1);
    CHECK(inventory.knowledge_points.at("x") == 2);
    CHECK(inventory.extractions.size() == 2);
    CHECK(inventory.dropped_seed_ids == std::vector<std::string>{"s3"});

    for (const auto& [label, count] : inventory.topics) CHECK(count >= 2);
    for (const auto& [label, count] : inventory.knowledge_points) CHECK(count >= 2);
}

TEST_CASE("all-unique labels empty the inventory") {
    std::vector<Extraction> extractions = {
        {"s1", {"A"}, {"x"}},
        {"s2", {"B"}, {"y"}},
    };
    CHECK(errc_of([&] { prune_singletons(extractions); }) == Errc::empty_inventory);
    CHECK(errc_of([] { prune_singletons({}); }) == Errc::precondition);
}

TEST_CASE("fixture corpus prunes to the expected inventory") {
    ConceptInventory inventory = mathsmith::testsupport::fixture_inventory();
    CHECK(inventory.topics.size() == 10);
    CHECK(inventory.knowledge_points.size() == 16);
    CHECK(inventory.extractions.size() == 19);
    CHECK(inventory.dropped_seed_ids == std::vector<std::string>{"s20"});
    int min_count = 1 << 30;
    for (const auto& [label, count] : inventory.topics) min_count = std::min(min_count, count);
    for (const auto& [label, count] : inventory.knowledge_points)
        min_count = std::min(min_count, count);
    CHECK(min_count >= 2);
}
