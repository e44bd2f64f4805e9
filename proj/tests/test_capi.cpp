// Exercises the shared-library surface the way an external consumer would:
// only mathsmith/mathsmith.h, no C++ core headers.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "mathsmith/mathsmith.h"

namespace {

struct OwnedString {
    char* value = nullptr;
    ~OwnedString() { ms_string_free(value); }
};

std::filesystem::path scratch_dir() {
    auto dir = std::filesystem::temp_directory_path() / "mathsmith_capi_test";
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("version and status names") {
    CHECK(std::string(ms_version()) == "0.1.0");
    CHECK(std::string(ms_status_name(MS_OK)) == "ok");
    CHECK(std::string(ms_status_name(MS_ERR_PARSE)) == "parse_error");
    CHECK(std::string(ms_status_name(MS_ERR_RATE_LIMITED)) == "rate_limited");
}

TEST_CASE("render alpaca through the C surface") {
    OwnedString out;
    REQUIRE(ms_render_alpaca("Q", &out.value) == MS_OK);
    CHECK(std::string(out.value) ==
          "Below is an instruction that describes a task. Write a response that appropriately "
          "completes the request.\n\n### Instruction:\nQ\n\n### Response:");

    OwnedString empty;
    CHECK(ms_render_alpaca("", &empty.value) == MS_ERR_PRECONDITION);
    CHECK(std::strlen(ms_last_error()) > 0);
    CHECK(ms_render_alpaca(nullptr, &empty.value) == MS_ERR_INVALID_ARGUMENT);
}

TEST_CASE("extract and verify answers") {
    OwnedString extracted;
    REQUIRE(ms_extract_answer("steps... The answer is 42.", &extracted.value) == MS_OK);
    REQUIRE(extracted.value != nullptr);
    CHECK(std::string(extracted.value) == "42");

    OwnedString none;
    REQUIRE(ms_extract_answer("no numerals here", &none.value) == MS_OK);
    CHECK(none.value == nullptr);

    int verdict = -1;
    REQUIRE(ms_verify_answer("1/2", "\\frac{1}{2}", &verdict) == MS_OK);
    CHECK(verdict == 1);
    REQUIRE(ms_verify_answer("3", "4", &verdict) == MS_OK);
    CHECK(verdict == 0);
}

TEST_CASE("normalize and keyword screen") {
    OwnedString normalized;
    REQUIRE(ms_normalize_for_matching("What  is 2+2 ?", &normalized.value) == MS_OK);
    CHECK(std::string(normalized.value) == "what is 2+2");

    int bad = 0;
    REQUIRE(ms_is_bad_question("Which of the following is prime", &bad) == MS_OK);
    CHECK(bad == 1);
    REQUIRE(ms_is_bad_question("compute 2+2", &bad) == MS_OK);
    CHECK(bad == 0);
}

TEST_CASE("jaccard distance over string arrays") {
    const char* a[] = {"p", "q"};
    const char* b[] = {"q", "r"};
    double d = 0.0;
    REQUIRE(ms_jaccard_distance(a, 2, b, 2, &d) == MS_OK);
    CHECK(d == doctest::Approx(1.0 - 1.0 / 3.0));
    CHECK(ms_jaccard_distance(nullptr, 0, nullptr, 0, &d) == MS_ERR_UNDEFINED_DISTANCE);
}

TEST_CASE("pipeline handle lifecycle and error reporting") {
    ms_pipeline* pipeline = nullptr;
    CHECK(ms_pipeline_open("/no/such/config.json", &pipeline) == MS_ERR_IO);
    CHECK(pipeline == nullptr);
    CHECK(std::strlen(ms_last_error()) > 0);

    auto dir = scratch_dir();
    auto config_path = dir / "config.json";
    {
        std::ofstream out(config_path);
        out << R"({"work_dir": ")" << (dir / "out").string() << R"(", "seeds_path": "missing.jsonl"})";
    }
    REQUIRE(ms_pipeline_open(config_path.string().c_str(), &pipeline) == MS_OK);
    REQUIRE(pipeline != nullptr);

    CHECK(ms_pipeline_set_option(pipeline, "walk.seed", "7") == MS_OK);
    CHECK(ms_pipeline_set_option(pipeline, "bogus.key", "7") == MS_ERR_INVALID_ARGUMENT);

    char* summary = nullptr;
    CHECK(ms_pipeline_run_stage(pipeline, "nonsense", &summary) == MS_ERR_STAGE);
    CHECK(summary == nullptr);
    // Missing seeds file -> stage error with a helpful message.
    CHECK(ms_pipeline_run_stage(pipeline, "extract", &summary) == MS_ERR_STAGE);
    CHECK(std::string(ms_last_error()).find("extract") != std::string::npos);

    OwnedString stats;
    CHECK(ms_pipeline_stats(pipeline, &stats.value) == MS_OK);
    CHECK(stats.value != nullptr);

    ms_pipeline_close(pipeline);
    ms_pipeline_close(nullptr); // harmless
}
