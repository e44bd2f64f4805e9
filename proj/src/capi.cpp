#include "mathsmith/mathsmith.h"

#include <cstdlib>
#include <cstring>
#include <set>
#include <string>

#include "mathsmith/corpus_prep.hpp"
#include "mathsmith/dataset_io.hpp"
#include "mathsmith/decontamination.hpp"
#include "mathsmith/errors.hpp"
#include "mathsmith/eval.hpp"
#include "mathsmith/pipeline.hpp"
#include "mathsmith/qa.hpp"

using namespace mathsmith;

namespace {

thread_local std::string g_last_error;

ms_status status_of(Errc code) { return static_cast<ms_status>(static_cast<int>(code)); }

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename Fn>
ms_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return MS_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return MS_ERR_UNKNOWN;
    } catch (...) {
        g_last_error = "unknown failure";
        return MS_ERR_UNKNOWN;
    }
}

ms_status require(bool ok, const char* message) {
    if (ok) return MS_OK;
    g_last_error = message;
    return MS_ERR_INVALID_ARGUMENT;
}

} // namespace

struct ms_pipeline {
    PipelineConfig config;
    // The runner is rebuilt lazily so set_option calls can keep mutating the
    // config until the first stage runs.
    std::unique_ptr<Pipeline> runner;

    Pipeline& pipeline() {
        if (!runner) runner = std::make_unique<Pipeline>(config);
        return *runner;
    }
};

extern "C" {

const char* ms_version(void) { return "0.1.0"; }

const char* ms_status_name(ms_status status) {
    return errc_name(static_cast<Errc>(static_cast<int>(status)));
}

const char* ms_last_error(void) { return g_last_error.c_str(); }

void ms_string_free(char* s) { std::free(s); }

ms_status ms_pipeline_open(const char* config_path, ms_pipeline** out) {
    if (ms_status bad = require(config_path && out, "config_path and out must be non-NULL"))
        return bad;
    *out = nullptr;
    return guarded([&] {
        auto handle = std::make_unique<ms_pipeline>();
        handle->config = load_pipeline_config(config_path);
        *out = handle.release();
    });
}

ms_status ms_pipeline_set_option(ms_pipeline* pipeline, const char* key, const char* value) {
    if (ms_status bad = require(pipeline && key && value, "pipeline, key, value must be non-NULL"))
        return bad;
    return guarded([&] {
        apply_override(pipeline->config, key, value);
        pipeline->runner.reset();
    });
}

ms_status ms_pipeline_run_stage(ms_pipeline* pipeline, const char* stage, char** summary_out) {
    if (ms_status bad = require(pipeline && stage, "pipeline and stage must be non-NULL"))
        return bad;
    if (summary_out) *summary_out = nullptr;
    return guarded([&] {
        Json summary = pipeline->pipeline().run_stage(stage);
        if (summary_out) *summary_out = dup_string(summary.dump(2));
    });
}

ms_status ms_pipeline_stats(ms_pipeline* pipeline, char** stats_out) {
    if (ms_status bad = require(pipeline && stats_out, "pipeline and stats_out must be non-NULL"))
        return bad;
    *stats_out = nullptr;
    return guarded([&] { *stats_out = dup_string(pipeline->pipeline().stats().dump(2)); });
}

void ms_pipeline_close(ms_pipeline* pipeline) { delete pipeline; }

ms_status ms_render_alpaca(const char* question, char** out) {
    if (ms_status bad = require(question && out, "question and out must be non-NULL")) return bad;
    *out = nullptr;
    return guarded([&] { *out = dup_string(render_alpaca(question)); });
}

ms_status ms_extract_answer(const char* completion, char** out) {
    if (ms_status bad = require(completion && out, "completion and out must be non-NULL"))
        return bad;
    *out = nullptr;
    return guarded([&] {
        if (auto answer = extract_answer(completion)) *out = dup_string(*answer);
    });
}

ms_status ms_verify_answer(const char* extracted, const char* gold, int* verdict_out) {
    if (ms_status bad =
            require(extracted && gold && verdict_out, "extracted, gold, verdict_out must be non-NULL"))
        return bad;
    *verdict_out = 0;
    return guarded([&] { *verdict_out = verify(extracted, gold) ? 1 : 0; });
}

ms_status ms_normalize_for_matching(const char* text, char** out) {
    if (ms_status bad = require(text && out, "text and out must be non-NULL")) return bad;
    *out = nullptr;
    return guarded([&] { *out = dup_string(normalize_for_matching(text)); });
}

ms_status ms_is_bad_question(const char* question, int* verdict_out) {
    if (ms_status bad = require(question && verdict_out, "question and verdict_out must be non-NULL"))
        return bad;
    *verdict_out = 0;
    return guarded([&] { *verdict_out = is_bad_question(question) ? 1 : 0; });
}

ms_status ms_jaccard_distance(const char* const* a, size_t a_len, const char* const* b,
                              size_t b_len, double* out) {
    if (ms_status bad = require(out && (a || a_len == 0) && (b || b_len == 0),
                                "array arguments must be non-NULL unless empty"))
        return bad;
    *out = 0.0;
    return guarded([&] {
        std::set<std::string> sa, sb;
        for (size_t i = 0; i < a_len; ++i) sa.emplace(a[i]);
        for (size_t i = 0; i < b_len; ++i) sb.emplace(b[i]);
        *out = jaccard_distance(sa, sb);
    });
}

} // extern "C"
