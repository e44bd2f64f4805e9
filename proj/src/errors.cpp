#include "mathsmith/errors.hpp"

namespace mathsmith {

const char* errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::ok: return "ok";
        case Errc::invalid_argument: return "invalid_argument";
        case Errc::precondition: return "precondition";
        case Errc::parse: return "parse_error";
        case Errc::io: return "io_error";
        case Errc::auth: return "auth_error";
        case Errc::rate_limited: return "rate_limited";
        case Errc::malformed_response: return "malformed_response";
        case Errc::empty_inventory: return "empty_inventory";
        case Errc::isolated_node: return "isolated_node";
        case Errc::dead_end: return "dead_end";
        case Errc::pool_too_small: return "pool_too_small";
        case Errc::undefined_distance: return "undefined_distance";
        case Errc::manifest_mismatch: return "manifest_mismatch";
        case Errc::malformed_record: return "malformed_record";
        case Errc::bad_template: return "bad_template";
        case Errc::unknown_dataset: return "unknown_dataset";
        case Errc::driver: return "driver_error";
        case Errc::judge_unavailable: return "judge_unavailable";
        case Errc::filter_rejected: return "filter_rejected";
        case Errc::unknown_label: return "unknown_label";
        case Errc::stage: return "stage_error";
        case Errc::unknown: return "unknown";
    }
    return "unknown";
}

} // namespace mathsmith
