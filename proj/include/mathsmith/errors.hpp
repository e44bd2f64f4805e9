#pragma once

#include <stdexcept>
#include <string>

namespace mathsmith {

// Error categories surfaced through both the C++ and the C interfaces.
// The numeric values are part of the C ABI (see mathsmith.h) and must not
// be reordered.
enum class Errc : int {
    ok = 0,
    invalid_argument = 1,
    precondition = 2,
    parse = 3,
    io = 4,
    auth = 5,
    rate_limited = 6,
    malformed_response = 7,
    empty_inventory = 8,
    isolated_node = 9,
    dead_end = 10,
    pool_too_small = 11,
    undefined_distance = 12,
    manifest_mismatch = 13,
    malformed_record = 14,
    bad_template = 15,
    unknown_dataset = 16,
    driver = 17,
    judge_unavailable = 18,
    filter_rejected = 19,
    unknown_label = 20,
    stage = 21,
    unknown = 22,
};

class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const noexcept { return code_; }

  private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& what) { throw Error(code, what); }

const char* errc_name(Errc code) noexcept;

} // namespace mathsmith
