#pragma once

#include <stdexcept>
#include <string>

namespace tutti {

enum class Errc {
    invalid_config = 1,
    invalid_transfer,
    pool_exhausted,
    duplicate_key,
    not_allocated,
    out_of_range,
    ring_full,
    not_prepared,
    too_many_contexts,
    zero_sm_budget,
    never_issued,
    queue_exhausted,
    parse_error,
    zero_throughput,
    empty_series,
    backpressure,
    table_missing,
    runtime_error,
};

class Error : public std::runtime_error {
public:
    Error(Errc code, std::string msg) : std::runtime_error(std::move(msg)), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

} // namespace tutti
