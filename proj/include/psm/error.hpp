#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace psm {

/// Error categories surfaced to callers (and mapped to service error codes).
enum class Errc {
    invalid_argument,
    dimension_mismatch,
    out_of_range,
    schema,
    invariant,
    overflow,
    garp_violation,
    degenerate,
    over_budget,
    wrong_round,
    incomplete,
    not_found,
    session_complete,
    io,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace psm
