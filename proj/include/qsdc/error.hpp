#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qsdc {

enum class errc {
    not_normalized,
    index_out_of_range,
    same_index,
    dimension_mismatch,
    register_too_large,
    invalid_isometry,
    position_missing,
    empty_check,
    config_invalid,
    io_error,
};

constexpr std::string_view to_string(errc code) noexcept
{
    switch (code) {
    case errc::not_normalized: return "NotNormalized";
    case errc::index_out_of_range: return "IndexOutOfRange";
    case errc::same_index: return "SameIndex";
    case errc::dimension_mismatch: return "DimensionMismatch";
    case errc::register_too_large: return "RegisterTooLarge";
    case errc::invalid_isometry: return "InvalidIsometry";
    case errc::position_missing: return "PositionMissing";
    case errc::empty_check: return "EmptyCheck";
    case errc::config_invalid: return "ConfigInvalid";
    case errc::io_error: return "IoError";
    }
    return "Unknown";
}

// Single exception type for the library; callers branch on code().
class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

} // namespace qsdc
