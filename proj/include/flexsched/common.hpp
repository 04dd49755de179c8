#ifndef FLEXSCHED_COMMON_HPP
#define FLEXSCHED_COMMON_HPP

#include <stdexcept>
#include <string>

namespace flexsched {

// Money is price-unit * kWh; tests compare at 1e-9 tolerance.
using Money = double;

// Hours are integer indices. Within a scheduling day they live on the
// 48-hour horizon [0,47]; series-global hours count from the series start.
constexpr int kHorizonHours = 48;

enum class ErrorCode {
    parse_error,
    ordering_error,
    empty_input,
    insufficient_data,
    gap_error,
    range_error,
    dimension_error,
    domain_error,
    infeasible,
    no_feasible_schedule,
    invalid_observation,
    config_error,
    io_error,
    internal_error,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

}  // namespace flexsched

#endif
