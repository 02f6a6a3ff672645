#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace solspec {

// Thrown when an enumeration would exceed the configured element cap.
// Kept distinct from std::invalid_argument so callers (and the CLI) can
// map resource exhaustion to its own exit code.
class cap_error : public std::runtime_error {
public:
    cap_error(std::size_t requested, std::size_t cap)
        : std::runtime_error("enumeration of " + std::to_string(requested) +
                             " elements exceeds cap of " + std::to_string(cap)),
          requested_(requested), cap_(cap) {}

    std::size_t requested() const { return requested_; }
    std::size_t cap() const { return cap_; }

private:
    std::size_t requested_;
    std::size_t cap_;
};

inline constexpr std::size_t default_ball_cap = 1'000'000;

} // namespace solspec
