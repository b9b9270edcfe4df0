#pragma once

#include <stdexcept>
#include <string>

namespace roomeq {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& message) : std::runtime_error(message) {}
};

// Canonical pipeline rate. All spectral constants (bin width, sample-point
// bins, filter length) are derived from it.
inline constexpr int kPipelineRate = 16000;
inline constexpr double kSpeedOfSound = 343.0;

}  // namespace roomeq
