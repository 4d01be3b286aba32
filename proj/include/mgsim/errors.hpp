#ifndef MGSIM_ERRORS_HPP
#define MGSIM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mgsim {

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ScenarioError : std::runtime_error {
    explicit ScenarioError(const std::string& what) : std::runtime_error(what) {}
};

struct UnknownSwitch : std::runtime_error {
    explicit UnknownSwitch(const std::string& id)
        : std::runtime_error("unknown switch: " + id) {}
};

struct SolveFailed : std::runtime_error {
    explicit SolveFailed(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroLineImpedance : std::runtime_error {
    explicit ZeroLineImpedance(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroImpedanceFault : std::runtime_error {
    explicit ZeroImpedanceFault(const std::string& what) : std::runtime_error(what) {}
};

struct BadSamplingRate : std::runtime_error {
    explicit BadSamplingRate(const std::string& what) : std::runtime_error(what) {}
};

struct ShortWindow : std::runtime_error {
    explicit ShortWindow(const std::string& what) : std::runtime_error(what) {}
};

struct CalibrationError : std::runtime_error {
    explicit CalibrationError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown when no threshold pair separates faulted from no-fault
/// observations; the message carries both ranges.
struct NoSeparation : CalibrationError {
    explicit NoSeparation(const std::string& what) : CalibrationError(what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace mgsim

#endif
