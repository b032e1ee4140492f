#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace tdmosc {

// All numerical failure modes derive from Error and carry a stable name
// that the CLI prints and maps to exit code 3. Configuration problems are
// ConfigError (exit code 2). Precondition violations that indicate a bug
// in the caller throw std::invalid_argument.
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& what)
        : std::runtime_error(name + ": " + what), name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error("ConfigError", msg) {}
};

// Adaptive step controller stalled; usually a singularity on the path.
struct StepSizeUnderflow : Error {
    explicit StepSizeUnderflow(const std::string& msg) : Error("StepSizeUnderflow", msg) {}
};

// alpha -> 0 in the Ermakov equation: the packet width collapses.
struct ErmakovSingularity : Error {
    explicit ErmakovSingularity(const std::string& msg) : Error("ErmakovSingularity", msg) {}
};

// |u| fell below the breakdown threshold; omega and b are meaningless there.
struct DivisionByZeroU : Error {
    explicit DivisionByZeroU(const std::string& msg) : Error("DivisionByZeroU", msg) {}
};

// Re(omega) <= 0: the Gaussian no longer decays and the packet has no norm.
struct NonNormalizable : Error {
    explicit NonNormalizable(const std::string& msg) : Error("NonNormalizable", msg) {}
};

// i*W0 is not a positive real number; no normalizable packet exists.
struct InadmissibleWronskian : Error {
    explicit InadmissibleWronskian(const std::string& msg) : Error("InadmissibleWronskian", msg) {}
};

struct DegreeTooLarge : Error {
    explicit DegreeTooLarge(const std::string& msg) : Error("DegreeTooLarge", msg) {}
};

// Truncated expansion misses more probability than the tail tolerance allows.
struct TailTooLarge : Error {
    explicit TailTooLarge(const std::string& msg) : Error("TailTooLarge", msg) {}
};

// Wavefunction amplitude reached the hard-wall boundary of the box.
struct BoundaryLeak : Error {
    explicit BoundaryLeak(const std::string& msg) : Error("BoundaryLeak", msg) {}
};

struct GridMismatch : Error {
    explicit GridMismatch(const std::string& msg) : Error("GridMismatch", msg) {}
};

struct GridTooCoarse : Error {
    explicit GridTooCoarse(const std::string& msg) : Error("GridTooCoarse", msg) {}
};

} // namespace tdmosc
