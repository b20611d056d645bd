#ifndef TORUSKAM_ERRORS_HPP
#define TORUSKAM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace toruskam {

// Base class for every failure the library reports. `code` maps to the
// CLI exit codes: numerical failures exit 1, config/schema failures exit 2.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& msg, int code = 1)
        : std::runtime_error(msg), code_(code) {}
    int code() const noexcept { return code_; }

  private:
    int code_;
};

class ShapeError : public Error {
  public:
    explicit ShapeError(const std::string& msg) : Error("shape error: " + msg) {}
};

// Exact resonance j*omega + k*alpha in Z within the working band.
class ResonanceError : public Error {
  public:
    explicit ResonanceError(const std::string& msg)
        : Error("resonance: " + msg) {}
};

// |a| == |b| in the non-small cohomological family.
class ResonantFamilyError : public Error {
  public:
    explicit ResonantFamilyError(const std::string& msg)
        : Error("resonant family: " + msg) {}
};

// G_L singular at a grid node: K is not a fiberwise embedding there.
class EmbeddingDegeneracyError : public Error {
  public:
    explicit EmbeddingDegeneracyError(const std::string& msg)
        : Error("embedding degeneracy: " + msg) {}
};

// |lambda| too close to 1, or a corrected lambda left (-1,1)\{0}.
class HyperbolicityError : public Error {
  public:
    explicit HyperbolicityError(const std::string& msg)
        : Error("hyperbolicity: " + msg) {}
};

// <S> not invertible within the configured guard.
class TwistDegeneracyError : public Error {
  public:
    explicit TwistDegeneracyError(const std::string& msg)
        : Error("twist degeneracy: " + msg) {}
};

// Trajectory left the configured domain, or the step size underflowed.
class FlowError : public Error {
  public:
    explicit FlowError(const std::string& msg) : Error("flow: " + msg) {}
};

// Newton iteration diverged (error grew twice in a row).
class DivergenceError : public Error {
  public:
    explicit DivergenceError(const std::string& msg)
        : Error("divergence: " + msg) {}
};

class ConfigError : public Error {
  public:
    explicit ConfigError(const std::string& msg)
        : Error("config: " + msg, 2) {}
};

}  // namespace toruskam

#endif
