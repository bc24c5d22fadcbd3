#pragma once

#include <stdexcept>
#include <string>

namespace kinlab {

struct ScalingViolation : std::runtime_error {
  explicit ScalingViolation(const std::string& m) : std::runtime_error("scaling-violation: " + m) {}
};

struct NonUnitNormal : std::runtime_error {
  explicit NonUnitNormal(const std::string& m) : std::runtime_error("non-unit-normal: " + m) {}
};

struct OverlapInput : std::runtime_error {
  explicit OverlapInput(const std::string& m) : std::runtime_error("overlap-input: " + m) {}
};

struct TripleCollisionAbort : std::runtime_error {
  explicit TripleCollisionAbort(const std::string& m)
      : std::runtime_error("triple-collision-abort: " + m) {}
};

struct PackingStall : std::runtime_error {
  explicit PackingStall(const std::string& m) : std::runtime_error("packing-stall: " + m) {}
};

struct EmptyEnsemble : std::runtime_error {
  explicit EmptyEnsemble(const std::string& m) : std::runtime_error("empty-ensemble: " + m) {}
};

struct GridMismatch : std::runtime_error {
  explicit GridMismatch(const std::string& m) : std::runtime_error("grid-mismatch: " + m) {}
};

struct RejectionStall : std::runtime_error {
  explicit RejectionStall(const std::string& m) : std::runtime_error("rejection-stall: " + m) {}
};

struct MajorantOverflow : std::runtime_error {
  explicit MajorantOverflow(const std::string& m)
      : std::runtime_error("majorant-overflow: " + m) {}
};

struct QuadratureDegeneracy : std::runtime_error {
  explicit QuadratureDegeneracy(const std::string& m)
      : std::runtime_error("quadrature-degeneracy: " + m) {}
};

struct NonConvergence : std::runtime_error {
  explicit NonConvergence(const std::string& m) : std::runtime_error("non-convergence: " + m) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& m) : std::runtime_error("config-invalid: " + m) {}
};

}  // namespace kinlab
