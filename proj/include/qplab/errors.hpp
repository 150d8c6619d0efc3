#pragma once

#include <stdexcept>
#include <string>

namespace qp {

// Base of every library error; `kind` is a stable machine-readable tag.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error("domain-error", w) {}
};

struct CompositionError : Error {
  explicit CompositionError(const std::string& w) : Error("composition-error", w) {}
};

// Matrix singular to working precision; carries the smallest LU pivot.
struct NearResonance : Error {
  NearResonance(const std::string& w, double pivot)
      : Error("near-resonance", w + " (smallest pivot " + std::to_string(pivot) + ")"),
        pivot(pivot) {}
  double pivot;
};

struct SchurDegenerate : Error {
  SchurDegenerate(const std::string& w, double pivot)
      : Error("schur-degenerate", w + " (smallest pivot " + std::to_string(pivot) + ")"),
        pivot(pivot) {}
  double pivot;
};

struct PerturbationOutOfRange : Error {
  explicit PerturbationOutOfRange(const std::string& w) : Error("perturbation-out-of-range", w) {}
};

struct ComplexityRefusal : Error {
  explicit ComplexityRefusal(const std::string& w) : Error("complexity-refusal", w) {}
};

struct NotCosineType : Error {
  explicit NotCosineType(const std::string& w) : Error("not-cosine-type", w) {}
};

struct EnergyOutOfRange : Error {
  explicit EnergyOutOfRange(const std::string& w) : Error("energy-out-of-range", w) {}
};

struct BandCutTooSmall : Error {
  explicit BandCutTooSmall(const std::string& w) : Error("band-cut-too-small", w) {}
};

struct ScheduleInvalid : Error {
  explicit ScheduleInvalid(const std::string& w) : Error("schedule-invalid", w) {}
};

struct GeometryViolation : Error {
  explicit GeometryViolation(const std::string& w) : Error("geometry-violation", w) {}
};

struct NoRoot : Error {
  explicit NoRoot(const std::string& w) : Error("no-root", w) {}
};

struct ContourContamination : Error {
  explicit ContourContamination(const std::string& w) : Error("contour-contamination", w) {}
};

struct WrongPath : Error {
  explicit WrongPath(const std::string& w) : Error("wrong-path", w) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error("config-error", w) {}
};

} // namespace qp
