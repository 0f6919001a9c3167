#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace treelens {

// Error kinds are stable strings so reports can carry machine-readable
// error objects. Keep them in sync with the CLI error table.
namespace errkind {
inline constexpr const char* asymmetric_input = "AsymmetricInput";
inline constexpr const char* triangle_violation = "TriangleViolation";
inline constexpr const char* negative_entry = "NegativeEntry";
inline constexpr const char* nonzero_diagonal = "NonzeroDiagonal";
inline constexpr const char* nonfinite_entry = "NonFiniteEntry";
inline constexpr const char* disconnected_graph = "DisconnectedGraph";
inline constexpr const char* parameter_out_of_range = "ParameterOutOfRange";
inline constexpr const char* empty_set_diameter = "EmptySetDiameter";
inline constexpr const char* negative_tripod = "NegativeTripod";
inline constexpr const char* empty_intersection = "EmptyIntersection";
inline constexpr const char* loop_not_closed = "LoopNotClosed";
inline constexpr const char* domain_too_small = "DomainTooSmall";
inline constexpr const char* invalid_spec = "InvalidSpec";
inline constexpr const char* perturbation_broke_metric = "PerturbationBrokeMetric";
inline constexpr const char* field_not_lipschitz = "FieldNotLipschitz";
inline constexpr const char* io_error = "IoError";
inline constexpr const char* internal_error = "InternalError";
}  // namespace errkind

class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

}  // namespace treelens
