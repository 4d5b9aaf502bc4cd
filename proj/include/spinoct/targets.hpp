#pragma once

#include <string>
#include <variant>

#include <Eigen/Dense>

namespace spinoct {

/// Target unitary in the drift eigenbasis (paper level labels |0>..|d-1>
/// are the field-dressed eigenstates).
struct GateTarget {
  std::string label;
  Eigen::MatrixXcd unitary;

  void validate() const;
  int dimension() const { return static_cast<int>(unitary.rows()); }
};

struct StateTarget {
  std::string label;
  Eigen::VectorXcd state;

  void validate() const;
  int dimension() const { return static_cast<int>(state.size()); }
};

/// Deutsch gate on a d=8 qudit: identity on levels 0..5,
/// [[i cos t, sin t], [sin t, i cos t]] on levels 6,7. D(pi/2) is Toffoli.
GateTarget deutsch_gate(double theta_rad, int dim = 8);
GateTarget toffoli_gate();

StateTarget basis_state(int index, int dim);
/// (|0> - i |d-1>) / sqrt(2).
StateTarget superposition_target(int dim = 8);

using TargetSpec = std::variant<GateTarget, StateTarget>;

/// Named targets for configs/CLI: "deutsch:<angle>", "toffoli", "state:<j>",
/// "ghz07". Angles accept "pi", "pi/<int>", "-pi/<int>" or a radian value.
TargetSpec parse_target(const std::string& name, int dim);

int target_dimension(const TargetSpec& target);
bool is_gate_target(const TargetSpec& target);

}  // namespace spinoct
