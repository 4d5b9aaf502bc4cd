#include "spinoct/targets.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "spinoct/constants.hpp"
#include "spinoct/errors.hpp"

namespace spinoct {

void GateTarget::validate() const {
  const int d = dimension();
  if (unitary.cols() != d || d < 2)
    throw std::invalid_argument("GateTarget: matrix must be square, d >= 2");
  const double defect =
      (unitary.adjoint() * unitary - Eigen::MatrixXcd::Identity(d, d))
          .cwiseAbs()
          .maxCoeff();
  if (defect > 1e-12)
    throw std::invalid_argument("GateTarget '" + label + "' is not unitary");
}

void StateTarget::validate() const {
  if (std::abs(state.norm() - 1.0) > 1e-12)
    throw std::invalid_argument("StateTarget '" + label + "' is not normalized");
}

GateTarget deutsch_gate(double theta_rad, int dim) {
  if (dim != 8)
    throw std::invalid_argument("deutsch_gate: defined on d = 8 (three qubits)");
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(8, 8);
  const std::complex<double> ic(0.0, std::cos(theta_rad));
  const double s = std::sin(theta_rad);
  u(6, 6) = ic;
  u(7, 7) = ic;
  u(6, 7) = s;
  u(7, 6) = s;
  GateTarget target{"deutsch", u};
  target.validate();
  return target;
}

GateTarget toffoli_gate() {
  GateTarget target = deutsch_gate(kPi / 2.0);
  target.label = "toffoli";
  return target;
}

StateTarget basis_state(int index, int dim) {
  if (index < 0 || index >= dim)
    throw std::invalid_argument("basis_state: index out of range");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
  v(index) = 1.0;
  return StateTarget{"state:" + std::to_string(index), v};
}

StateTarget superposition_target(int dim) {
  if (dim < 2) throw std::invalid_argument("superposition_target: d >= 2 required");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim);
  v(0) = 1.0 / std::sqrt(2.0);
  v(dim - 1) = std::complex<double>(0.0, -1.0 / std::sqrt(2.0));
  return StateTarget{"ghz07", v};
}

namespace {

double parse_angle(const std::string& text) {
  std::string s = text;
  double sign = 1.0;
  if (!s.empty() && s[0] == '-') {
    sign = -1.0;
    s = s.substr(1);
  }
  if (s == "pi") return sign * kPi;
  if (s.rfind("pi/", 0) == 0) {
    const std::string denom = s.substr(3);
    try {
      std::size_t used = 0;
      const double q = std::stod(denom, &used);
      if (used != denom.size() || q == 0.0) throw std::invalid_argument(denom);
      return sign * kPi / q;
    } catch (const std::exception&) {
      throw ConfigError("cannot parse angle '" + text + "'");
    }
  }
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return sign * v;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse angle '" + text + "'");
  }
}

}  // namespace

TargetSpec parse_target(const std::string& name, int dim) {
  if (name == "toffoli") {
    if (dim != 8) throw ConfigError("target 'toffoli' requires d = 8");
    return toffoli_gate();
  }
  if (name == "ghz07") {
    return superposition_target(dim);
  }
  if (name.rfind("deutsch:", 0) == 0) {
    if (dim != 8) throw ConfigError("target 'deutsch' requires d = 8");
    const double theta = parse_angle(name.substr(8));
    GateTarget g = deutsch_gate(theta);
    g.label = name;
    return g;
  }
  if (name.rfind("state:", 0) == 0) {
    int index = -1;
    try {
      index = std::stoi(name.substr(6));
    } catch (const std::exception&) {
      throw ConfigError("cannot parse target '" + name + "'");
    }
    if (index < 0 || index >= dim)
      throw ConfigError("target '" + name + "' out of range for d = " +
                        std::to_string(dim));
    return basis_state(index, dim);
  }
  throw ConfigError("unknown target '" + name + "'");
}

int target_dimension(const TargetSpec& target) {
  return std::visit([](const auto& t) { return t.dimension(); }, target);
}

bool is_gate_target(const TargetSpec& target) {
  return std::holds_alternative<GateTarget>(target);
}

}  // namespace spinoct
