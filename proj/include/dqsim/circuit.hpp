#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dqsim/error.hpp"
#include "dqsim/matrix.hpp"

namespace dqsim {

enum class GateKind {
  H,
  X,
  Y,
  Z,
  P,
  RX,
  RY,
  RZ,
  CNOT,
  CP,
  CRY,
  MCX,
  Unitary,  // arbitrary k-qubit block, matrix bit i <-> qubits[i]
  CU,       // qubits[0] controls the block on qubits[1..]
  Measure,
  Reset,
  Barrier,
};

/// Which depolarizing rate a single-qubit gate draws on when noise is enabled.
enum class NoiseTag {
  gate,  // eps_d for 1q gates, eps_g for 2q gates
  comm,  // classically communicated correction: comm-decoherence rate
};

struct Condition {
  std::size_t clbit = 0;
  int value = 1;
  bool operator==(const Condition&) const = default;
};

struct Instruction {
  GateKind kind = GateKind::Barrier;
  std::vector<std::size_t> qubits;
  std::vector<double> params;
  std::optional<std::size_t> clbit;
  std::optional<Condition> condition;
  Matrix matrix;  // Unitary / CU only
  NoiseTag noise = NoiseTag::gate;
  std::optional<double> eps_override;

  Instruction& c_if(std::size_t bit, int value) {
    condition = Condition{bit, value};
    return *this;
  }
};

inline std::string_view kind_name(GateKind k) {
  switch (k) {
    case GateKind::H: return "H";
    case GateKind::X: return "X";
    case GateKind::Y: return "Y";
    case GateKind::Z: return "Z";
    case GateKind::P: return "P";
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::CNOT: return "CNOT";
    case GateKind::CP: return "CP";
    case GateKind::CRY: return "CRY";
    case GateKind::MCX: return "MCX";
    case GateKind::Unitary: return "UNITARY";
    case GateKind::CU: return "CU";
    case GateKind::Measure: return "MEASURE";
    case GateKind::Reset: return "RESET";
    case GateKind::Barrier: return "BARRIER";
  }
  return "?";
}

inline std::optional<GateKind> kind_from_name(std::string_view s) {
  static const std::map<std::string_view, GateKind> table = {
      {"H", GateKind::H},        {"X", GateKind::X},
      {"Y", GateKind::Y},        {"Z", GateKind::Z},
      {"P", GateKind::P},        {"RX", GateKind::RX},
      {"RY", GateKind::RY},      {"RZ", GateKind::RZ},
      {"CNOT", GateKind::CNOT},  {"CX", GateKind::CNOT},
      {"CP", GateKind::CP},      {"CRY", GateKind::CRY},
      {"MCX", GateKind::MCX},    {"UNITARY", GateKind::Unitary},
      {"CU", GateKind::CU},      {"MEASURE", GateKind::Measure},
      {"RESET", GateKind::Reset}, {"BARRIER", GateKind::Barrier},
  };
  auto it = table.find(s);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

inline bool is_unitary_kind(GateKind k) {
  return k != GateKind::Measure && k != GateKind::Reset && k != GateKind::Barrier;
}

inline std::size_t param_count(GateKind k) {
  switch (k) {
    case GateKind::P:
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ:
    case GateKind::CP:
    case GateKind::CRY: return 1;
    default: return 0;
  }
}

inline std::optional<std::size_t> fixed_arity(GateKind k) {
  switch (k) {
    case GateKind::H:
    case GateKind::X:
    case GateKind::Y:
    case GateKind::Z:
    case GateKind::P:
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ:
    case GateKind::Measure:
    case GateKind::Reset: return 1;
    case GateKind::CNOT:
    case GateKind::CP:
    case GateKind::CRY: return 2;
    default: return std::nullopt;
  }
}

inline Mat2 single_qubit_matrix(const Instruction& in) {
  switch (in.kind) {
    case GateKind::H: return gates::h();
    case GateKind::X: return gates::x();
    case GateKind::Y: return gates::y();
    case GateKind::Z: return gates::z();
    case GateKind::P: return gates::phase(in.params.at(0));
    case GateKind::RX: return gates::rx(in.params.at(0));
    case GateKind::RY: return gates::ry(in.params.at(0));
    case GateKind::RZ: return gates::rz(in.params.at(0));
    case GateKind::Unitary:
      if (in.matrix.rows() == 2) return in.matrix;
      break;
    default: break;
  }
  throw ContractError("not a single-qubit gate: " + std::string(kind_name(in.kind)));
}

/// Matrix of a unitary instruction in its local basis (index bit i <-> qubits[i]).
inline Matrix gate_matrix(const Instruction& in) {
  const std::size_t k = in.qubits.size();
  const Eigen::Index dim = Eigen::Index{1} << k;
  switch (in.kind) {
    case GateKind::CNOT: {
      Matrix m = Matrix::Identity(4, 4);
      m(1, 1) = m(3, 3) = 0;
      m(1, 3) = m(3, 1) = 1;
      return m;
    }
    case GateKind::CP: {
      Matrix m = Matrix::Identity(4, 4);
      m(3, 3) = std::polar(1.0, in.params.at(0));
      return m;
    }
    case GateKind::CRY: {
      Matrix m = Matrix::Identity(4, 4);
      const Mat2 r = gates::ry(in.params.at(0));
      m(1, 1) = r(0, 0);
      m(1, 3) = r(0, 1);
      m(3, 1) = r(1, 0);
      m(3, 3) = r(1, 1);
      return m;
    }
    case GateKind::MCX: {
      Matrix m = Matrix::Identity(dim, dim);
      const Eigen::Index lo = (Eigen::Index{1} << (k - 1)) - 1;
      const Eigen::Index hi = dim - 1;
      m(lo, lo) = m(hi, hi) = 0;
      m(lo, hi) = m(hi, lo) = 1;
      return m;
    }
    case GateKind::Unitary: return in.matrix;
    case GateKind::CU: {
      Matrix m = Matrix::Identity(dim, dim);
      for (Eigen::Index i = 0; i < dim / 2; ++i)
        for (Eigen::Index j = 0; j < dim / 2; ++j) m(2 * i + 1, 2 * j + 1) = in.matrix(i, j);
      return m;
    }
    default: return single_qubit_matrix(in);
  }
}

/// Bookkeeping added by the distributed compiler.
struct GadgetRecord {
  std::size_t source_instruction = 0;  // index in the input circuit
  std::string control_node;
  std::string target_node;
  std::size_t comm_control = 0;
  std::size_t comm_target = 0;
  std::size_t clbit_x = 0;  // result of the control-side comm measurement, drives X on target
  std::size_t clbit_z = 0;  // result of the target-side comm measurement, drives Z on control
};

struct Circuit {
  std::size_t num_qubits = 0;
  std::size_t num_clbits = 0;
  std::vector<Instruction> instructions;
  std::map<std::string, std::pair<std::size_t, std::size_t>> registers;  // name -> (start, size)
  double global_phase = 0.0;

  // Non-empty only for compiler output.
  std::vector<std::size_t> comm_qubits;
  std::vector<GadgetRecord> gadgets;

  Circuit() = default;
  Circuit(std::size_t qubits, std::size_t clbits) : num_qubits(qubits), num_clbits(clbits) {}

  bool is_distributed() const { return !comm_qubits.empty() || !gadgets.empty(); }

  Instruction& append(Instruction in) {
    instructions.push_back(std::move(in));
    return instructions.back();
  }

  Instruction& gate1(GateKind k, std::size_t q, std::vector<double> params = {}) {
    Instruction in;
    in.kind = k;
    in.qubits = {q};
    in.params = std::move(params);
    return append(std::move(in));
  }
  Instruction& h(std::size_t q) { return gate1(GateKind::H, q); }
  Instruction& x(std::size_t q) { return gate1(GateKind::X, q); }
  Instruction& y(std::size_t q) { return gate1(GateKind::Y, q); }
  Instruction& z(std::size_t q) { return gate1(GateKind::Z, q); }
  Instruction& p(double theta, std::size_t q) { return gate1(GateKind::P, q, {theta}); }
  Instruction& rx(double theta, std::size_t q) { return gate1(GateKind::RX, q, {theta}); }
  Instruction& ry(double theta, std::size_t q) { return gate1(GateKind::RY, q, {theta}); }
  Instruction& rz(double theta, std::size_t q) { return gate1(GateKind::RZ, q, {theta}); }

  Instruction& cx(std::size_t c, std::size_t t) {
    Instruction in;
    in.kind = GateKind::CNOT;
    in.qubits = {c, t};
    return append(std::move(in));
  }
  Instruction& cp(double theta, std::size_t a, std::size_t b) {
    Instruction in;
    in.kind = GateKind::CP;
    in.qubits = {a, b};
    in.params = {theta};
    return append(std::move(in));
  }
  Instruction& cry(double theta, std::size_t c, std::size_t t) {
    Instruction in;
    in.kind = GateKind::CRY;
    in.qubits = {c, t};
    in.params = {theta};
    return append(std::move(in));
  }
  Instruction& mcx(std::vector<std::size_t> controls, std::size_t t) {
    Instruction in;
    in.kind = GateKind::MCX;
    in.qubits = std::move(controls);
    in.qubits.push_back(t);
    return append(std::move(in));
  }
  Instruction& unitary(Matrix m, std::vector<std::size_t> qubits) {
    Instruction in;
    in.kind = GateKind::Unitary;
    in.qubits = std::move(qubits);
    in.matrix = std::move(m);
    return append(std::move(in));
  }
  Instruction& cu(Matrix m, std::size_t control, std::vector<std::size_t> targets) {
    Instruction in;
    in.kind = GateKind::CU;
    in.qubits = {control};
    in.qubits.insert(in.qubits.end(), targets.begin(), targets.end());
    in.matrix = std::move(m);
    return append(std::move(in));
  }
  Instruction& measure(std::size_t q, std::size_t c) {
    Instruction in;
    in.kind = GateKind::Measure;
    in.qubits = {q};
    in.clbit = c;
    return append(std::move(in));
  }
  Instruction& reset(std::size_t q) { return gate1(GateKind::Reset, q); }
  Instruction& barrier(std::vector<std::size_t> qubits = {}) {
    Instruction in;
    in.kind = GateKind::Barrier;
    in.qubits = std::move(qubits);
    return append(std::move(in));
  }

  void measure_all() {
    for (std::size_t q = 0; q < num_qubits; ++q) measure(q, q);
  }

  /// Appends `other`, mapping its qubit i to qubit_map[i] and clbit j to clbit_map[j].
  void compose(const Circuit& other, const std::vector<std::size_t>& qubit_map,
               const std::vector<std::size_t>& clbit_map = {}) {
    for (Instruction in : other.instructions) {
      for (auto& q : in.qubits) q = qubit_map.at(q);
      if (in.clbit) in.clbit = clbit_map.at(*in.clbit);
      if (in.condition) in.condition->clbit = clbit_map.at(in.condition->clbit);
      append(std::move(in));
    }
    global_phase += other.global_phase;
  }

  bool has_nonunitary() const {
    return std::any_of(instructions.begin(), instructions.end(), [](const Instruction& in) {
      return in.kind == GateKind::Measure || in.kind == GateKind::Reset || in.condition;
    });
  }
};

inline std::string describe(const Instruction& in, std::size_t index) {
  std::string s = "instruction " + std::to_string(index) + " (" + std::string(kind_name(in.kind));
  for (std::size_t q : in.qubits) s += " " + std::to_string(q);
  return s + ")";
}

/// Throws IndexError / ValidationError on the first malformed instruction.
inline void validate_instruction(const Instruction& in, std::size_t index, std::size_t num_qubits,
                                 std::size_t num_clbits) {
  const std::string where = describe(in, index);
  for (std::size_t q : in.qubits)
    if (q >= num_qubits)
      throw IndexError(where + ": qubit " + std::to_string(q) + " >= " + std::to_string(num_qubits));
  {
    std::set<std::size_t> uniq(in.qubits.begin(), in.qubits.end());
    if (uniq.size() != in.qubits.size()) throw ValidationError(where + ": repeated qubit");
  }
  if (auto a = fixed_arity(in.kind); a && in.qubits.size() != *a)
    throw ValidationError(where + ": expects " + std::to_string(*a) + " qubit(s)");
  if (in.params.size() != param_count(in.kind))
    throw ValidationError(where + ": expects " + std::to_string(param_count(in.kind)) + " parameter(s)");
  switch (in.kind) {
    case GateKind::MCX:
      if (in.qubits.size() < 2) throw ValidationError(where + ": MCX needs a control and a target");
      break;
    case GateKind::Unitary:
    case GateKind::CU: {
      const std::size_t k = in.qubits.size() - (in.kind == GateKind::CU ? 1 : 0);
      if (k < 1 || k > 4) throw ValidationError(where + ": block must act on 1..4 qubits");
      const Eigen::Index dim = Eigen::Index{1} << k;
      if (in.matrix.rows() != dim || in.matrix.cols() != dim)
        throw ValidationError(where + ": matrix is not " + std::to_string(dim) + "x" + std::to_string(dim));
      if (!is_unitary(in.matrix, 1e-10)) throw ValidationError(where + ": matrix is not unitary");
      break;
    }
    case GateKind::Measure:
      if (!in.clbit) throw ValidationError(where + ": measurement without clbit");
      if (*in.clbit >= num_clbits)
        throw IndexError(where + ": clbit " + std::to_string(*in.clbit) + " >= " + std::to_string(num_clbits));
      break;
    default: break;
  }
  if (in.condition) {
    if (in.condition->clbit >= num_clbits)
      throw IndexError(where + ": condition clbit " + std::to_string(in.condition->clbit) + " >= " +
                       std::to_string(num_clbits));
    if (in.condition->value != 0 && in.condition->value != 1)
      throw ValidationError(where + ": condition value must be 0 or 1");
  }
  if (in.eps_override && (*in.eps_override < 0 || *in.eps_override > 1))
    throw ValidationError(where + ": noise override outside [0,1]");
}

inline void validate(const Circuit& c) {
  for (std::size_t i = 0; i < c.instructions.size(); ++i)
    validate_instruction(c.instructions[i], i, c.num_qubits, c.num_clbits);
}

inline Instruction inverse_of(const Instruction& in) {
  Instruction out = in;
  switch (in.kind) {
    case GateKind::P:
    case GateKind::RX:
    case GateKind::RY:
    case GateKind::RZ:
    case GateKind::CP:
    case GateKind::CRY: out.params[0] = -in.params[0]; break;
    case GateKind::Unitary:
    case GateKind::CU: out.matrix = in.matrix.adjoint(); break;
    case GateKind::Measure:
    case GateKind::Reset: throw ContractError("cannot invert a measurement or reset");
    default: break;
  }
  if (in.condition) throw ContractError("cannot invert a classically conditioned gate");
  return out;
}

/// Exact inverse of a measurement-free circuit.
inline Circuit inverse(const Circuit& c) {
  Circuit out(c.num_qubits, c.num_clbits);
  out.registers = c.registers;
  out.global_phase = -c.global_phase;
  for (auto it = c.instructions.rbegin(); it != c.instructions.rend(); ++it) out.append(inverse_of(*it));
  return out;
}

}  // namespace dqsim
