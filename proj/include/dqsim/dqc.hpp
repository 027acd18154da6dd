#pragma once

// Distributed compilation: every CNOT whose endpoints sit on different nodes is
// replaced by a teleportation gadget (one Bell pair on communication qubits, two
// local CNOTs, two measurements, two classically conditioned corrections).

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dqsim/circuit.hpp"
#include "dqsim/error.hpp"
#include "dqsim/synthesis.hpp"

namespace dqsim {

struct NodeMap {
  std::vector<std::pair<std::string, std::vector<std::size_t>>> nodes;  // kept in declaration order
  std::size_t comm_per_node = 1;
  double coupling_p = 1.0;

  NodeMap() = default;
  NodeMap(std::vector<std::pair<std::string, std::vector<std::size_t>>> n, std::size_t m = 1, double p = 1.0)
      : nodes(std::move(n)), comm_per_node(m), coupling_p(p) {}

  /// Node index of every data qubit (size = num_data_qubits).
  std::vector<std::size_t> owner_table(std::size_t num_data_qubits) const {
    std::vector<std::size_t> owner(num_data_qubits, SIZE_MAX);
    for (std::size_t k = 0; k < nodes.size(); ++k)
      for (std::size_t q : nodes[k].second) {
        if (q >= num_data_qubits)
          throw ValidationError("node '" + nodes[k].first + "' lists qubit " + std::to_string(q) +
                                " but the circuit has " + std::to_string(num_data_qubits) + " data qubits");
        if (owner[q] != SIZE_MAX)
          throw ValidationError("qubit " + std::to_string(q) + " is assigned to both node '" + nodes[owner[q]].first +
                                "' and node '" + nodes[k].first + "'");
        owner[q] = k;
      }
    for (std::size_t q = 0; q < num_data_qubits; ++q)
      if (owner[q] == SIZE_MAX) throw ValidationError("qubit " + std::to_string(q) + " is not assigned to any node");
    return owner;
  }
};

inline void validate(const NodeMap& m) {
  if (m.nodes.empty()) throw ValidationError("node map has no nodes");
  if (m.comm_per_node < 1) throw ValidationError("comm_per_node must be >= 1");
  if (!(m.coupling_p > 0 && m.coupling_p <= 1)) throw ValidationError("coupling_p must lie in (0, 1]");
  std::map<std::string, int> seen;
  for (const auto& [name, _] : m.nodes)
    if (seen[name]++) throw ValidationError("node '" + name + "' declared twice");
}

struct DistributedCircuit {
  Circuit circuit;
  bool gate_app = false;
  std::size_t nonlocal_count = 0;
  double coupling_p = 1.0;

  const std::vector<GadgetRecord>& gadgets() const { return circuit.gadgets; }
};

namespace detail {

/// Hands out communication qubits per node, round-robin over at most m of them.
class CommAllocator {
 public:
  // `pool` empty: qubits are appended to the circuit on demand.
  CommAllocator(std::size_t m, std::vector<std::size_t> pool) : m_(m), pool_(std::move(pool)), fixed_(!pool_.empty()) {}

  std::size_t take(std::size_t node, Circuit& out, const std::string& who) {
    auto& mine = owned_[node];
    std::size_t& next = cursor_[node];
    if (mine.size() < m_) {
      std::size_t q;
      if (fixed_) {
        if (used_ >= pool_.size())
          throw CapacityError(who + " needs a communication qubit but the comm register (" +
                              std::to_string(pool_.size()) + " qubits) is exhausted");
        q = pool_[used_++];
      } else {
        q = out.num_qubits++;
      }
      out.comm_qubits.push_back(q);
      mine.push_back(q);
      return q;
    }
    const std::size_t q = mine[next % mine.size()];
    ++next;
    return q;
  }

 private:
  std::size_t m_;
  std::vector<std::size_t> pool_;
  bool fixed_;
  std::size_t used_ = 0;
  std::map<std::size_t, std::vector<std::size_t>> owned_;
  std::map<std::size_t, std::size_t> cursor_;
};

inline bool spans_nodes(const Instruction& in, const std::vector<std::size_t>& owner) {
  for (std::size_t q : in.qubits)
    if (owner[q] != owner[in.qubits[0]]) return true;
  return false;
}

/// Lowers a node-spanning gate to single-qubit gates and CNOTs (global phase in `phase`).
inline synth::Emitter split_nonlocal(const Instruction& in, std::size_t index) {
  if (in.condition)
    throw UnsupportedGateError(describe(in, index) + ": classically conditioned gate spans nodes", index);
  synth::Emitter e;
  switch (in.kind) {
    case GateKind::CNOT: e.ops.push_back(in); return e;
    case GateKind::CP:
    case GateKind::CRY:
    case GateKind::CU:
    case GateKind::MCX: synth::lower_instruction(e, in); return e;
    default:
      throw UnsupportedGateError(describe(in, index) + ": no decomposition rule for a node-spanning " +
                                     std::string(kind_name(in.kind)),
                                 index);
  }
}

struct GadgetSink {
  std::vector<std::size_t> owner;
  const NodeMap* nodes;
  CommAllocator comm;
  std::vector<std::size_t> clbit_pool;  // empty: append clbits on demand
  std::size_t clbits_used = 0;

  std::size_t take_clbit(Circuit& out, const std::string& who) {
    if (clbit_pool.empty()) return out.num_clbits++;
    if (clbits_used >= clbit_pool.size())
      throw CapacityError(who + " needs a classical bit but the supplied clbit list (" +
                          std::to_string(clbit_pool.size()) + " bits) is exhausted");
    return clbit_pool[clbits_used++];
  }

  void emit(Circuit& out, std::size_t ctrl, std::size_t tgt, std::size_t source) {
    const std::size_t na = owner[ctrl], nb = owner[tgt];
    const std::string who = "gadget " + std::to_string(out.gadgets.size()) + " (instruction " + std::to_string(source) +
                            ", CNOT " + std::to_string(ctrl) + " -> " + std::to_string(tgt) + ")";
    GadgetRecord g;
    g.source_instruction = source;
    g.control_node = nodes->nodes[na].first;
    g.target_node = nodes->nodes[nb].first;
    g.comm_control = comm.take(na, out, who);
    g.comm_target = comm.take(nb, out, who);
    g.clbit_x = take_clbit(out, who);
    g.clbit_z = take_clbit(out, who);
    const std::size_t ca = g.comm_control, cb = g.comm_target;
    out.h(ca);
    out.cx(ca, cb);
    out.cx(ctrl, ca);
    out.cx(cb, tgt);
    out.h(cb);
    out.measure(ca, g.clbit_x);
    out.measure(cb, g.clbit_z);
    out.x(tgt).c_if(g.clbit_x, 1).noise = NoiseTag::comm;
    out.z(ctrl).c_if(g.clbit_z, 1).noise = NoiseTag::comm;
    out.reset(ca);
    out.reset(cb);
    out.gadgets.push_back(g);
  }
};

inline DistributedCircuit compile(const Circuit& circuit, std::size_t num_data, const NodeMap& nodes,
                                  std::vector<std::size_t> comm_pool, std::vector<std::size_t> clbit_pool) {
  if (circuit.is_distributed())
    throw ContractError("circuit already carries gadget metadata; compiling it again would double-wrap gadgets");
  validate(circuit);
  validate(nodes);
  GadgetSink sink{nodes.owner_table(num_data), &nodes, CommAllocator(nodes.comm_per_node, comm_pool),
                  std::move(clbit_pool)};
  for (std::size_t i = 0; i < circuit.instructions.size(); ++i)
    for (std::size_t q : circuit.instructions[i].qubits)
      if (q >= num_data)
        throw ValidationError(describe(circuit.instructions[i], i) + ": qubit " + std::to_string(q) +
                              " belongs to the communication register");

  DistributedCircuit out;
  out.coupling_p = nodes.coupling_p;
  out.circuit = circuit;
  out.circuit.instructions.clear();
  Circuit& c = out.circuit;
  const std::size_t data_clbits = circuit.num_clbits;
  for (std::size_t i = 0; i < circuit.instructions.size(); ++i) {
    const Instruction& in = circuit.instructions[i];
    if (!is_unitary_kind(in.kind) || in.qubits.size() < 2 || !spans_nodes(in, sink.owner)) {
      c.instructions.push_back(in);
      continue;
    }
    synth::Emitter lowered = split_nonlocal(in, i);
    c.global_phase += lowered.phase;
    for (Instruction& op : lowered.ops) {
      if (op.kind == GateKind::CNOT && sink.owner[op.qubits[0]] != sink.owner[op.qubits[1]]) {
        sink.emit(c, op.qubits[0], op.qubits[1], i);
      } else {
        c.instructions.push_back(std::move(op));
      }
    }
  }
  out.nonlocal_count = c.gadgets.size();
  if (!c.comm_qubits.empty() && comm_pool.empty())
    c.registers["comm"] = {num_data, c.num_qubits - num_data};
  if (c.num_clbits > data_clbits) c.registers["gadget"] = {data_clbits, c.num_clbits - data_clbits};
  out.gate_app = true;
  return out;
}

}  // namespace detail

/// Compiles onto `nodes`, appending communication qubits and gadget clbits as needed.
inline DistributedCircuit create_distributed_circuit(const Circuit& circuit, const NodeMap& nodes) {
  return detail::compile(circuit, circuit.num_qubits, nodes, {}, {});
}

/// Same rewrite, drawing communication qubits from `comm_register` and gadget
/// clbits (two per gadget) from `clbits`; both are declared by the caller.
inline DistributedCircuit create_with_comm(const Circuit& circuit, const std::vector<std::size_t>& comm_register,
                                           const std::vector<std::size_t>& clbits, const NodeMap& nodes,
                                           double coupling_p) {
  if (comm_register.empty()) throw CapacityError("comm register is empty");
  for (std::size_t q : comm_register)
    if (q >= circuit.num_qubits) throw IndexError("comm qubit " + std::to_string(q) + " out of range");
  for (std::size_t b : clbits)
    if (b >= circuit.num_clbits) throw IndexError("clbit " + std::to_string(b) + " out of range");
  // data qubits: everything not in the comm register, which must sit at the top
  const std::size_t num_data = circuit.num_qubits - comm_register.size();
  for (std::size_t q : comm_register)
    if (q < num_data) throw ValidationError("comm register must occupy the highest qubit indices");
  NodeMap m = nodes;
  m.coupling_p = coupling_p;
  return detail::compile(circuit, num_data, m, comm_register, clbits);
}

/// Number of node-crossing CNOTs after lowering, without building gadgets.
inline std::size_t count_nonlocal(const Circuit& circuit, const NodeMap& nodes) {
  validate(nodes);
  const auto owner = nodes.owner_table(circuit.num_qubits);
  std::size_t n = 0;
  for (std::size_t i = 0; i < circuit.instructions.size(); ++i) {
    const Instruction& in = circuit.instructions[i];
    if (!is_unitary_kind(in.kind) || in.qubits.size() < 2 || !detail::spans_nodes(in, owner)) continue;
    for (const Instruction& op : detail::split_nonlocal(in, i).ops)
      if (op.kind == GateKind::CNOT && owner[op.qubits[0]] != owner[op.qubits[1]]) ++n;
  }
  return n;
}

}  // namespace dqsim
