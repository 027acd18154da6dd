#pragma once

// JSON forms of circuits, node maps and noise blocks. Readers name the offending
// field ("ops[3].qubits[1]") in every ConfigError.

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dqsim/circuit.hpp"
#include "dqsim/dqc.hpp"
#include "dqsim/error.hpp"
#include "dqsim/noise.hpp"

namespace dqsim::io {

using Json = nlohmann::json;

/// Field access with path-qualified errors and unknown-key rejection.
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const Json& json() const { return j_; }
  const std::string& path() const { return path_; }

  void require_object() const {
    if (!j_.is_object()) fail("expected an object");
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    require_object();
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, _] : j_.items())
      if (!ok.count(k)) throw ConfigError(sub(k) + ": unknown key");
  }

  bool has(const std::string& key) const { return j_.is_object() && j_.contains(key) && !j_.at(key).is_null(); }

  Reader at(const std::string& key) const {
    require_object();
    if (!j_.contains(key)) throw ConfigError(sub(key) + ": missing");
    return Reader(j_.at(key), sub(key));
  }

  Reader at(std::size_t i) const { return Reader(j_.at(i), path_ + "[" + std::to_string(i) + "]"); }

  std::size_t size() const {
    if (!j_.is_array()) fail("expected an array");
    return j_.size();
  }

  double number() const {
    if (!j_.is_number()) fail("expected a number");
    return j_.get<double>();
  }

  std::uint64_t uint() const {
    if (j_.is_number_unsigned() || (j_.is_number_integer() && j_.get<long long>() >= 0)) return j_.get<std::uint64_t>();
    if (j_.is_number_float() && j_.get<double>() >= 0 && j_.get<double>() == std::floor(j_.get<double>()) &&
        j_.get<double>() < 1.8e19)
      return static_cast<std::uint64_t>(j_.get<double>());
    fail("expected a nonnegative integer");
  }

  bool boolean() const {
    if (!j_.is_boolean()) fail("expected true or false");
    return j_.get<bool>();
  }

  std::string string() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }

  std::vector<std::size_t> uint_list() const {
    std::vector<std::size_t> v;
    for (std::size_t i = 0; i < size(); ++i) v.push_back(static_cast<std::size_t>(at(i).uint()));
    return v;
  }

  std::vector<double> number_list() const {
    std::vector<double> v;
    for (std::size_t i = 0; i < size(); ++i) v.push_back(at(i).number());
    return v;
  }

  double number_or(const std::string& key, double fallback) const { return has(key) ? at(key).number() : fallback; }
  std::uint64_t uint_or(const std::string& key, std::uint64_t fallback) const { return has(key) ? at(key).uint() : fallback; }
  bool bool_or(const std::string& key, bool fallback) const { return has(key) ? at(key).boolean() : fallback; }
  std::string string_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? at(key).string() : fallback;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError((path_.empty() ? "<root>" : path_) + ": " + what); }

 private:
  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const Json& j_;
  std::string path_;
};

inline Json parse(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(source + ": " + e.what());
  }
}

inline Json load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

// ---------------------------------------------------------------- matrices

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(row);
  }
  return rows;
}

inline Matrix matrix_from_json(const Reader& r) {
  const std::size_t rows = r.size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(rows));
  for (std::size_t i = 0; i < rows; ++i) {
    const Reader row = r.at(i);
    if (row.size() != rows) row.fail("matrix must be square");
    for (std::size_t k = 0; k < rows; ++k) {
      const Reader e = row.at(k);
      if (e.json().is_number()) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = e.number();
      } else {
        if (e.size() != 2) e.fail("complex entry must be [re, im]");
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = Complex(e.at(0).number(), e.at(1).number());
      }
    }
  }
  return m;
}

// ---------------------------------------------------------------- circuits

inline Json to_json(const Circuit& c) {
  Json ops = Json::array();
  for (const auto& in : c.instructions) {
    Json op{{"kind", std::string(kind_name(in.kind))}, {"qubits", in.qubits}};
    if (!in.params.empty()) op["params"] = in.params;
    if (in.clbit) op["clbit"] = *in.clbit;
    if (in.condition) op["cond"] = {{"clbit", in.condition->clbit}, {"value", in.condition->value}};
    if (in.kind == GateKind::Unitary || in.kind == GateKind::CU) op["matrix"] = matrix_to_json(in.matrix);
    if (in.noise == NoiseTag::comm) op["noise"] = "comm";
    if (in.eps_override) op["eps"] = *in.eps_override;
    ops.push_back(op);
  }
  Json j{{"qubits", c.num_qubits}, {"clbits", c.num_clbits}, {"ops", ops}};
  if (c.global_phase != 0) j["global_phase"] = c.global_phase;
  if (!c.registers.empty()) {
    Json regs = Json::object();
    for (const auto& [name, r] : c.registers) regs[name] = {r.first, r.second};
    j["registers"] = regs;
  }
  if (!c.comm_qubits.empty()) j["comm_qubits"] = c.comm_qubits;
  if (!c.gadgets.empty()) {
    Json gs = Json::array();
    for (const auto& g : c.gadgets)
      gs.push_back({{"source", g.source_instruction},
                    {"control_node", g.control_node},
                    {"target_node", g.target_node},
                    {"comm_control", g.comm_control},
                    {"comm_target", g.comm_target},
                    {"clbit_x", g.clbit_x},
                    {"clbit_z", g.clbit_z}});
    j["gadgets"] = gs;
  }
  return j;
}

inline Circuit circuit_from_json(const Reader& r) {
  r.allow_only({"qubits", "clbits", "ops", "global_phase", "registers", "comm_qubits", "gadgets"});
  Circuit c(static_cast<std::size_t>(r.at("qubits").uint()), static_cast<std::size_t>(r.uint_or("clbits", 0)));
  c.global_phase = r.number_or("global_phase", 0.0);
  const Reader ops = r.at("ops");
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const Reader op = ops.at(i);
    op.allow_only({"kind", "qubits", "params", "clbit", "cond", "matrix", "noise", "eps"});
    Instruction in;
    const std::string kind = op.at("kind").string();
    const auto k = kind_from_name(kind);
    if (!k) op.at("kind").fail("unknown gate '" + kind + "'");
    in.kind = *k;
    in.qubits = op.has("qubits") ? op.at("qubits").uint_list() : std::vector<std::size_t>{};
    if (op.has("params")) in.params = op.at("params").number_list();
    if (op.has("clbit")) in.clbit = static_cast<std::size_t>(op.at("clbit").uint());
    if (op.has("cond")) {
      const Reader cond = op.at("cond");
      cond.allow_only({"clbit", "value"});
      const auto v = cond.uint_or("value", 1);
      if (v > 1) cond.at("value").fail("condition value must be 0 or 1");
      in.condition = Condition{static_cast<std::size_t>(cond.at("clbit").uint()), static_cast<int>(v)};
    }
    if (op.has("matrix")) in.matrix = matrix_from_json(op.at("matrix"));
    if (op.has("noise")) {
      const std::string tag = op.at("noise").string();
      if (tag == "comm") in.noise = NoiseTag::comm;
      else if (tag != "gate") op.at("noise").fail("noise tag must be 'gate' or 'comm'");
    }
    if (op.has("eps")) in.eps_override = op.at("eps").number();
    try {
      validate_instruction(in, i, c.num_qubits, c.num_clbits);
    } catch (const std::exception& e) {
      throw ConfigError(op.path() + ": " + e.what());
    }
    c.instructions.push_back(std::move(in));
  }
  if (r.has("registers")) {
    const Reader regs = r.at("registers");
    regs.require_object();
    for (const auto& [name, _] : regs.json().items()) {
      const Reader reg = regs.at(name);
      if (reg.size() != 2) reg.fail("register must be [start, size]");
      c.registers[name] = {static_cast<std::size_t>(reg.at(0).uint()), static_cast<std::size_t>(reg.at(1).uint())};
    }
  }
  if (r.has("comm_qubits")) c.comm_qubits = r.at("comm_qubits").uint_list();
  if (r.has("gadgets")) {
    const Reader gs = r.at("gadgets");
    for (std::size_t i = 0; i < gs.size(); ++i) {
      const Reader g = gs.at(i);
      g.allow_only({"source", "control_node", "target_node", "comm_control", "comm_target", "clbit_x", "clbit_z"});
      GadgetRecord rec;
      rec.source_instruction = static_cast<std::size_t>(g.at("source").uint());
      rec.control_node = g.at("control_node").string();
      rec.target_node = g.at("target_node").string();
      rec.comm_control = static_cast<std::size_t>(g.at("comm_control").uint());
      rec.comm_target = static_cast<std::size_t>(g.at("comm_target").uint());
      rec.clbit_x = static_cast<std::size_t>(g.at("clbit_x").uint());
      rec.clbit_z = static_cast<std::size_t>(g.at("clbit_z").uint());
      c.gadgets.push_back(rec);
    }
  }
  return c;
}

inline Circuit circuit_from_json(const Json& j) { return circuit_from_json(Reader(j, "")); }

// ---------------------------------------------------------------- node maps

inline Json to_json(const NodeMap& m) {
  Json nodes = Json::object();
  for (const auto& [name, qs] : m.nodes) nodes[name] = qs;
  return Json{{"nodes", nodes}, {"comm_per_node", m.comm_per_node}, {"coupling_p", m.coupling_p}};
}

inline NodeMap nodemap_from_json(const Reader& r) {
  r.allow_only({"nodes", "comm_per_node", "coupling_p"});
  NodeMap m;
  const Reader nodes = r.at("nodes");
  nodes.require_object();
  for (const auto& [name, _] : nodes.json().items()) m.nodes.emplace_back(name, nodes.at(name).uint_list());
  m.comm_per_node = static_cast<std::size_t>(r.uint_or("comm_per_node", 1));
  m.coupling_p = r.number_or("coupling_p", 1.0);
  try {
    validate(m);
  } catch (const std::exception& e) {
    throw ConfigError(r.path() + ": " + e.what());
  }
  return m;
}

inline NodeMap nodemap_from_json(const Json& j) { return nodemap_from_json(Reader(j, "")); }

// ---------------------------------------------------------------- noise

inline Json to_json(const NoiseParams& p) {
  return Json{{"eps_d", p.eps_d}, {"eps_g", p.eps_g},         {"eps_m", p.eps_m},
              {"eps_reset", p.eps_reset}, {"t_comm_s", p.t_comm}, {"T2_s", p.T2}};
}

/// eps_reset defaults to eps_m when omitted.
inline NoiseParams noise_from_json(const Reader& r) {
  r.allow_only({"eps_d", "eps_g", "eps_m", "eps_reset", "t_comm_s", "T2_s"});
  NoiseParams p;
  p.eps_d = r.number_or("eps_d", 0.0);
  p.eps_g = r.number_or("eps_g", 0.0);
  p.eps_m = r.number_or("eps_m", 0.0);
  p.eps_reset = r.number_or("eps_reset", p.eps_m);
  p.t_comm = r.number_or("t_comm_s", 0.0);
  p.T2 = r.number_or("T2_s", 0.0);
  try {
    validate(p);
  } catch (const std::exception& e) {
    throw ConfigError((r.path().empty() ? std::string("noise") : r.path()) + ": " + e.what());
  }
  return p;
}

inline NoiseParams noise_from_json(const Json& j) { return noise_from_json(Reader(j, "")); }

}  // namespace dqsim::io
