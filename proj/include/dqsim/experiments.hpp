#pragma once

// Experiment drivers behind the command-line tool. Each takes a parsed config and
// a master seed and returns rows in a fixed order, independent of thread count.

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <iomanip>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dqsim/algorithms.hpp"
#include "dqsim/dqc.hpp"
#include "dqsim/dynamic.hpp"
#include "dqsim/io.hpp"
#include "dqsim/link.hpp"
#include "dqsim/noise.hpp"
#include "dqsim/simulator.hpp"

namespace dqsim::experiments {

using io::Json;
using io::Reader;

constexpr std::uint64_t kConfigVersion = 1;

/// Compilation onto the node map failed; nothing was simulated.
class CompileFailure : public std::runtime_error {
 public:
  explicit CompileFailure(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------- helpers

/// Runs f(0..n-1) on a thread pool; results come back in index order.
template <class F>
auto parallel_map(std::size_t n, F f, unsigned threads = 0) -> std::vector<decltype(f(std::size_t{0}))> {
  using T = decltype(f(std::size_t{0}));
  std::vector<std::optional<T>> slots(n);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        slots[i].emplace(f(i));
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  std::vector<T> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

/// Shortest round-trip decimal form.
inline std::string fmt(double v) {
  for (int prec = 6;; ++prec) {
    std::ostringstream t;
    t << std::setprecision(prec) << v;
    double back = 0;
    std::istringstream(t.str()) >> back;
    if (back == v || prec == 17) return t.str();
  }
}

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string str() const {
    std::ostringstream ss;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) ss << (i ? "," : "") << cells[i];
      ss << '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return ss.str();
  }
};

inline double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

/// Sample standard deviation (n - 1 denominator).
inline double stddev_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

/// Probability vector (qubit 0 = least significant index bit) as outcome map.
inline Distribution indexed_distribution(const std::vector<double>& p) {
  const auto n = static_cast<std::size_t>(std::countr_zero(p.size()));
  Distribution d;
  for (std::size_t i = 0; i < p.size(); ++i) {
    std::string key(n, '0');
    for (std::size_t j = 0; j < n; ++j)
      if (i >> j & 1) key[j] = '1';
    d[key] = p[i];
  }
  return d;
}

/// `count` nodes over `num_qubits` qubits in contiguous blocks, earlier blocks larger.
inline NodeMap contiguous_nodes(std::size_t num_qubits, std::size_t count, double p = 1.0) {
  if (count < 1 || count > num_qubits)
    throw ConfigError("cannot split " + std::to_string(num_qubits) + " qubits into " + std::to_string(count) + " nodes");
  NodeMap m;
  m.coupling_p = p;
  std::size_t q = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t size = num_qubits / count + (k < num_qubits % count ? 1 : 0);
    std::vector<std::size_t> qs;
    for (std::size_t i = 0; i < size; ++i) qs.push_back(q++);
    m.nodes.emplace_back(std::to_string(k + 1), qs);
  }
  return m;
}

/// Amplitude-estimation node layout: the ancilla (qubit n) alone on the last node,
/// index qubits split contiguously over the others.
inline NodeMap qae_nodes(std::size_t n, std::size_t count) {
  if (count == 1) return contiguous_nodes(n + 1, 1);
  if (count - 1 > n) throw ConfigError("node count " + std::to_string(count) + " exceeds index qubits + 1");
  NodeMap m = contiguous_nodes(n, count - 1);
  m.nodes.emplace_back(std::to_string(count), std::vector<std::size_t>{n});
  return m;
}

inline DistributedCircuit compile_or_fail(const Circuit& c, const NodeMap& nodes) {
  try {
    return create_distributed_circuit(c, nodes);
  } catch (const UnsupportedGateError& e) {
    throw CompileFailure(e.what());
  } catch (const CapacityError& e) {
    throw CompileFailure(e.what());
  } catch (const ValidationError& e) {
    throw CompileFailure(e.what());
  }
}

// ---------------------------------------------------------------- config plumbing

struct Source {
  std::filesystem::path base_dir;  // relative file references resolve against this
};

inline void check_header(const Reader& r, const std::string& experiment) {
  if (!r.has("version")) throw ConfigError("version: missing (expected " + std::to_string(kConfigVersion) + ")");
  if (r.at("version").uint() != kConfigVersion)
    r.at("version").fail("unsupported config version, expected " + std::to_string(kConfigVersion));
  if (r.has("experiment") && r.at("experiment").string() != experiment)
    r.at("experiment").fail("config is for '" + r.at("experiment").string() + "', not '" + experiment + "'");
}

/// Inline object or path to a JSON file.
inline Json inline_or_file(const Reader& r, const Source& src) {
  if (r.json().is_string()) {
    std::filesystem::path p = r.string();
    if (p.is_relative()) p = src.base_dir / p;
    return io::load_file(p.string());
  }
  r.require_object();
  return r.json();
}

inline std::uint64_t positive(const Reader& r, const std::string& key, std::uint64_t fallback) {
  const std::uint64_t v = r.uint_or(key, fallback);
  if (v < 1) r.at(key).fail("must be >= 1");
  return v;
}

inline std::vector<double> probabilities(const Reader& r, const std::string& key, std::vector<double> fallback,
                                         bool allow_zero) {
  if (!r.has(key)) return fallback;
  const auto v = r.at(key).number_list();
  if (v.empty()) r.at(key).fail("must not be empty");
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!(v[i] >= 0 && v[i] <= 1) || (!allow_zero && v[i] == 0)) r.at(key).at(i).fail("must lie in " + std::string(allow_zero ? "[0, 1]" : "(0, 1]"));
  return v;
}

inline std::vector<std::size_t> counts(const Reader& r, const std::string& key, std::vector<std::size_t> fallback) {
  if (!r.has(key)) return fallback;
  auto v = r.at(key).uint_list();
  if (v.empty()) r.at(key).fail("must not be empty");
  for (std::size_t i = 0; i < v.size(); ++i)
    if (v[i] < 1) r.at(key).at(i).fail("must be >= 1");
  return v;
}

inline Backend backend_from(const Reader& r) {
  const std::string b = r.string_or("backend", "auto");
  if (b == "auto") return Backend::automatic;
  if (b == "density") return Backend::density;
  if (b == "trajectory") return Backend::trajectory;
  r.at("backend").fail("backend must be 'auto', 'density' or 'trajectory'");
}

inline std::string backend_name(Backend b) {
  return b == Backend::density ? "density" : b == Backend::trajectory ? "trajectory" : "auto";
}

// ---------------------------------------------------------------- run

struct RunConfig {
  Circuit circuit;
  std::optional<NodeMap> nodes;
  std::optional<NoiseParams> noise;
  std::uint64_t shots = 10000;
  Backend backend = Backend::automatic;
  bool dynamic_qft = false;
  std::vector<std::size_t> qft_qubits;
  std::uint64_t link_runs = 1;
};

inline RunConfig parse_run(const Json& j, const Source& src = {}) {
  const Reader r(j, "");
  r.allow_only({"version", "experiment", "circuit", "nodes", "noise", "shots", "backend", "dynamic_qft", "qft_qubits",
                "link_runs"});
  check_header(r, "run");
  RunConfig c;
  c.circuit = io::circuit_from_json(Reader(inline_or_file(r.at("circuit"), src), "circuit"));
  if (r.has("nodes")) c.nodes = io::nodemap_from_json(Reader(inline_or_file(r.at("nodes"), src), "nodes"));
  if (r.has("noise")) c.noise = io::noise_from_json(r.at("noise"));
  c.shots = positive(r, "shots", c.shots);
  c.backend = backend_from(r);
  c.dynamic_qft = r.bool_or("dynamic_qft", false);
  if (r.has("qft_qubits")) c.qft_qubits = r.at("qft_qubits").uint_list();
  c.link_runs = positive(r, "link_runs", 1);
  return c;
}

struct RunReport {
  Histogram histogram;
  bool gate_app = true;
  std::string compile_error;
  std::size_t nonlocal_count = 0;
  std::optional<double> analytic_fidelity;
  std::string backend;
  double coupling_p = 1.0;
  std::vector<std::uint64_t> link_k;  // total trials per accounted run
};

inline Json to_json(const RunReport& r) {
  Json counts = Json::object();
  for (const auto& [k, v] : r.histogram.counts) counts[k] = v;
  Json rep{{"gate_app", r.gate_app ? 1 : 0}, {"nonlocal_count", r.nonlocal_count}};
  if (!r.compile_error.empty()) rep["compile_error"] = r.compile_error;
  rep["analytic_fidelity"] = r.analytic_fidelity ? Json(*r.analytic_fidelity) : Json(nullptr);
  rep["analytic_fidelity_model"] =
      "(1 - (eps_d + eps_g + 2 eps_m))^N; eps_g counted once per gadget while the simulated gadget applies two local CNOTs";
  if (r.gate_app) {
    double mean = 0;
    for (auto k : r.link_k) mean += static_cast<double>(k);
    if (!r.link_k.empty()) mean /= static_cast<double>(r.link_k.size());
    rep["link"] = {{"coupling_p", r.coupling_p}, {"gadgets", r.nonlocal_count}, {"k_total", r.link_k}, {"k_mean", mean}};
    rep["backend"] = r.backend;
  }
  return Json{{"histogram", {{"shots", r.histogram.shots}, {"counts", counts}}}, {"report", rep}};
}

inline RunReport cmd_run(const RunConfig& cfg, std::uint64_t seed, bool force_dynamic = false, unsigned threads = 0) {
  RunReport rep;
  Circuit c = cfg.circuit;
  if (cfg.dynamic_qft || force_dynamic) {
    if (cfg.qft_qubits.empty()) throw ConfigError("qft_qubits: required when the dynamic-QFT rewrite is enabled");
    DynamicOptions opt;
    if (cfg.nodes) opt.nodes = &*cfg.nodes;
    try {
      c = rewrite_terminal_qft(c, cfg.qft_qubits, opt);
    } catch (const RewriteRefused& e) {
      throw CompileFailure(std::string("dynamic-QFT rewrite refused: ") + e.what());
    }
  }
  std::optional<DistributedCircuit> dist;
  if (cfg.nodes) {
    try {
      dist = compile_or_fail(c, *cfg.nodes);
    } catch (const CompileFailure& e) {
      rep.gate_app = false;
      rep.compile_error = e.what();
      return rep;
    }
    c = dist->circuit;
    rep.nonlocal_count = dist->nonlocal_count;
    rep.coupling_p = dist->coupling_p;
  }
  const NoiseParams np = cfg.noise.value_or(NoiseParams{});
  try {
    rep.analytic_fidelity = analytic_gate_fidelity(rep.nonlocal_count, np);
  } catch (const DomainError&) {
  }
  RunOptions opt;
  opt.backend = cfg.backend;
  opt.threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  rep.backend = backend_name(choose_backend(c, opt));
  rep.histogram = run(c, cfg.shots, cfg.noise, derive_seed(seed, 0), opt);
  if (dist) {
    Rng rng(derive_seed(seed, 1));
    for (std::uint64_t i = 0; i < cfg.link_runs; ++i)
      rep.link_k.push_back(account_run(*dist, LinkParams{dist->coupling_p, 1}, rng).total_trials);
  }
  return rep;
}

// ---------------------------------------------------------------- qpe-sweep

struct QpeSweepConfig {
  std::size_t n = 5;
  std::string op = "rx_ry";
  bool eps_m_quarter = true;  // eps_m = eps_g / 4, otherwise 0
  bool eps_d_tenth = true;    // eps_d = eps_g / 10, otherwise eps_g
  std::vector<double> eps_g{0.0, 0.002, 0.005, 0.01, 0.02};
  std::uint64_t shots = 10000;
  std::uint64_t replications = 20;
  std::optional<NodeMap> nodes;
  bool dynamic_qft = true;
  std::optional<double> intra_node_eps;
};

inline QpeSweepConfig parse_qpe_sweep(const Json& j, const Source& src = {}) {
  const Reader r(j, "");
  r.allow_only({"version", "experiment", "n", "operator", "scenario", "eps_g", "shots", "replications", "nodes",
                "dynamic_qft", "intra_node_eps"});
  check_header(r, "qpe-sweep");
  QpeSweepConfig c;
  c.n = static_cast<std::size_t>(r.uint_or("n", c.n));
  if (c.n < 1 || c.n > 8) r.at("n").fail("counting qubits must lie in 1..8");
  c.op = r.string_or("operator", c.op);
  if (c.op != "rx_ry" && c.op != "z") r.at("operator").fail("operator must be 'rx_ry' or 'z'");
  if (r.has("scenario")) {
    const Reader s = r.at("scenario");
    s.allow_only({"eps_m", "eps_d"});
    const std::string m = s.string_or("eps_m", "eps_g/4"), d = s.string_or("eps_d", "eps_g/10");
    if (m != "0" && m != "eps_g/4") s.at("eps_m").fail("must be \"0\" or \"eps_g/4\"");
    if (d != "eps_g" && d != "eps_g/10") s.at("eps_d").fail("must be \"eps_g\" or \"eps_g/10\"");
    c.eps_m_quarter = m == "eps_g/4";
    c.eps_d_tenth = d == "eps_g/10";
  }
  c.eps_g = probabilities(r, "eps_g", c.eps_g, true);
  c.shots = positive(r, "shots", c.shots);
  c.replications = positive(r, "replications", c.replications);
  if (r.has("nodes")) c.nodes = io::nodemap_from_json(Reader(inline_or_file(r.at("nodes"), src), "nodes"));
  c.dynamic_qft = r.bool_or("dynamic_qft", true);
  if (r.has("intra_node_eps")) c.intra_node_eps = r.at("intra_node_eps").number();
  return c;
}

inline NoiseParams qpe_noise(const QpeSweepConfig& c, double eps_g) {
  return NoiseParams::depolarizing(c.eps_d_tenth ? eps_g / 10 : eps_g, eps_g, c.eps_m_quarter ? eps_g / 4 : 0.0);
}

struct QpeSetup {
  Matrix u;
  Circuit prep;
  std::string correct;
};

inline QpeSetup qpe_setup(const std::string& op, std::size_t n) {
  QpeSetup s;
  if (op == "z") {
    s.u = gates::z();
    s.prep = Circuit(1, 0);
    s.prep.x(0);
  } else {
    s.u = rx_ry_example();
    s.prep = prep_state(eigenvector_for(s.u, Complex(-1, 0)));
  }
  s.correct = encode_phase(0.5, n);
  return s;
}

/// The two variants: monolithic QPE with a static QFT, and the node-distributed
/// circuit with the dynamic QFT (when enabled).
inline Circuit qpe_variant(const QpeSweepConfig& c, bool distributed, std::size_t* nonlocal = nullptr) {
  const QpeSetup s = qpe_setup(c.op, c.n);
  if (!distributed) return build_qpe(s.u, c.n, s.prep);
  const std::size_t total = c.n + s.prep.num_qubits;
  NodeMap nodes;
  if (c.nodes) {
    nodes = *c.nodes;
  } else {
    std::vector<std::size_t> counting, system;
    for (std::size_t q = 0; q < c.n; ++q) counting.push_back(q);
    for (std::size_t q = c.n; q < total; ++q) system.push_back(q);
    nodes = NodeMap({{"1", counting}, {"2", system}});
  }
  DynamicOptions opt;
  opt.nodes = &nodes;
  opt.intra_node_eps = c.intra_node_eps;
  const DistributedCircuit d = compile_or_fail(build_qpe(s.u, c.n, s.prep, c.dynamic_qft, opt), nodes);
  if (nonlocal) *nonlocal = d.nonlocal_count;
  return d.circuit;
}

inline Csv cmd_qpe_sweep(const QpeSweepConfig& cfg, std::uint64_t seed, unsigned threads = 0) {
  const QpeSetup s = qpe_setup(cfg.op, cfg.n);
  std::size_t nonlocal = 0;
  const Circuit variants[2] = {qpe_variant(cfg, false), qpe_variant(cfg, true, &nonlocal)};
  const std::size_t points = cfg.eps_g.size() * 2;
  auto rows = parallel_map(
      points,
      [&](std::size_t i) {
        const double eg = cfg.eps_g[i / 2];
        const bool dist = i % 2 == 1;
        const NoiseParams np = qpe_noise(cfg, eg);
        const Distribution d = exact_distribution(variants[dist], np);
        const double exact = phase_result(d, s.correct).p_correct;
        std::vector<double> est;
        for (std::uint64_t r = 0; r < cfg.replications; ++r)
          est.push_back(sample(d, cfg.shots, derive_seed(seed, i * 1000003 + r)).probability(s.correct));
        return std::vector<std::string>{dist ? "DQPE" : "QPE",
                                        std::to_string(cfg.n),
                                        fmt(eg),
                                        fmt(np.eps_d),
                                        fmt(np.eps_m),
                                        std::to_string(cfg.shots),
                                        std::to_string(cfg.replications),
                                        std::to_string(dist ? nonlocal : 0),
                                        fmt(exact),
                                        fmt(mean_of(est)),
                                        fmt(stddev_of(est))};
      },
      threads);
  return Csv{{"variant", "n", "eps_g", "eps_d", "eps_m", "shots", "replications", "nonlocal_count", "p_correct_exact",
              "p_correct_mean", "p_correct_std"},
             std::move(rows)};
}

// ---------------------------------------------------------------- qae

struct QaeConfig {
  std::size_t n = 3;
  double c = kPi / 3;
  std::vector<std::size_t> schedule{0, 1, 2, 4, 8, 16, 32};
  std::uint64_t shots = 100;  // per schedule entry
  std::uint64_t replications = 20;
  std::vector<std::size_t> node_counts{1, 2, 3};
  std::vector<double> p{1.0, 0.8, 0.5};
  std::optional<NoiseParams> noise;
  std::uint64_t link_runs = 100;
};

inline QaeConfig parse_qae(const Json& j, const Source& = {}) {
  const Reader r(j, "");
  r.allow_only({"version", "experiment", "n", "c", "schedule", "shots", "replications", "node_counts", "p", "noise",
                "link_runs"});
  check_header(r, "qae");
  QaeConfig c;
  c.n = static_cast<std::size_t>(r.uint_or("n", c.n));
  if (c.n < 1 || c.n > 8) r.at("n").fail("index qubits must lie in 1..8");
  c.c = r.number_or("c", c.c);
  if (r.has("schedule")) c.schedule = r.at("schedule").uint_list();
  try {
    validate(MlaeSchedule::uniform(c.schedule, 1));
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("schedule: ") + e.what());
  }
  c.shots = positive(r, "shots", c.shots);
  c.replications = positive(r, "replications", c.replications);
  c.node_counts = counts(r, "node_counts", c.node_counts);
  for (std::size_t k : c.node_counts)
    if (k > c.n + 1) r.at("node_counts").fail("node count " + std::to_string(k) + " exceeds n + 1 qubits");
  c.p = probabilities(r, "p", c.p, false);
  if (r.has("noise")) c.noise = io::noise_from_json(r.at("noise"));
  c.link_runs = positive(r, "link_runs", c.link_runs);
  return c;
}

inline Csv cmd_qae(const QaeConfig& cfg, std::uint64_t seed, unsigned threads = 0) {
  const double a_true = expectation_from_uniform(sin2_samples(cfg.n, cfg.c));
  const double theta_true = std::asin(std::sqrt(a_true));
  const std::size_t J = cfg.schedule.size(), K = cfg.node_counts.size();

  // P(1) and the distributed circuit for every (node count, Grover power)
  struct Point {
    double p1 = 0;
    DistributedCircuit dist;
  };
  auto points = parallel_map(
      K * J,
      [&](std::size_t i) {
        const NodeMap nodes = qae_nodes(cfg.n, cfg.node_counts[i / J]);
        Point pt;
        pt.dist = compile_or_fail(build_grover_circuit(cfg.n, cfg.c, cfg.schedule[i % J]), nodes);
        pt.p1 = exact_distribution(pt.dist.circuit, cfg.noise)["1"];
        return pt;
      },
      threads);

  // replication r draws hits for every schedule entry; prefix estimators reuse them.
  // The stream depends on r only, so node counts are compared on common random numbers.
  auto errors = parallel_map(
      K * cfg.replications,
      [&](std::size_t i) {
        const std::size_t k = i / cfg.replications, r = i % cfg.replications;
        Rng rng(derive_seed(seed, 2 * r));
        std::vector<std::uint64_t> hits(J, 0);
        for (std::size_t j = 0; j < J; ++j)
          for (std::uint64_t s = 0; s < cfg.shots; ++s) hits[j] += bernoulli(rng, points[k * J + j].p1) ? 1 : 0;
        std::vector<double> err(J);
        for (std::size_t j = 0; j < J; ++j) {
          const std::vector<std::size_t> powers(cfg.schedule.begin(), cfg.schedule.begin() + static_cast<std::ptrdiff_t>(j + 1));
          const std::vector<std::uint64_t> h(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(j + 1));
          err[j] = *mlae_estimate(h, MlaeSchedule::uniform(powers, cfg.shots), a_true).estimation_error;
        }
        return err;
      },
      threads);

  Csv out{{"n_nodes", "n_grover", "p", "gadgets", "k_first", "k_mean", "total_shots", "a_true", "error_rms",
           "error_mean", "cramer_rao_bound"},
          {}};
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t j = 0; j < J; ++j) {
      std::vector<double> e;
      double sq = 0;
      for (std::uint64_t r = 0; r < cfg.replications; ++r) {
        e.push_back(errors[k * cfg.replications + r][j]);
        sq += e.back() * e.back();
      }
      const std::vector<std::size_t> powers(cfg.schedule.begin(), cfg.schedule.begin() + static_cast<std::ptrdiff_t>(j + 1));
      const double cr = cramer_rao_bound(theta_true, MlaeSchedule::uniform(powers, cfg.shots));
      const DistributedCircuit& d = points[k * J + j].dist;
      for (std::size_t pi = 0; pi < cfg.p.size(); ++pi) {
        Rng rng(derive_seed(seed, 2 * ((k * J + j) * cfg.p.size() + pi) + 1));
        std::vector<double> ks;
        for (std::uint64_t run = 0; run < cfg.link_runs; ++run)
          ks.push_back(static_cast<double>(account_run(d, LinkParams{cfg.p[pi], 1}, rng).total_trials));
        out.rows.push_back({std::to_string(cfg.node_counts[k]), std::to_string(cfg.schedule[j]), fmt(cfg.p[pi]),
                            std::to_string(d.nonlocal_count), fmt(ks.front()), fmt(mean_of(ks)),
                            std::to_string(cfg.shots * (j + 1)), fmt(a_true),
                            fmt(std::sqrt(sq / static_cast<double>(cfg.replications))), fmt(mean_of(e)), fmt(cr)});
      }
    }
  return out;
}

// ---------------------------------------------------------------- distload

struct DistloadConfig {
  std::size_t n = 8;
  double mu = 1;
  double sigma = 2;
  std::vector<std::size_t> node_counts{1, 2, 4, 8};
  std::vector<double> eps{0.0, 0.002, 0.005, 0.009};
  double eps_m = 0;
  std::uint64_t shots = 10000;
  std::uint64_t replications = 20;
};

inline DistloadConfig parse_distload(const Json& j, const Source& = {}) {
  const Reader r(j, "");
  r.allow_only({"version", "experiment", "n", "mu", "sigma", "node_counts", "eps", "eps_m", "shots", "replications"});
  check_header(r, "distload");
  DistloadConfig c;
  c.n = static_cast<std::size_t>(r.uint_or("n", c.n));
  if (c.n < 1 || c.n > 10) r.at("n").fail("qubits must lie in 1..10");
  c.mu = r.number_or("mu", c.mu);
  c.sigma = r.number_or("sigma", c.sigma);
  if (!(c.sigma > 0)) r.at("sigma").fail("must be positive");
  c.node_counts = counts(r, "node_counts", c.node_counts);
  for (std::size_t k : c.node_counts)
    if (k > c.n) r.at("node_counts").fail("node count " + std::to_string(k) + " exceeds n");
  c.eps = probabilities(r, "eps", c.eps, true);
  c.eps_m = r.number_or("eps_m", 0.0);
  c.shots = positive(r, "shots", c.shots);
  c.replications = positive(r, "replications", c.replications);
  return c;
}

struct DistloadPoint {
  std::size_t nodes = 1;
  double eps = 0;
  std::size_t nonlocal = 0;
  double exact = 0;
  std::vector<double> sampled;
};

/// Hellinger fidelity of the loaded normal distribution at one (node count, eps).
inline DistloadPoint distload_point(const DistloadConfig& cfg, std::size_t nodes, double eps, std::uint64_t seed) {
  const auto target = normal_samples(cfg.n, cfg.mu, cfg.sigma);
  const Distribution want = indexed_distribution(target);
  Circuit c = load_distribution(target);
  c.measure_all();
  DistloadPoint pt;
  pt.nodes = nodes;
  pt.eps = eps;
  if (nodes > 1) {
    const DistributedCircuit d = compile_or_fail(c, contiguous_nodes(cfg.n, nodes));
    c = d.circuit;
    pt.nonlocal = d.nonlocal_count;
  }
  const Distribution got = exact_distribution(c, NoiseParams::depolarizing(eps, eps, cfg.eps_m));
  pt.exact = hellinger_fidelity(want, got);
  for (std::uint64_t r = 0; r < cfg.replications; ++r)
    pt.sampled.push_back(hellinger_fidelity(want, sample(got, cfg.shots, derive_seed(seed, r)).distribution()));
  return pt;
}

inline Csv cmd_distload(const DistloadConfig& cfg, std::uint64_t seed, unsigned threads = 0) {
  const std::size_t E = cfg.eps.size();
  auto rows = parallel_map(
      cfg.node_counts.size() * E,
      [&](std::size_t i) {
        const DistloadPoint pt = distload_point(cfg, cfg.node_counts[i / E], cfg.eps[i % E], derive_seed(seed, i));
        return std::vector<std::string>{std::to_string(pt.nodes),        fmt(pt.eps),
                                        std::to_string(cfg.shots),       std::to_string(cfg.replications),
                                        std::to_string(pt.nonlocal),     fmt(pt.exact),
                                        fmt(mean_of(pt.sampled)),        fmt(stddev_of(pt.sampled))};
      },
      threads);
  return Csv{{"n_nodes", "eps", "shots", "replications", "nonlocal_count", "fidelity_exact", "fidelity_mean",
              "fidelity_std"},
             std::move(rows)};
}

// ---------------------------------------------------------------- resources

struct ResourcesConfig {
  std::size_t n = 3;
  double c = kPi / 3;
  std::vector<std::size_t> node_counts{2, 3};
  std::vector<std::size_t> n_grover{0, 1, 2, 4, 8, 16, 32};
  std::vector<double> p{1.0, 0.8, 0.5};
  std::uint64_t runs = 100;
};

inline ResourcesConfig parse_resources(const Json& j, const Source& = {}) {
  const Reader r(j, "");
  r.allow_only({"version", "experiment", "n", "c", "node_counts", "n_grover", "p", "runs"});
  check_header(r, "resources");
  ResourcesConfig c;
  c.n = static_cast<std::size_t>(r.uint_or("n", c.n));
  if (c.n < 1 || c.n > 8) r.at("n").fail("index qubits must lie in 1..8");
  c.c = r.number_or("c", c.c);
  c.node_counts = counts(r, "node_counts", c.node_counts);
  for (std::size_t k : c.node_counts)
    if (k > c.n + 1) r.at("node_counts").fail("node count " + std::to_string(k) + " exceeds n + 1 qubits");
  if (r.has("n_grover")) c.n_grover = r.at("n_grover").uint_list();
  c.p = probabilities(r, "p", c.p, false);
  c.runs = positive(r, "runs", c.runs);
  return c;
}

inline Csv cmd_resources(const ResourcesConfig& cfg, std::uint64_t seed, unsigned threads = 0) {
  const std::size_t G = cfg.n_grover.size(), P = cfg.p.size();
  auto blocks = parallel_map(
      cfg.node_counts.size() * G,
      [&](std::size_t i) {
        const std::size_t nodes = cfg.node_counts[i / G], m = cfg.n_grover[i % G];
        const DistributedCircuit d = compile_or_fail(build_grover_circuit(cfg.n, cfg.c, m), qae_nodes(cfg.n, nodes));
        std::vector<std::vector<std::string>> rows;
        for (std::size_t pi = 0; pi < P; ++pi) {
          Rng rng(derive_seed(seed, i * P + pi));
          for (std::uint64_t run = 0; run < cfg.runs; ++run)
            rows.push_back({std::to_string(nodes), std::to_string(m), fmt(cfg.p[pi]),
                            std::to_string(account_run(d, LinkParams{cfg.p[pi], 1}, rng).total_trials)});
        }
        return rows;
      },
      threads);
  Csv out{{"run_id", "n_nodes", "n_grover", "p", "k_total"}, {}};
  for (auto& b : blocks)
    for (auto& row : b) {
      row.insert(row.begin(), std::to_string(out.rows.size()));
      out.rows.push_back(std::move(row));
    }
  return out;
}

}  // namespace dqsim::experiments
