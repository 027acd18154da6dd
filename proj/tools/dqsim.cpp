// dqsim: run one circuit or a sweep from a JSON config.
//   exit 0 success, 1 runtime failure, 2 config error, 3 compile failure

#include <cstdio>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "dqsim/experiments.hpp"

namespace ex = dqsim::experiments;

namespace {

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) throw std::runtime_error("cannot write " + out);
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed quantum computing simulator"};
  app.require_subcommand(1);
  std::string config, out;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  bool dynamic_qft = false;
  const char* names[] = {"run", "qpe-sweep", "qae", "distload", "resources"};
  const char* help[] = {"compile (when a node map is given) and simulate one circuit", "QPE vs DQPE success probability",
                        "maximum-likelihood amplitude estimation error and link trials",
                        "Hellinger fidelity of normal-distribution loading", "entanglement trials per run"};
  for (int i = 0; i < 5; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], help[i]);
    sub->add_option("--config", config, "JSON experiment config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output file (default stdout)");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--threads", threads, "worker threads (0 = hardware)");
    if (i <= 1) sub->add_flag("--dynamic-qft", dynamic_qft, "rewrite the terminal QFT into its dynamic form");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string cmd = app.get_subcommands().front()->get_name();

  try {
    const ex::Json j = dqsim::io::load_file(config);
    const ex::Source src{std::filesystem::path(config).parent_path()};
    if (cmd == "run") {
      const ex::RunReport rep = ex::cmd_run(ex::parse_run(j, src), seed, dynamic_qft, threads);
      const std::string text = ex::to_json(rep).dump(2) + "\n";
      emit(text, out);
      if (!out.empty() && out != "-") std::cout << text;
      if (!rep.gate_app) {
        std::cerr << "dqsim: compile failure: " << rep.compile_error << "\n";
        return 3;
      }
      return 0;
    }
    ex::Csv csv;
    if (cmd == "qpe-sweep") {
      ex::QpeSweepConfig c = ex::parse_qpe_sweep(j, src);
      if (dynamic_qft) c.dynamic_qft = true;
      csv = ex::cmd_qpe_sweep(c, seed, threads);
    } else if (cmd == "qae") {
      csv = ex::cmd_qae(ex::parse_qae(j, src), seed, threads);
    } else if (cmd == "distload") {
      csv = ex::cmd_distload(ex::parse_distload(j, src), seed, threads);
    } else {
      csv = ex::cmd_resources(ex::parse_resources(j, src), seed, threads);
    }
    emit(csv.str(), out);
    return 0;
  } catch (const dqsim::ConfigError& e) {
    std::cerr << "dqsim: config error: " << e.what() << "\n";
    return 2;
  } catch (const ex::CompileFailure& e) {
    std::cerr << "dqsim: compile failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "dqsim: " << e.what() << "\n";
    return 1;
  }
}
