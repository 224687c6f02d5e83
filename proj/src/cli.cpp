#include "asdsm/cli.hpp"

#include <fstream>
#include <iostream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>

#include "asdsm/errors.hpp"
#include "asdsm/runner.hpp"

namespace asdsm {

namespace {

std::string config_sink;  // --config value; the file is applied in a pre-pass

void add_run_options(CLI::App* sub, RunConfig& cfg, int* at_iter) {
  sub->add_option("--example", cfg.example, "Benchmark example (1-4)")->capture_default_str();
  sub->add_option("--setting", cfg.setting, "Problem setting (1 or 2)")->capture_default_str();
  sub->add_option("--nf", cfg.nf, "Interior fine points per axis")->capture_default_str();
  sub->add_option("--nc", cfg.nc, "Interior coarse points per axis")->capture_default_str();
  sub->add_option("--tol", cfg.tol, "Relative residual tolerance")->capture_default_str();
  sub->add_option("--max-iter", cfg.max_iter, "Outer iteration budget")->capture_default_str();
  sub->add_option("--seed", cfg.seed, "Base seed for the randomized choices")->capture_default_str();
  sub->add_option("--subsample", cfg.subsample,
                  "Skeleton-row fraction for the step length (0 = all rows)")
      ->capture_default_str();
  sub->add_option("--out", cfg.out, "Output file; omitted prints to stdout");
  sub->add_option("--config", config_sink, "Key=value configuration file; flags override its values");
  if (at_iter)
    sub->add_option("--at-iter", *at_iter, "Iteration to capture")->capture_default_str();
}

std::string trimmed(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Keys mirror the long flags. Runs before the flag parse, so flags override.
void apply_config_file(const std::string& path, RunConfig& cfg, int& at_iter) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot read " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = trimmed(line);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw Error("config: expected key=value at line " + std::to_string(lineno));
    const std::string key = trimmed(text.substr(0, eq));
    const std::string value = trimmed(text.substr(eq + 1));
    try {
      if (key == "example") cfg.example = std::stoi(value);
      else if (key == "setting") cfg.setting = std::stoi(value);
      else if (key == "nf") cfg.nf = std::stoi(value);
      else if (key == "nc") cfg.nc = std::stoi(value);
      else if (key == "tol") cfg.tol = std::stod(value);
      else if (key == "max-iter") cfg.max_iter = std::stoi(value);
      else if (key == "seed") cfg.seed = std::stoull(value);
      else if (key == "subsample") cfg.subsample = std::stod(value);
      else if (key == "out") cfg.out = value;
      else if (key == "at-iter") at_iter = std::stoi(value);
      else throw Error("config: unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
      throw Error("config: bad value for '" + key + "' at line " + std::to_string(lineno));
    } catch (const std::out_of_range&) {
      throw Error("config: value out of range for '" + key + "' at line " + std::to_string(lineno));
    }
  }
}

std::string find_config_path(int argc, const char* const* argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string_view arg = argv[i];
    if (arg == "--help" || arg == "-h") return {};  // let the help path run
    if (arg == "--config" && i + 1 < argc) return argv[i + 1];
    if (arg.rfind("--config=", 0) == 0) return std::string(arg.substr(9));
  }
  return {};
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Anisotropic-submeshes domain-splitting experiments"};
  app.require_subcommand(1);

  RunConfig cfg;
  int at_iter = 20;
  std::string suite = "all";

  const std::string config_path = find_config_path(argc, argv);
  if (!config_path.empty()) {
    try {
      apply_config_file(config_path, cfg, at_iter);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }

  CLI::App* run = app.add_subcommand("run", "Iterate and emit the residual/error history CSV");
  add_run_options(run, cfg, nullptr);
  CLI::App* snapshot =
      app.add_subcommand("snapshot", "Emit the |r| grid after a fixed iteration as CSV");
  add_run_options(snapshot, cfg, &at_iter);
  CLI::App* verify = app.add_subcommand("verify", "Run an invariant suite and report each check");
  verify->add_option("suite", suite, "projectors|propositions|convergence|examples|all")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      const RunResult result = run_experiment(cfg);
      if (cfg.out.empty())
        std::cout << result.csv;
      else
        std::cout << "wrote " << cfg.out << ": " << result.state.history.size()
                  << " rows, stopped by " << result.state.stop_reason << "\n";
      return 0;
    }
    if (snapshot->parsed()) {
      const std::string grid = residual_snapshot(cfg, at_iter);
      if (cfg.out.empty()) {
        std::cout << grid;
      } else {
        write_text_file(cfg.out, grid);
        std::cout << "wrote " << cfg.out << "\n";
      }
      return 0;
    }
    return verify_suite(suite, std::cout) == 0 ? 0 : 1;
  } catch (const SingularMatrix& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace asdsm
