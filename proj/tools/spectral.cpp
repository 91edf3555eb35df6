#include "spectral/spectral.hpp"

#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNotConverged = 2;
constexpr int kExitVerifyFailed = 3;

void print_usage(std::ostream& os) {
  os << "usage: spectral <command> [args]\n"
        "\n"
        "commands:\n"
        "  run <config>       solve the configured problem and write reports\n"
        "  verify <config>    solve, then cross-check the result against\n"
        "                     independent references and invariants\n"
        "  print-defaults     print a complete config with default values\n";
}

spectral::ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw spectral::ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return spectral::parse_config(ss.str());
}

int cmd_run(const std::string& path) {
  const spectral::ExperimentConfig cfg = load_config(path);
  spectral::check_outputs_writable(cfg);

  const auto t0 = std::chrono::steady_clock::now();
  const spectral::RunOutcome out = spectral::run_experiment(cfg);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const auto written = spectral::write_outputs(cfg, out);
  std::printf("%s elapsed=%.3fs\n", out.summary.c_str(), seconds);
  for (const auto& f : written) std::printf("wrote %s\n", f.c_str());
  return out.converged ? kExitOk : kExitNotConverged;
}

int cmd_verify(const std::string& path) {
  const spectral::ExperimentConfig cfg = load_config(path);

  const auto t0 = std::chrono::steady_clock::now();
  const spectral::VerifyOutcome out = spectral::verify_experiment(cfg);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  for (const auto& c : out.checks)
    std::printf("%s  %s%s%s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                c.detail.empty() ? "" : "  ", c.detail.c_str());
  std::printf("verify: %s (%zu checks, %.3fs)\n", out.all_pass ? "all checks passed" : "FAILED",
              out.checks.size(), seconds);
  return out.all_pass ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    print_usage(std::cerr);
    return kExitUsage;
  }
  const std::string cmd = argv[1];
  try {
    if (cmd == "print-defaults") {
      if (argc != 2) {
        std::cerr << "error: print-defaults takes no arguments\n";
        return kExitUsage;
      }
      std::cout << spectral::render_config(spectral::ExperimentConfig{});
      return kExitOk;
    }
    if (cmd == "run" || cmd == "verify") {
      if (argc != 3) {
        std::cerr << "error: " << cmd << " needs exactly one config file argument\n";
        print_usage(std::cerr);
        return kExitUsage;
      }
      return cmd == "run" ? cmd_run(argv[2]) : cmd_verify(argv[2]);
    }
    if (cmd == "-h" || cmd == "--help" || cmd == "help") {
      print_usage(std::cout);
      return kExitOk;
    }
    std::cerr << "error: unknown command '" << cmd << "'\n";
    print_usage(std::cerr);
    return kExitUsage;
  } catch (const spectral::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
