#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ubsim/harness.hpp"

namespace h = ubsim::harness;

namespace {

std::map<std::string, std::string> parse_params(const std::vector<std::string>& kv) {
  std::map<std::string, std::string> out;
  for (const auto& s : kv) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0)
      throw h::ConfigInvalid("--param expects key=value, got " + s);
    out[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return out;
}

std::string default_out_dir() {
  const char* env = std::getenv("UBSIM_OUT_DIR");
  return env && *env ? env : "results";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ubsim: Unified Bus vs RoCE two-node simulator and experiment harness"};
  app.require_subcommand(1);

  std::string config;
  std::uint64_t seed = ubsim::kDefaultSeed;
  app.add_option("--config", config, "JSON file overriding cost-model parameters");
  app.add_option("--seed", seed, "RNG seed")->capture_default_str();

  auto* run = app.add_subcommand("run", "run experiments and write CSVs");
  std::vector<std::string> names, params;
  std::string out_dir;
  run->add_option("experiment", names, "experiment name(s) or 'all'")->required();
  run->add_option("--param,-p", params, "key=value override (cost parameter or experiment knob)");
  run->add_option("--out,-o", out_dir, "output directory (default $UBSIM_OUT_DIR or ./results)");
  run->add_option("--seed", seed, "RNG seed");
  run->add_option("--config", config, "JSON file overriding cost-model parameters");

  auto* list = app.add_subcommand("list", "list registered experiments");

  auto* verify = app.add_subcommand("verify", "compare fresh runs against golden CSVs");
  std::vector<std::string> vnames;
  std::string golden_dir = h::default_golden_dir();
  verify->add_option("experiment", vnames, "experiment name(s); all when omitted");
  verify->add_option("--golden", golden_dir, "golden CSV directory")->capture_default_str();
  verify->add_option("--seed", seed, "RNG seed");
  verify->add_option("--config", config, "JSON file overriding cost-model parameters");

  auto* grid = app.add_subcommand("grid", "run the full sweep grid for one stack");
  std::string grid_stack = "ub_ldst";
  std::uint64_t grid_ops = 2000;
  grid->add_option("--stack", grid_stack)->capture_default_str();
  grid->add_option("--ops", grid_ops, "ops per configuration")->capture_default_str();
  grid->add_option("--out,-o", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    ubsim::cost::CostParams base;
    if (!config.empty()) base = ubsim::cost::load_cost_params(config);
    if (out_dir.empty()) out_dir = default_out_dir();

    if (*list) {
      for (const auto& e : h::registry())
        std::cout << e.name << "\t" << (e.kind == h::Kind::analytical ? "analytical" : "stochastic")
                  << "\t" << e.summary << "\n";
      return 0;
    }
    if (*run) {
      if (names.size() == 1 && names[0] == "all") {
        names.clear();
        for (const auto& e : h::registry()) names.push_back(e.name);
      }
      const auto overrides = parse_params(params);
      for (const auto& n : names)
        std::cout << h::write_experiment(n, out_dir, overrides, seed, base) << "\n";
      return 0;
    }
    if (*verify) {
      if (vnames.empty() || (vnames.size() == 1 && vnames[0] == "all")) {
        vnames.clear();
        for (const auto& e : h::registry()) vnames.push_back(e.name);
      }
      int failed = 0;
      for (const auto& n : vnames) {
        const auto rep = h::verify_golden(n, golden_dir, seed, base);
        std::cout << (rep.pass ? "PASS " : "FAIL ") << n << "\n";
        for (const auto& d : rep.diffs) std::cout << "  " << d << "\n";
        failed += rep.pass ? 0 : 1;
      }
      return failed ? 1 : 0;
    }
    if (*grid) {
      const auto t = h::run_grid(ubsim::state::stack_from_name(grid_stack), grid_ops, seed, base);
      std::filesystem::create_directories(out_dir);
      const auto path = out_dir + "/grid_" + grid_stack + ".csv";
      std::ofstream(path, std::ios::binary) << h::to_csv(t, seed);
      std::cout << path << " (" << t.rows.size() << " configurations)\n";
      return 0;
    }
  } catch (const h::UnknownExperiment& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
