#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ubsim/costmodel.hpp"
#include "ubsim/engine.hpp"

namespace ubsim::harness {

inline constexpr int kSchemaVersion = 1;

class UnknownExperiment : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};
class GoldenMissing : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class SchemaMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
using engine::ConfigInvalid;

// Fixed-point with trailing zeros trimmed; identical across platforms for
// the magnitudes we emit.
std::string fmt(double v, int decimals = 6);

struct Table {
  std::string experiment;
  std::vector<std::string> columns;  // always starts with experiment, stack
  std::vector<std::vector<std::string>> rows;

  std::size_t col(const std::string& name) const;
  // Appends a row; the experiment column is filled in.
  void add(std::vector<std::string> cells);
  double number(std::size_t row, const std::string& column) const;
  const std::string& cell(std::size_t row, const std::string& column) const;
  // Rows whose cells match every (column, value) pair.
  std::vector<std::size_t> where(const std::map<std::string, std::string>& match) const;
};

std::string to_csv(const Table& t, std::uint64_t seed);
// Throws SchemaMismatch on a missing or foreign header comment, a column
// count mismatch, or an empty header.
Table parse_csv(const std::string& text);

// Knobs an experiment reads. Each one it reads is marked used; anything
// left unused after the run is a configuration error.
class RunContext {
 public:
  RunContext(cost::CostParams p, std::uint64_t seed, std::map<std::string, std::string> extra)
      : params(p), seed(seed), extra_(std::move(extra)) {}
  double num(const std::string& key, double fallback);
  std::vector<std::string> unused() const;

  cost::CostParams params;
  std::uint64_t seed;

 private:
  std::map<std::string, std::string> extra_;
  std::set<std::string> used_;
};

enum class Kind : std::uint8_t { analytical, stochastic };

struct Experiment {
  std::string name;
  std::string summary;
  Kind kind;
  double tolerance;  // relative, for stochastic golden compares
  std::function<Table(RunContext&)> run;
};

const std::vector<Experiment>& registry();
const Experiment& find_experiment(const std::string& name);

// Overrides: CostParams field names set the cost model; anything else is
// an experiment knob.
Table run_experiment(const std::string& name,
                     const std::map<std::string, std::string>& overrides = {},
                     std::uint64_t seed = kDefaultSeed, const cost::CostParams& base = {});
// Writes <out_dir>/<name>.csv and returns the path.
std::string write_experiment(const std::string& name, const std::string& out_dir,
                             const std::map<std::string, std::string>& overrides = {},
                             std::uint64_t seed = kDefaultSeed,
                             const cost::CostParams& base = {});

struct VerifyReport {
  std::string name;
  bool pass = false;
  std::vector<std::string> diffs;
};
std::string default_golden_dir();
// Analytical: byte compare. Stochastic: same columns and row keys, numeric
// cells within the experiment tolerance.
VerifyReport compare_csv(const Experiment& e, const std::string& golden, const std::string& fresh);
VerifyReport verify_golden(const std::string& name, const std::string& golden_dir = default_golden_dir(),
                           std::uint64_t seed = kDefaultSeed, const cost::CostParams& base = {});

// Runs every configuration of the sweep grid on one stack.
Table run_grid(state::Stack s, std::uint64_t ops, std::uint64_t seed,
               const cost::CostParams& base = {});

}  // namespace ubsim::harness
