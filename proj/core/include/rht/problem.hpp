#ifndef RHT_PROBLEM_HPP
#define RHT_PROBLEM_HPP

#include <string>
#include <vector>

#include "rht/families.hpp"
#include "rht/pmf.hpp"
#include "rht/types_method.hpp"

namespace rht {

struct OracleOptions {
  int grid_points = 21;
  std::size_t type_cap = kDefaultTypeCap;
  unsigned seed = 1234;
  int probe_members = 20;
};

// A batch problem: one null distribution, one family, and the grids the
// jobs run over. Parsed from the versioned JSON document described in the
// README; unknown keys are rejected with a field path.
struct ProblemSpec {
  int spec_version = 1;
  std::string title;
  JointPmf null_dist;
  FamilySpec family;
  std::vector<double> orders;
  std::vector<double> rates;           // absolute, nats/symbol
  std::vector<double> relative_rates;  // multiples of the threshold rate
  std::vector<int> block_lengths;
  std::vector<double> second_order_r;
  OracleOptions oracle;
  std::string format = "report";
  std::vector<std::string> warnings;   // filled during validation
  std::string canonical_echo;          // canonical JSON form of the spec
};

// Throws SpecError with a field path on any violation. `base_dir` resolves
// file references inside the document.
ProblemSpec parse_spec(const std::string& text, const std::string& base_dir = ".");

struct RunOptions {
  std::string command;  // measure | exponents | verify | universal
  int threads = 1;
  bool with_timestamp = true;
  bool strict = false;
};

struct RunResult {
  std::string report;  // rendered JSON report or CSV table
  bool any_nonconverged = false;
};

// Executes the requested job. Deterministic: identical spec and options
// produce byte-identical reports (the timestamp field is the only
// exception, and it can be switched off).
RunResult run(const ProblemSpec& spec, const RunOptions& options);

}  // namespace rht

#endif
