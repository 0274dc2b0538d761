#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rht/errors.hpp"
#include "rht/problem.hpp"

namespace {

struct Args {
  std::string spec_path;
  std::string out_path;
  std::string format;
  int threads = 1;
  bool no_timestamp = false;
  bool strict = false;
};

int run_command(const std::string& command, const Args& args) {
  std::ifstream in(args.spec_path);
  if (!in) {
    std::cerr << "rht: cannot open spec file '" << args.spec_path << "'\n";
    return 2;
  }
  std::stringstream ss;
  ss << in.rdbuf();

  std::string base_dir = ".";
  auto slash = args.spec_path.find_last_of('/');
  if (slash != std::string::npos) base_dir = args.spec_path.substr(0, slash);

  rht::ProblemSpec spec = rht::parse_spec(ss.str(), base_dir);
  if (!args.format.empty()) spec.format = args.format;
  for (const std::string& w : spec.warnings) std::cerr << "rht: warning: " << w << "\n";

  rht::RunOptions opt;
  opt.command = command;
  opt.threads = args.threads;
  opt.with_timestamp = !args.no_timestamp;
  opt.strict = args.strict;
  rht::RunResult res = rht::run(spec, opt);

  if (args.out_path.empty()) {
    std::cout << res.report;
  } else {
    std::ofstream out(args.out_path, std::ios::binary);
    if (!out) {
      std::cerr << "rht: cannot write to '" << args.out_path << "'\n";
      return 3;
    }
    out << res.report;
  }
  if (res.any_nonconverged) {
    std::cerr << "rht: warning: at least one minimization did not converge\n";
    if (args.strict) return 4;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Renyi information measures and composite hypothesis testing exponents"};
  app.require_subcommand(1);

  Args args;
  const char* names[] = {"measure", "exponents", "verify", "universal"};
  const char* descs[] = {
      "family-minimized Renyi divergences over an order grid",
      "threshold rate, error / strong-converse exponents, second-order curve",
      "finite-n oracle sweeps compared against the asymptotic theory",
      "universal distribution/channel statistics and dominance checks",
  };
  for (int i = 0; i < 4; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], descs[i]);
    sub->add_option("--spec", args.spec_path, "problem specification file (JSON)")->required();
    sub->add_option("--out", args.out_path, "write the report here instead of stdout");
    sub->add_option("--format", args.format, "report | table")
        ->check(CLI::IsMember({"report", "table"}));
    sub->add_option("--threads", args.threads, "worker threads for independent rows")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--no-timestamp", args.no_timestamp, "omit the provenance timestamp");
    sub->add_flag("--strict", args.strict, "non-convergence becomes exit code 4");
  }

  CLI11_PARSE(app, argc, argv);

  std::string command = app.get_subcommands().front()->get_name();
  try {
    return run_command(command, args);
  } catch (const rht::SpecError& e) {
    std::cerr << "rht: spec error: " << e.what() << "\n";
    return 2;
  } catch (const rht::CapacityError& e) {
    std::cerr << "rht: capacity error: " << e.what() << "\n";
    return 3;
  } catch (const rht::Error& e) {
    std::cerr << "rht: error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "rht: internal error: " << e.what() << "\n";
    return 3;
  }
}
