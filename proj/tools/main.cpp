#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "cli.hpp"

using namespace sparsetopk;

namespace {

struct Streams {
  std::unique_ptr<std::ifstream> in_file;
  std::unique_ptr<std::ofstream> out_file;
  std::istream* in = &std::cin;
  std::ostream* out = &std::cout;
};

Streams open_streams(const std::string& input, const std::string& output) {
  Streams s;
  if (!input.empty() && input != "-") {
    s.in_file = std::make_unique<std::ifstream>(input);
    if (!*s.in_file) throw std::runtime_error("cannot open input '" + input + "'");
    s.in = s.in_file.get();
  }
  if (!output.empty() && output != "-") {
    s.out_file = std::make_unique<std::ofstream>(output);
    if (!*s.out_file) throw std::runtime_error("cannot open output '" + output + "'");
    s.out = s.out_file.get();
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse, differentiable top-k operators"};
  app.require_subcommand(1);
  std::string input;
  std::string output;

  auto* eval = app.add_subcommand("eval", "Evaluate newline-delimited JSON records");
  std::string eval_solver = "pav";
  eval->add_option("--input", input, "Input path (default: standard input)");
  eval->add_option("--output", output, "Output path (default: standard output)");
  eval->add_option("--solver", eval_solver, "Solver for records without one")
      ->check(CLI::IsMember({"pav", "dykstra", "dual_bca"}));

  auto* curve = app.add_subcommand("curve", "Sweep theta(s) = (3, 1, -1 + s, s) and print a CSV");
  cli::CurveOptions curve_opt;
  std::string curve_phi = "identity";
  curve->add_option("--k", curve_opt.k, "Number of selected entries")->capture_default_str();
  curve->add_option("--p", curve_opt.p, "Regularization exponent in (1, 2]")->capture_default_str();
  curve->add_option("--lambda", curve_opt.lambda, "Regularization strength")->capture_default_str();
  curve->add_option("--phi", curve_phi, "identity | half_square | absolute")->capture_default_str();
  curve->add_option("--grid-start", curve_opt.grid_start)->capture_default_str();
  curve->add_option("--grid-end", curve_opt.grid_end)->capture_default_str();
  curve->add_option("--grid-steps", curve_opt.grid_steps)->capture_default_str();
  curve->add_option("--output", output, "Output path (default: standard output)");

  auto* grad = app.add_subcommand("gradcheck", "Compare Jacobian products with finite differences");
  cli::GradcheckOptions grad_opt;
  grad->add_option("--op", grad_opt.op)->capture_default_str();
  grad->add_option("--n", grad_opt.n)->capture_default_str();
  grad->add_option("--k", grad_opt.k, "Selected entries (default n / 4)");
  grad->add_option("--trials", grad_opt.trials)->capture_default_str();
  grad->add_option("--p", grad_opt.p)->capture_default_str();
  grad->add_option("--lambda", grad_opt.lambda)->capture_default_str();
  grad->add_option("--seed", grad_opt.seed)->capture_default_str();
  grad->add_option("--threshold", grad_opt.threshold)->capture_default_str();
  grad->add_option("--output", output, "Output path (default: standard output)");

  auto* bench = app.add_subcommand("bench", "Time the solvers and the hard baseline");
  cli::BenchOptions bench_opt;
  std::vector<std::string> bench_solvers{"pav", "dykstra"};
  std::string bench_phi = "identity";
  bench->add_option("--n-list", bench_opt.n_list, "Input sizes")->delimiter(',')->capture_default_str();
  bench->add_option("--k-ratio", bench_opt.k_ratio, "k = ceil(ratio * n)")->capture_default_str();
  bench->add_option("--solvers", bench_solvers, "pav,dykstra,dual_bca")
      ->delimiter(',')
      ->check(CLI::IsMember({"pav", "dykstra", "dual_bca"}))
      ->capture_default_str();
  bench->add_option("--repeats", bench_opt.repeats)->capture_default_str();
  bench->add_option("--seed", bench_opt.seed)->capture_default_str();
  bench->add_option("--p", bench_opt.p)->capture_default_str();
  bench->add_option("--lambda", bench_opt.lambda)->capture_default_str();
  bench->add_option("--phi", bench_phi)->capture_default_str();
  bench->add_option("--dist", bench_opt.dist, "uniform: U(0, n); normal: N(0, 1)")
      ->check(CLI::IsMember({"uniform", "normal"}))
      ->capture_default_str();
  bench->add_option("--output", output, "Output path (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kInternalError;
  }

  try {
    Streams io = open_streams(input, output);
    if (*eval) {
      cli::EvalOptions opt;
      opt.solver = parse_solver(eval_solver);
      return cli::cmd_eval(*io.in, *io.out, std::cerr, opt);
    }
    if (*curve) {
      curve_opt.phi = parse_phi(curve_phi);
      cli::cmd_curve(*io.out, curve_opt);
      return cli::kOk;
    }
    if (*grad) return cli::cmd_gradcheck(*io.out, grad_opt);
    if (*bench) {
      bench_opt.phi = parse_phi(bench_phi);
      bench_opt.solvers.clear();
      for (const auto& s : bench_solvers) bench_opt.solvers.push_back(parse_solver(s));
      cli::cmd_bench(*io.out, bench_opt);
      return cli::kOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kInternalError;
  }
  return cli::kOk;
}
