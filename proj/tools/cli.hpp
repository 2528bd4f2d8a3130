#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sparsetopk/regularizer.hpp"
#include "sparsetopk/relaxed_ops.hpp"

// Subcommand bodies of the sparsetopk tool, separated from flag parsing so
// tests can drive them with string streams.
namespace sparsetopk::cli {

enum ExitCode : int {
  kOk = 0,
  kInternalError = 1,
  kAllRecordsFailed = 2,
  kGradcheckFailed = 3,
};

/// %.17g, with -0 printed as 0 and non-finite values as null.
std::string format_number(double v);

struct EvalOptions {
  Solver solver = Solver::pav;  // for records without a "solver" field
};

struct EvalSummary {
  std::size_t records = 0;
  std::size_t failed = 0;
  std::size_t loss_records = 0;
  double loss_sum = 0.0;
};

/// One JSON object per input line in, one per line out, in order. Blank lines
/// are skipped. Returns kAllRecordsFailed when every record failed.
int cmd_eval(std::istream& in, std::ostream& out, std::ostream& log, const EvalOptions& opt,
             EvalSummary* summary = nullptr);

/// Evaluates one record; throws on malformed input.
std::string eval_record(const std::string& line, const EvalOptions& opt, double* loss = nullptr);

struct CurveOptions {
  std::size_t k = 2;
  double p = 4.0 / 3.0;
  double lambda = 0.5;
  Phi phi = Phi::identity;
  double grid_start = -2.0;
  double grid_end = 7.0;
  std::size_t grid_steps = 900;
};

struct CurvePoint {
  double s = 0.0;
  double hard = 0.0;
  double relaxed = 0.0;
};

/// theta(s) = (3, 1, -1 + s, s); both columns sum coordinates 2 and 3.
std::vector<CurvePoint> curve_points(const CurveOptions& opt);

/// CSV with header s,hard,relaxed.
void cmd_curve(std::ostream& out, const CurveOptions& opt);

struct GradcheckOptions {
  std::string op = "soft_topkmag";
  std::size_t n = 16;
  std::size_t k = 0;  // 0: n / 4, at least 1
  std::size_t trials = 50;
  double p = 2.0;
  double lambda = 1.0;
  std::uint64_t seed = 0;
  double threshold = 1e-4;
};

struct GradcheckReport {
  double max_rel_error = 0.0;
  double max_adjoint_error = 0.0;
  std::size_t trials = 0;
  bool informational = false;  // hard operators: no analytic Jacobian to compare
  bool passed = false;
};

GradcheckReport run_gradcheck(const GradcheckOptions& opt);

/// Prints the report; returns kGradcheckFailed on failure.
int cmd_gradcheck(std::ostream& out, const GradcheckOptions& opt);

struct BenchOptions {
  std::vector<std::size_t> n_list{1000, 10000, 100000, 1000000};
  double k_ratio = 0.1;
  std::vector<Solver> solvers{Solver::pav, Solver::dykstra};
  std::size_t repeats = 5;
  std::uint64_t seed = 0;
  double p = 2.0;
  double lambda = 1.0;
  Phi phi = Phi::identity;
  std::string dist = "uniform";  // uniform: U(0, n), unit mean gap; normal: N(0, 1)
};

struct BenchRecord {
  std::size_t n = 0;
  std::size_t k = 0;
  std::string solver;
  double median_seconds = 0.0;
  double max_abs_diff_vs_pav = 0.0;
};

std::vector<BenchRecord> run_bench(const BenchOptions& opt);

/// CSV n,k,solver,median_seconds,max_abs_diff_vs_pav; a "hard" baseline row per n.
void cmd_bench(std::ostream& out, const BenchOptions& opt);

}  // namespace sparsetopk::cli
