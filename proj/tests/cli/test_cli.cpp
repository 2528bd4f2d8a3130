#include <cmath>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"

using namespace sparsetopk;
using namespace sparsetopk::cli;

namespace {

struct EvalRun {
  int code = 0;
  std::string out;
  std::string log;
  EvalSummary summary;
};

EvalRun run_eval(const std::string& input, EvalOptions opt = {}) {
  std::istringstream in(input);
  std::ostringstream out;
  std::ostringstream log;
  EvalRun r;
  r.code = cmd_eval(in, out, log, opt, &r.summary);
  r.out = out.str();
  r.log = log.str();
  return r;
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_number(0.0) == "0");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(-3.0) == "-3");
  CHECK(format_number(1.5) == "1.5");
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(INFINITY) == "null");
  CHECK(format_number(NAN) == "null");
}

TEST_CASE("eval examples") {
  const EvalOptions opt;
  CHECK(eval_record(R"({"op":"topkmag","x":[1,-3,2],"k":2})", opt) == R"({"y":[0,-3,2]})");
  CHECK(eval_record(R"({"op":"soft_topkmag","x":[1,-3,2],"k":2,"p":2,"lambda":1})", opt) == R"({"y":[0,-1.5,1]})");
  CHECK(eval_record(R"({"op":"lmo","x":[1,-3,2],"w":[1,1,0]})", opt) == R"({"y":[1,0,1],"value":3})");
  CHECK(eval_record(R"({"op":"topkmask","x":[1,-3,2],"k":1})", opt) == R"({"y":[0,0,1]})");
  CHECK(eval_record(R"({"op":"topk","x":[5,4,3],"k":2})", opt) == R"({"y":[5,4,0]})");
}

TEST_CASE("eval solvers agree") {
  const std::string rec = R"({"op":"soft_topkmag","x":[1,-3,2],"k":2,"p":2,"lambda":1,"solver":"dykstra"})";
  CHECK(eval_record(rec, EvalOptions{}) == R"({"y":[0,-1.5,1]})");
  EvalOptions bca;
  bca.solver = Solver::dual_bca;
  CHECK(eval_record(R"({"op":"soft_topkmask","x":[0.5,2,-1,3],"k":2,"p":2,"lambda":0.1})", bca) ==
        eval_record(R"({"op":"soft_topkmask","x":[0.5,2,-1,3],"k":2,"p":2,"lambda":0.1})", EvalOptions{}));
}

TEST_CASE("eval f_value takes k or w") {
  const EvalOptions opt;
  const std::string a = eval_record(R"({"op":"f_value","x":[3,1,2],"k":2,"phi":"half_square"})", opt);
  const std::string b = eval_record(R"({"op":"f_value","x":[3,1,2],"w":[1,0,1],"phi":"half_square"})", opt);
  CHECK(a == b);
  CHECK(a.find("\"value\":") != std::string::npos);
  CHECK_THROWS_AS(eval_record(R"({"op":"f_value","x":[3,1,2],"k":2,"w":[1,1,0]})", opt), InvalidArgument);
}

TEST_CASE("eval record errors") {
  const EvalOptions opt;
  CHECK_THROWS_AS(eval_record("{not json", opt), InvalidArgument);
  CHECK_THROWS_AS(eval_record("[1,2]", opt), InvalidArgument);
  CHECK_THROWS_AS(eval_record(R"({"x":[1,2],"k":1})", opt), InvalidArgument);
  CHECK_THROWS_AS(eval_record(R"({"op":"bogus","x":[1]})", opt), InvalidArgument);
  CHECK_THROWS_AS(eval_record(R"({"op":"topk","x":[1,2],"k":1,"extra":0})", opt), InvalidArgument);
  CHECK_THROWS_AS(eval_record(R"({"op":"topk","x":[1,"a"],"k":1})", opt), InvalidArgument);
  CHECK_THROWS_AS(eval_record(R"({"op":"topk","x":[1,2],"k":3})", opt), InvalidArgument);
  CHECK_THROWS_AS(eval_record(R"({"op":"topk","x":[1,2],"k":-1})", opt), InvalidArgument);
  CHECK_THROWS_AS(eval_record(R"({"op":"topk","x":[1,2]})", opt), InvalidArgument);
  CHECK_THROWS_AS(eval_record(R"({"op":"soft_topkmask","x":[1,2],"k":1,"p":3})", opt), InvalidArgument);
  CHECK_THROWS_AS(eval_record(R"({"op":"soft_topkmask","x":[1,2],"k":1,"lambda":-1})", opt), InvalidArgument);
  CHECK_THROWS_AS(eval_record(R"({"op":"soft_topkmask","x":[1,2],"k":1,"solver":"nope"})", opt), InvalidArgument);
  CHECK_THROWS_AS(eval_record(R"({"op":"lmo","x":[1,2]})", opt), InvalidArgument);
  CHECK_THROWS(eval_record(R"({"op":"soft_topkmask","x":[1,2],"k":1,"p":1.5,"solver":"dykstra"})", opt));
}

TEST_CASE("eval stream keeps order and reports per-record errors") {
  const EvalRun r = run_eval(
      "{\"op\":\"topkmask\",\"x\":[1,3,2],\"k\":1}\n"
      "\n"
      "{\"op\":\"bogus\",\"x\":[1]}\n"
      "{\"op\":\"topkmask\",\"x\":[1,3,2],\"k\":2}\n");
  CHECK(r.code == kOk);
  CHECK(r.out == "{\"y\":[0,1,0]}\n{\"error\":\"unknown op 'bogus'\"}\n{\"y\":[0,1,1]}\n");
  CHECK(r.summary.records == 3);
  CHECK(r.summary.failed == 1);
}

TEST_CASE("eval exit code when every record fails") {
  CHECK(run_eval("{\"op\":\"bogus\",\"x\":[1]}\nnot json\n").code == kAllRecordsFailed);
  CHECK(run_eval("").code == kOk);
}

TEST_CASE("eval logs the mean loss") {
  const EvalRun r = run_eval(
      "{\"op\":\"fy_loss\",\"x\":[1,2,3],\"t\":[0,0,1],\"k\":1}\n"
      "{\"op\":\"fy_loss\",\"x\":[3,2,1],\"t\":[0,0,1],\"k\":1}\n");
  CHECK(r.code == kOk);
  REQUIRE(r.summary.loss_records == 2);
  CHECK(r.log.find("fy_loss mean over 2 records") != std::string::npos);
}

TEST_CASE("curve staircase") {
  CurveOptions opt;
  opt.grid_start = 0.0;
  opt.grid_end = 6.0;
  opt.grid_steps = 12;
  const auto pts = curve_points(opt);
  REQUIRE(pts.size() == 13);
  for (const CurvePoint& pt : pts) {
    const double want = pt.s <= 1.0 ? 0.0 : (pt.s <= 4.0 ? 1.0 : 2.0);
    CHECK(pt.hard == want);
  }
  CHECK(pts[0].relaxed == 0.0);
  CHECK(pts[4].s == 2.0);
  CHECK(pts[4].hard == 1.0);
  CHECK(pts[10].s == 5.0);
  CHECK(pts[10].hard == 2.0);
}

TEST_CASE("curve errors") {
  CurveOptions opt;
  opt.grid_steps = 0;
  CHECK_THROWS_AS(curve_points(opt), InvalidArgument);
  opt = CurveOptions{};
  opt.grid_end = opt.grid_start;
  CHECK_THROWS_AS(curve_points(opt), InvalidArgument);
  opt = CurveOptions{};
  opt.k = 5;
  CHECK_THROWS_AS(curve_points(opt), InvalidArgument);
}

TEST_CASE("curve output is deterministic") {
  CurveOptions opt;
  opt.grid_steps = 90;
  std::ostringstream a;
  std::ostringstream b;
  cmd_curve(a, opt);
  cmd_curve(b, opt);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("s,hard,relaxed\n", 0) == 0);
}

TEST_CASE("gradcheck passes for the relaxed operators") {
  GradcheckOptions opt;
  const GradcheckReport mag = run_gradcheck(opt);
  CHECK(mag.passed);
  CHECK(mag.trials == 50);
  CHECK(mag.max_rel_error <= 1e-4);
  CHECK(mag.max_adjoint_error <= 1e-10);

  opt.op = "soft_topkmask";
  opt.p = 4.0 / 3.0;
  CHECK(run_gradcheck(opt).passed);
  opt.op = "soft_signed_topkmask";
  CHECK(run_gradcheck(opt).passed);
  opt.op = "soft_rank";
  opt.p = 2.0;
  CHECK(run_gradcheck(opt).passed);
  opt.op = "fy_loss";
  CHECK(run_gradcheck(opt).passed);
}

TEST_CASE("gradcheck on a hard operator is informational") {
  GradcheckOptions opt;
  opt.op = "topkmask";
  const GradcheckReport r = run_gradcheck(opt);
  CHECK(r.informational);
  std::ostringstream out;
  CHECK(cmd_gradcheck(out, opt) == kOk);
  CHECK(out.str().find("result=INFO") != std::string::npos);
}

TEST_CASE("gradcheck failure exit code") {
  GradcheckOptions opt;
  opt.threshold = 0.0;
  opt.trials = 3;
  std::ostringstream out;
  CHECK(cmd_gradcheck(out, opt) == kGradcheckFailed);
  CHECK(out.str().find("result=FAIL") != std::string::npos);
}

TEST_CASE("gradcheck errors") {
  GradcheckOptions opt;
  opt.op = "soft_sort";
  CHECK_THROWS_AS(run_gradcheck(opt), InvalidArgument);
  opt = GradcheckOptions{};
  opt.n = 0;
  CHECK_THROWS_AS(run_gradcheck(opt), InvalidArgument);
}

TEST_CASE("bench rows") {
  BenchOptions opt;
  opt.n_list = {1, 50};
  opt.repeats = 1;
  opt.solvers = {Solver::pav, Solver::dykstra, Solver::dual_bca};
  const auto rows = run_bench(opt);
  REQUIRE(rows.size() == 8);
  CHECK(rows[0].n == 1);
  CHECK(rows[0].k == 1);
  CHECK(rows[0].solver == "hard");
  CHECK(rows[4].n == 50);
  CHECK(rows[4].k == 5);
  for (const auto& r : rows) {
    CHECK(r.median_seconds >= 0.0);
    if (r.solver != "hard") CHECK(r.max_abs_diff_vs_pav <= 1e-6);
  }
}

TEST_CASE("bench errors") {
  BenchOptions opt;
  opt.n_list = {10};
  opt.p = 1.5;
  std::ostringstream out;
  CHECK_THROWS_AS(cmd_bench(out, opt), UnsupportedConfiguration);
  CHECK(out.str().empty());
  opt = BenchOptions{};
  opt.n_list = {0};
  CHECK_THROWS_AS(run_bench(opt), InvalidArgument);
  opt = BenchOptions{};
  opt.k_ratio = 0.0;
  CHECK_THROWS_AS(run_bench(opt), InvalidArgument);
}
