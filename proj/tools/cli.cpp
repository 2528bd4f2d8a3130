#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "sparsetopk/autodiff.hpp"
#include "sparsetopk/fy_loss.hpp"
#include "sparsetopk/hard_ops.hpp"
#include "sparsetopk/testkit/oracles.hpp"

namespace sparsetopk::cli {

using json = nlohmann::json;

std::string format_number(double v) {
  if (!std::isfinite(v)) return "null";
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

// Below the short-circuit threshold relaxed_apply returns the hard operator.
const double kHardLambda = 0.5 * kHardLambdaThreshold;

Vector hard_apply(std::span<const double> x, Phi phi, std::size_t k) {
  return relaxed_apply(x, OperatorSpec{phi, Regularizer(2.0, kHardLambda), TopK{k}}).y;
}

void write_array(std::ostream& out, std::span<const double> v) {
  out << '[';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out << ',';
    out << format_number(v[i]);
  }
  out << ']';
}

const std::set<std::string>& known_fields() {
  static const std::set<std::string> fields{"op", "x", "k", "w", "t", "phi", "p", "lambda", "solver"};
  return fields;
}

Vector get_vector(const json& rec, const char* key) {
  const auto it = rec.find(key);
  if (it == rec.end()) throw InvalidArgument(std::string("missing field '") + key + "'");
  if (!it->is_array()) throw InvalidArgument(std::string("field '") + key + "' must be an array of numbers");
  Vector v;
  v.reserve(it->size());
  for (const auto& e : *it) {
    if (!e.is_number()) throw InvalidArgument(std::string("field '") + key + "' must be an array of numbers");
    v.push_back(e.get<double>());
  }
  return v;
}

double get_number(const json& rec, const char* key, double fallback) {
  const auto it = rec.find(key);
  if (it == rec.end()) return fallback;
  if (!it->is_number()) throw InvalidArgument(std::string("field '") + key + "' must be a number");
  return it->get<double>();
}

std::size_t get_k(const json& rec) {
  const auto it = rec.find("k");
  if (it == rec.end()) throw InvalidArgument("missing field 'k'");
  if (!it->is_number_integer() || it->get<long long>() < 1) {
    throw InvalidArgument("field 'k' must be a positive integer");
  }
  return static_cast<std::size_t>(it->get<long long>());
}

std::string get_string(const json& rec, const char* key, const std::string& fallback) {
  const auto it = rec.find(key);
  if (it == rec.end()) return fallback;
  if (!it->is_string()) throw InvalidArgument(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

}  // namespace

std::string eval_record(const std::string& line, const EvalOptions& opt, double* loss) {
  json rec;
  try {
    rec = json::parse(line);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("malformed record: ") + e.what());
  }
  if (!rec.is_object()) throw InvalidArgument("record must be an object");
  for (const auto& item : rec.items()) {
    if (!known_fields().contains(item.key())) throw InvalidArgument("unknown field '" + item.key() + "'");
  }
  const auto op_it = rec.find("op");
  if (op_it == rec.end() || !op_it->is_string()) throw InvalidArgument("missing string field 'op'");
  const std::string op = op_it->get<std::string>();
  static const std::set<std::string> ops{"topkmask",  "topk",      "topkmag", "soft_topkmask", "soft_topkmag",
                                         "soft_signed_topkmask", "soft_sort", "soft_rank", "lmo",     "f_value",
                                         "fy_loss"};
  if (!ops.contains(op)) throw InvalidArgument("unknown op '" + op + "'");
  const Vector x = get_vector(rec, "x");

  auto reg = [&] { return Regularizer(get_number(rec, "p", 2.0), get_number(rec, "lambda", 1.0)); };
  auto solver = [&] {
    SolverOptions s;
    s.kind = rec.contains("solver") ? parse_solver(get_string(rec, "solver", "")) : opt.solver;
    return s;
  };

  Vector y;
  bool has_value = false;
  double value = 0.0;
  if (op == "topkmask") {
    y = topkmask(x, get_k(rec));
  } else if (op == "topk") {
    y = topk(x, get_k(rec));
  } else if (op == "topkmag") {
    y = topkmag(x, get_k(rec));
  } else if (op == "soft_topkmask") {
    y = soft_topkmask(x, get_k(rec), reg(), solver());
  } else if (op == "soft_topkmag") {
    y = soft_topkmag(x, get_k(rec), reg(), solver());
  } else if (op == "soft_signed_topkmask") {
    y = soft_signed_topkmask(x, get_k(rec), reg(), solver());
  } else if (op == "soft_sort") {
    y = soft_sort(x, reg(), solver());
  } else if (op == "soft_rank") {
    y = soft_rank(x, reg(), solver());
  } else if (op == "lmo") {
    LmoResult r = lmo(x, get_vector(rec, "w"));
    y = std::move(r.argmax);
    value = r.value;
    has_value = true;
  } else if (op == "f_value") {
    OperatorSpec spec{parse_phi(get_string(rec, "phi", "identity")), reg(), TopK{}};
    if (rec.contains("w")) {
      if (rec.contains("k")) throw InvalidArgument("give either 'k' or 'w', not both");
      spec.weights = get_vector(rec, "w");
    } else {
      spec.weights = TopK{get_k(rec)};
    }
    const RelaxedOutput out = relaxed_apply(x, spec, solver());
    value = f_value(x, out);
    y = out.y;
    has_value = true;
  } else if (op == "fy_loss") {
    const LossResult r = fy_topk_loss(x, get_vector(rec, "t"), LossConfig{get_k(rec), reg()}, solver());
    y = r.gradient;
    value = r.value;
    has_value = true;
    if (loss) *loss = value;
  } else {
    throw InvalidArgument("unknown op '" + op + "'");
  }

  std::ostringstream os;
  os << "{\"y\":";
  write_array(os, y);
  if (has_value) os << ",\"value\":" << format_number(value);
  os << '}';
  return os.str();
}

int cmd_eval(std::istream& in, std::ostream& out, std::ostream& log, const EvalOptions& opt, EvalSummary* summary) {
  EvalSummary local;
  EvalSummary& s = summary ? *summary : local;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++s.records;
    double loss = NAN;
    try {
      out << eval_record(line, opt, &loss) << '\n';
      if (!std::isnan(loss)) {
        ++s.loss_records;
        s.loss_sum += loss;
      }
    } catch (const std::exception& e) {
      ++s.failed;
      out << json{{"error", e.what()}}.dump() << '\n';
    }
  }
  out.flush();
  if (s.loss_records > 0) {
    log << "fy_loss mean over " << s.loss_records
        << " records: " << format_number(s.loss_sum / static_cast<double>(s.loss_records)) << '\n';
  }
  if (s.records > 0 && s.failed == s.records) return kAllRecordsFailed;
  return kOk;
}

std::vector<CurvePoint> curve_points(const CurveOptions& opt) {
  if (opt.grid_steps == 0) throw InvalidArgument("curve: grid steps must be positive");
  if (!std::isfinite(opt.grid_start) || !std::isfinite(opt.grid_end) || !(opt.grid_end > opt.grid_start)) {
    throw InvalidArgument("curve: need finite grid bounds with end > start");
  }
  const OperatorSpec spec{opt.phi, Regularizer(opt.p, opt.lambda), TopK{opt.k}};
  std::vector<CurvePoint> points;
  points.reserve(opt.grid_steps + 1);
  for (std::size_t i = 0; i <= opt.grid_steps; ++i) {
    const double s =
        opt.grid_start + (opt.grid_end - opt.grid_start) * static_cast<double>(i) / static_cast<double>(opt.grid_steps);
    const Vector theta{3.0, 1.0, -1.0 + s, s};
    const Vector hard = hard_apply(theta, opt.phi, opt.k);
    const Vector soft = relaxed_apply(theta, spec).y;
    points.push_back({s, hard[2] + hard[3], soft[2] + soft[3]});
  }
  return points;
}

void cmd_curve(std::ostream& out, const CurveOptions& opt) {
  const std::vector<CurvePoint> points = curve_points(opt);
  out << "s,hard,relaxed\n";
  for (const CurvePoint& pt : points) {
    out << format_number(pt.s) << ',' << format_number(pt.hard) << ',' << format_number(pt.relaxed) << '\n';
  }
}

namespace {

enum class GradOp { relaxed, rank, loss, hard };

struct GradTarget {
  GradOp kind = GradOp::relaxed;
  Phi phi = Phi::identity;
};

GradTarget grad_target(const std::string& op) {
  if (op == "soft_topkmask") return {GradOp::relaxed, Phi::identity};
  if (op == "soft_topkmag") return {GradOp::relaxed, Phi::half_square};
  if (op == "soft_signed_topkmask") return {GradOp::relaxed, Phi::absolute};
  if (op == "soft_rank") return {GradOp::rank, Phi::identity};
  if (op == "fy_loss") return {GradOp::loss, Phi::identity};
  if (op == "topkmask") return {GradOp::hard, Phi::identity};
  if (op == "topkmag") return {GradOp::hard, Phi::half_square};
  if (op == "topk") return {GradOp::hard, Phi::identity};
  throw InvalidArgument("gradcheck: unsupported op '" + op +
                        "' (soft_topkmask|soft_topkmag|soft_signed_topkmask|soft_rank|fy_loss|topkmask|topk|topkmag)");
}

// N(0, 1) draw whose sorted entries (|x| for even phi) are at least 1e-2 apart.
Vector admissible_point(std::mt19937_64& rng, std::size_t n, Phi phi) {
  std::normal_distribution<double> dist;
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Vector x(n);
    for (double& v : x) v = dist(rng);
    Vector key = x;
    if (phi != Phi::identity) {
      for (double& v : key) v = std::abs(v);
      if (*std::min_element(key.begin(), key.end()) < 1e-2) continue;
    }
    std::sort(key.begin(), key.end());
    bool ok = true;
    for (std::size_t i = 1; i < n && ok; ++i) ok = key[i] - key[i - 1] >= 1e-2;
    if (ok) return x;
  }
  throw InvalidArgument("gradcheck: could not draw a point with sorted gaps >= 1e-2; lower --n");
}

double rel_error(const testkit::Matrix& a, const testkit::Matrix& b) {
  double num = 0.0;
  double den = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a[i].size(); ++j) {
      num = std::max(num, std::abs(a[i][j] - b[i][j]));
      den = std::max(den, std::abs(b[i][j]));
    }
  }
  return num / den;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

GradcheckReport run_gradcheck(const GradcheckOptions& opt) {
  const GradTarget target = grad_target(opt.op);
  if (opt.n < 1) throw InvalidArgument("gradcheck: n must be positive");
  if (opt.trials < 1) throw InvalidArgument("gradcheck: trials must be positive");
  const std::size_t k = opt.k ? opt.k : std::max<std::size_t>(1, opt.n / 4);
  const Regularizer reg(opt.p, opt.lambda);
  constexpr double kStep = 1e-6;

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> dist;
  auto gaussian = [&](std::size_t n) {
    Vector v(n);
    for (double& e : v) e = dist(rng);
    return v;
  };

  GradcheckReport report;
  report.informational = target.kind == GradOp::hard;
  for (std::size_t trial = 0; trial < opt.trials; ++trial) {
    const Vector x = admissible_point(rng, opt.n, target.phi);
    ++report.trials;

    if (target.kind == GradOp::hard) {
      const testkit::Matrix fd = testkit::fd_jacobian(
          [&](std::span<const double> z) {
            if (opt.op == "topk") return topk(z, k);
            return opt.op == "topkmag" ? topkmag(z, k) : topkmask(z, k);
          },
          x, kStep);
      testkit::Matrix zero(opt.n, Vector(opt.n, 0.0));
      report.max_rel_error = std::max(report.max_rel_error, rel_error(fd, zero));
      continue;
    }

    if (target.kind == GradOp::loss) {
      Vector t(opt.n, 0.0);
      t[rng() % opt.n] = 1.0;
      const LossConfig cfg{k, reg};
      const Vector grad = fy_topk_loss(x, t, cfg).gradient;
      const testkit::Matrix fd = testkit::fd_jacobian(
          [&](std::span<const double> z) { return Vector{fy_topk_loss(z, t, cfg).value}; }, x, kStep);
      testkit::Matrix an(1, grad);
      report.max_rel_error = std::max(report.max_rel_error, rel_error(an, fd));
      continue;
    }

    // soft_rank(x) = relaxed_apply(-x, w = rho).y, so its Jacobian is -J(-x).
    Vector point = x;
    OperatorSpec spec{target.phi, reg, TopK{k}};
    double sign = 1.0;
    if (target.kind == GradOp::rank) {
      for (double& v : point) v = -v;
      Vector rho(opt.n);
      for (std::size_t i = 0; i < opt.n; ++i) rho[i] = static_cast<double>(opt.n - i);
      spec.weights = rho;
      sign = -1.0;
    }
    const JacobianPlan plan(relaxed_apply(point, spec));
    const testkit::Matrix fd = testkit::fd_jacobian(
        [&](std::span<const double> z) {
          return target.kind == GradOp::rank ? soft_rank(z, reg) : relaxed_apply(z, spec).y;
        },
        x, kStep);

    testkit::Matrix by_jvp(opt.n, Vector(opt.n, 0.0));
    testkit::Matrix by_vjp(opt.n, Vector(opt.n, 0.0));
    for (std::size_t j = 0; j < opt.n; ++j) {
      Vector e(opt.n, 0.0);
      e[j] = 1.0;
      const Vector col = plan.jvp(e);
      const Vector row = plan.vjp(e);
      for (std::size_t i = 0; i < opt.n; ++i) {
        by_jvp[i][j] = sign * col[i];
        by_vjp[j][i] = sign * row[i];
      }
    }
    report.max_rel_error = std::max({report.max_rel_error, rel_error(by_jvp, fd), rel_error(by_vjp, fd)});

    const Vector g = gaussian(opt.n);
    const Vector t = gaussian(opt.n);
    const double lhs = dot(g, plan.jvp(t));
    const double rhs = dot(plan.vjp(g), t);
    report.max_adjoint_error = std::max(report.max_adjoint_error, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
  }
  report.passed = report.informational ||
                  (report.max_rel_error <= opt.threshold && report.max_adjoint_error <= 1e-10);
  return report;
}

int cmd_gradcheck(std::ostream& out, const GradcheckOptions& opt) {
  const GradcheckReport r = run_gradcheck(opt);
  const std::size_t k = opt.k ? opt.k : std::max<std::size_t>(1, opt.n / 4);
  out << "op=" << opt.op << " n=" << opt.n << " k=" << k << " p=" << format_number(opt.p)
      << " lambda=" << format_number(opt.lambda) << " seed=" << opt.seed << " trials=" << r.trials << '\n';
  if (r.informational) {
    out << "hard operator: finite-difference Jacobian max |entry| = " << format_number(r.max_rel_error)
        << (r.max_rel_error == 0.0 ? " (identically zero)" : " (0/1 diagonal selection)") << '\n';
    out << "result=INFO\n";
    return kOk;
  }
  out << "max_rel_error=" << format_number(r.max_rel_error) << " threshold=" << format_number(opt.threshold)
      << " max_adjoint_error=" << format_number(r.max_adjoint_error) << '\n';
  out << "result=" << (r.passed ? "PASS" : "FAIL") << '\n';
  return r.passed ? kOk : kGradcheckFailed;
}

namespace {

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

template <class F>
double median_seconds(std::size_t repeats, F&& fn) {
  std::vector<double> times;
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  return median(std::move(times));
}

void validate_bench(const BenchOptions& opt) {
  if (opt.n_list.empty()) throw InvalidArgument("bench: empty n list");
  if (opt.repeats < 1) throw InvalidArgument("bench: repeats must be positive");
  if (!(opt.k_ratio > 0.0 && opt.k_ratio <= 1.0)) throw InvalidArgument("bench: k ratio must lie in (0, 1]");
  if (opt.dist != "uniform" && opt.dist != "normal") throw InvalidArgument("bench: dist must be uniform or normal");
  const Regularizer reg(opt.p, opt.lambda);
  for (Solver s : opt.solvers) {
    if (s == Solver::dykstra && !reg.is_quadratic()) throw UnsupportedConfiguration("bench: dykstra requires p = 2");
  }
  for (std::size_t n : opt.n_list) {
    if (n < 1) throw InvalidArgument("bench: n must be positive");
  }
}

}  // namespace

std::vector<BenchRecord> run_bench(const BenchOptions& opt) {
  validate_bench(opt);
  const Regularizer reg(opt.p, opt.lambda);
  std::vector<BenchRecord> records;
  std::mt19937_64 rng(opt.seed);
  for (std::size_t n : opt.n_list) {
    const auto k = std::min<std::size_t>(
        n, std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(opt.k_ratio * static_cast<double>(n)))));
    Vector x(n);
    if (opt.dist == "uniform") {
      std::uniform_real_distribution<double> dist(0.0, static_cast<double>(n));
      for (double& v : x) v = dist(rng);
    } else {
      std::normal_distribution<double> dist;
      for (double& v : x) v = dist(rng);
    }
    const OperatorSpec spec{opt.phi, reg, TopK{k}};
    const Vector ref = relaxed_apply(x, spec).y;

    Vector hard;
    const double hard_time = median_seconds(opt.repeats, [&] { hard = hard_apply(x, opt.phi, k); });
    records.push_back({n, k, "hard", hard_time, max_abs_diff(hard, ref)});
    for (Solver s : opt.solvers) {
      Vector y;
      SolverOptions so;
      so.kind = s;
      const double t = median_seconds(opt.repeats, [&] { y = relaxed_apply(x, spec, so).y; });
      records.push_back({n, k, std::string(to_string(s)), t, max_abs_diff(y, ref)});
    }
  }
  return records;
}

void cmd_bench(std::ostream& out, const BenchOptions& opt) {
  validate_bench(opt);
  out << "n,k,solver,median_seconds,max_abs_diff_vs_pav\n";
  for (const BenchRecord& r : run_bench(opt)) {
    out << r.n << ',' << r.k << ',' << r.solver << ',' << format_number(r.median_seconds) << ','
        << format_number(r.max_abs_diff_vs_pav) << '\n';
    out.flush();
  }
}

}  // namespace sparsetopk::cli
