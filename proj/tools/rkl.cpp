// rkl: evaluate single quantities and run verification suites.
//
//   rkl eval bessel-k --nu 0.5 --x 1
//   rkl eval kernel --family m1 --t 0.5 --u 0 --v 0
//   rkl verify --suite estimates --out ./reports --parallel 8
//
// Exit codes: 0 success, 1 numerical or verification failure, 2 usage error.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "report.hpp"
#include "rkl/bessel.hpp"
#include "rkl/checks.hpp"
#include "rkl/kernels.hpp"
#include "rkl/schrodinger.hpp"
#include "rkl/verify.hpp"
#include "rkl/weights.hpp"

namespace {

namespace fs = std::filesystem;
using rkl::kernels::KernelFamily;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr double kEps = std::numeric_limits<double>::epsilon();

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// All user-visible output goes through here.
class Writer {
 public:
  void out(const std::string& line) {
    std::lock_guard<std::mutex> lock(mutex_);
    std::cout << line << '\n' << std::flush;
  }
  void err(const std::string& line) {
    std::lock_guard<std::mutex> lock(mutex_);
    std::cerr << line << '\n' << std::flush;
  }

 private:
  std::mutex mutex_;
};

Writer& writer() {
  static Writer w;
  return w;
}

std::string printf_string(const char* fmt, double a, double b) {
  char buf[96];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  return buf;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  double nu = 0.0;
  double x = 1.0;
  std::string family = "m1";
  int n = 0;
  double t = 0.25;
  double u = 0.0;
  double v = 0.0;
  double tol = 1e-8;
  double lambda = 1.0;
  double zeta = 1.0;
};

KernelFamily parse_family(const std::string& s) {
  if (s == "m0") return KernelFamily::M0;
  if (s == "m1") return KernelFamily::M1;
  throw UsageError("--family must be m0 or m1");
}

void print_value(double value, double abs_err) {
  writer().out(printf_string("%.16g abs_err=%.3g", value, abs_err));
}

void add_eval(CLI::App& app, EvalArgs& a, std::function<void()>& action) {
  auto* eval = app.add_subcommand("eval", "Evaluate one quantity with an error estimate");
  eval->require_subcommand(1);

  auto bessel = [&](const char* name, const char* help, rkl::EvalResult (*f)(rkl::bessel::BesselOrder, double)) {
    auto* sub = eval->add_subcommand(name, help);
    sub->add_option("--nu", a.nu, "Order in [0, 4]")->required();
    sub->add_option("--x", a.x, "Argument, x > 0")->required();
    sub->callback([&a, &action, f] {
      action = [&a, f] {
        const auto r = f(rkl::bessel::BesselOrder(a.nu), a.x);
        print_value(r.to_double(), r.abs_err_estimate());
      };
    });
  };
  bessel("bessel-i", "Modified Bessel function I_nu(x)", rkl::bessel::bessel_i_scaled);
  bessel("bessel-k", "Modified Bessel function K_nu(x)", rkl::bessel::bessel_k_scaled);
  bessel("bessel-j", "Bessel function J_nu(x)", rkl::bessel::bessel_j);

  auto* kernel = eval->add_subcommand("kernel", "Pointwise kernel S_j^n(t,u,v)");
  kernel->add_option("--family", a.family, "m0 or m1")->required();
  kernel->add_option("--t", a.t, "t in [0, 1/2]")->required();
  kernel->add_option("--u", a.u)->required();
  kernel->add_option("--v", a.v)->required();
  kernel->add_option("--n", a.n, "Derivative order in [0, 6]");
  kernel->callback([&] {
    action = [&a] {
      const auto fam = parse_family(a.family);
      const double value = rkl::kernels::homog_deriv_kernel_t(fam, a.n, a.t, a.u, a.v);
      const auto jet = rkl::kernels::resolvent_jet(a.t, a.u, a.v, rkl::kernels::jet_order(fam, a.n));
      const double err = 16.0 * kEps * rkl::kernels::kernel_term_scale(fam, a.n, jet);
      print_value(value, err);
    };
  });

  auto* integrated = eval->add_subcommand("integrated", "Integrated kernel S_j^n(u,v)");
  integrated->add_option("--family", a.family, "m0 or m1")->required();
  integrated->add_option("--u", a.u)->required();
  integrated->add_option("--v", a.v)->required();
  integrated->add_option("--n", a.n, "Derivative order in [0, 6]");
  integrated->add_option("--tol", a.tol, "Relative tolerance in [1e-12, 1e-2)");
  integrated->callback([&] {
    action = [&a] {
      const auto r = rkl::kernels::integrated_kernel_report(parse_family(a.family), a.n, a.u, a.v, a.tol);
      print_value(r.value, r.abs_error);
    };
  });

  auto scalar = [&](const char* name, const char* help, double (*f)(double)) {
    auto* sub = eval->add_subcommand(name, help);
    sub->add_option("--lambda", a.lambda, "Spectral parameter, lambda > 0")->required();
    sub->callback([&a, &action, f] {
      action = [&a, f] {
        const double value = f(a.lambda);
        print_value(value, 4.0 * kEps * std::abs(value));
      };
    });
  };
  scalar("subord-g", "Low-t subordination multiplier g(lambda)", rkl::schrodinger::subord_g);
  scalar("subord-h", "High-t subordination multiplier h(lambda)", rkl::schrodinger::subord_h);

  auto* psi = eval->add_subcommand("psi", "Heat-kernel weight psi_t(zeta)");
  psi->add_option("--t", a.t, "t in [0.05, 5]")->required();
  psi->add_option("--zeta", a.zeta, "zeta > 0")->required();
  psi->callback([&] {
    action = [&a] {
      const auto r = rkl::schrodinger::psi_weight_report(a.t, a.zeta);
      print_value(r.value, r.abs_error);
    };
  });
}

// ---------------------------------------------------------------------------
// verify

struct VerifyArgs {
  std::string suite = "all";
  std::string out;
  unsigned parallel = 1;
  double wall = -12.0;
  double wall_h = 0.01;
  double subordination_t = 1e3;
  double mihlin_h = 0.125;
  double window_lo = -16.0;
  double window_hi = 8.0;
  int k_max = 8;
  double max_variation = 0.10;
  double tol = 1e-8;
  std::vector<std::string> weights;
  bool plots = true;
};

/// Numerical settings only; output location and thread count do not change
/// any result.
std::string canonical_config(const VerifyArgs& a) {
  std::ostringstream o;
  o.precision(17);
  o << "suite=" << a.suite << ";wall=" << a.wall << ";wall_h=" << a.wall_h << ";subordination_t="
    << a.subordination_t << ";mihlin_h=" << a.mihlin_h << ";window_lo=" << a.window_lo
    << ";window_hi=" << a.window_hi << ";k_max=" << a.k_max << ";max_variation=" << a.max_variation
    << ";tol=" << a.tol << ";weights=";
  for (const auto& w : a.weights) o << w << ",";
  return o.str();
}

class VerifyRun {
 public:
  explicit VerifyRun(const VerifyArgs& a) : args_(a), hash_(rkl::report::fnv1a_hex(canonical_config(a))) {}

  int run() {
    prepare_output();
    const std::string& s = args_.suite;
    const bool estimates = s == "estimates" || s == "all";
    if (s == "bessel" || s == "kernels" || estimates) {
      run_specs(estimates ? rkl::verify::registry() : rkl::verify::select(rkl::verify::registry(), s));
    }
    if (s == "bessel" || s == "all") add_check(rkl::checks::bessel_accuracy());
    if (s == "operators" || s == "all") run_operators();
    if (args_.plots && (s == "kernels" || estimates)) write_plots();
    finish();
    if (failures_.empty()) {
      writer().out("all " + std::to_string(total_) + " verdicts as expected; reports in " + dir_.string());
      return kExitOk;
    }
    std::string line = "FAILED (" + std::to_string(failures_.size()) + " of " + std::to_string(total_) + "):";
    for (const auto& id : failures_) line += " " + id;
    writer().out(line);
    return kExitFailure;
  }

 private:
  rkl::report::Header header(const std::string& anchor) const { return {hash_, anchor}; }

  void prepare_output() {
    std::string out = args_.out;
    if (out.empty()) {
      const char* env = std::getenv("RKL_OUT_DIR");
      out = env && *env ? env : "reports";
    }
    dir_ = out;
    std::error_code ec;
    fs::create_directories(dir_, ec);
    const fs::path probe = dir_ / ".rkl_write_probe";
    std::ofstream test(probe);
    if (ec || !test) throw UsageError("output directory not writable: " + dir_.string());
    test.close();
    fs::remove(probe, ec);
  }

  static std::string file_stem(const std::string& id) {
    std::string out = id;
    for (char& c : out) {
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
    }
    return out;
  }

  void run_specs(const std::vector<rkl::verify::EstimateSpec>& specs) {
    writer().out("running " + std::to_string(specs.size()) + " estimate specs on " +
                 std::to_string(args_.parallel) + " thread(s)");
    const auto reports = rkl::verify::run_all(specs, args_.parallel, [](const rkl::verify::RatioReport& r) {
      writer().out(std::string(r.as_expected() ? "  ok   " : "  FAIL ") + r.id +
                   printf_string("  sup=%.4g drift=%.3g", r.sup_ratio, r.drift));
    });
    for (const auto& r : reports) {
      rkl::report::write_json(dir_ / ("spec_" + file_stem(r.id) + ".json"), rkl::report::to_json(r, header(r.anchor)));
      summary_.add(r);
      ++total_;
      if (!r.as_expected()) failures_.push_back(r.id);
    }
  }

  void add_check(const rkl::checks::CheckReport& r) {
    char secs[32];
    std::snprintf(secs, sizeof secs, "  (%.1f s)", r.seconds);
    writer().out(std::string(r.pass ? "  ok   " : "  FAIL ") + r.id + "  " + r.summary + secs);
    rkl::report::write_json(dir_ / ("check_" + file_stem(r.id) + ".json"), rkl::report::to_json(r, header(r.anchor)));
    summary_.add(r);
    ++total_;
    if (!r.pass) failures_.push_back(r.id);
  }

  void run_operators() {
    add_check(rkl::checks::resolvent_oracle(args_.wall, args_.wall_h));
    add_check(rkl::checks::subordination(args_.subordination_t));
    add_check(rkl::checks::split_identity());
    add_check(rkl::checks::heat_kernel());
    rkl::checks::MihlinConfig cfg;
    cfg.h = args_.mihlin_h;
    cfg.window_lo = args_.window_lo;
    cfg.window_hi = args_.window_hi;
    cfg.k_max = args_.k_max;
    cfg.max_variation = args_.max_variation;
    cfg.tol = args_.tol;
    cfg.weight_ids = args_.weights;
    const auto m = rkl::checks::mihlin_sweep(cfg);
    add_check(m.report);
    rkl::report::write_text(dir_ / "mihlin_series.csv", rkl::report::mihlin_csv(m, header(m.report.anchor)));
  }

  void write_plots() {
    for (auto fam : {KernelFamily::M0, KernelFamily::M1}) {
      for (int n = 0; n <= 2; ++n) {
        const std::string name = std::string("decay_") + rkl::kernels::family_name(fam) + "_n" + std::to_string(n);
        rkl::report::write_text(dir_ / (name + ".svg"), rkl::report::decay_plot(fam, n, header(name)));
      }
    }
  }

  void finish() {
    rkl::report::write_text(dir_ / "summary.csv", summary_.csv(header("summary")));
  }

  VerifyArgs args_;
  std::string hash_;
  fs::path dir_;
  rkl::report::SummaryTable summary_;
  std::vector<std::string> failures_;
  std::size_t total_ = 0;
};

void add_verify(CLI::App& app, VerifyArgs& a, std::function<void()>& action, int& status) {
  auto* verify = app.add_subcommand("verify", "Run a verification suite and write reports");
  verify->add_option("--config", "key=value file mirroring the flags; flags on the command line win");
  verify->add_option("--suite", a.suite, "bessel, kernels, estimates, operators or all")
      ->check(CLI::IsMember({"bessel", "kernels", "estimates", "operators", "all"}));
  verify->add_option("--out", a.out, "Output directory (default $RKL_OUT_DIR, else ./reports)");
  verify->add_option("--parallel", a.parallel, "Worker threads")->check(CLI::Range(1u, 256u));
  verify->add_option("--wall", a.wall, "Left end of the resolvent oracle grid")->check(CLI::Range(-200.0, -4.0));
  verify->add_option("--wall-h", a.wall_h, "Spacing of the resolvent oracle grid")->check(CLI::Range(1e-3, 0.1));
  verify->add_option("--subordination-t", a.subordination_t, "Truncation of the subordination integral")
      ->check(CLI::Range(10.0, 1e6));
  verify->add_option("--mihlin-h", a.mihlin_h, "Node spacing of the multiplier sweep")->check(CLI::Range(1.0 / 64, 0.5));
  verify->add_option("--window-lo", a.window_lo, "Left end of the sweep window")->check(CLI::Range(-64.0, -1.0));
  verify->add_option("--window-hi", a.window_hi, "Right end of the sweep window")->check(CLI::Range(1.0, 16.0));
  verify->add_option("--k-max", a.k_max, "Sweep xi = e^{k/2} for |k| <= k-max")->check(CLI::Range(0, 16));
  verify->add_option("--max-variation", a.max_variation, "Allowed relative norm variation")
      ->check(CLI::Range(1e-6, 10.0));
  verify->add_option("--tol", a.tol, "Integrated-kernel tolerance")->check(CLI::Range(1e-12, 1e-3));
  verify->add_option("--weights", a.weights, "Weight ids, e.g. power:a=0.3:center=0 (default: registered family)")
      ->delimiter(',')
      ->check([](const std::string& id) -> std::string {
        try {
          rkl::weights::parse_id(id);
          return {};
        } catch (const std::exception& e) {
          return e.what();
        }
      });
  verify->add_flag("--plots,!--no-plots", a.plots, "Write SVG decay plots");
  verify->callback([&] {
    action = [&a, &status] {
      if (a.window_lo >= a.window_hi) throw UsageError("--window-lo must be below --window-hi");
      status = VerifyRun(a).run();
    };
  });
}

/// Splices `key=value` lines from the --config file in front of the verify
/// flags, skipping keys that the command line sets itself.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  auto verify_at = std::find(args.begin(), args.end(), "verify");
  if (verify_at == args.end()) return args;
  std::string path;
  std::vector<std::string> given;
  for (auto it = verify_at + 1; it != args.end(); ++it) {
    if (it->rfind("--", 0) != 0) continue;
    const auto eq = it->find('=');
    const std::string flag = it->substr(0, eq);
    if (flag == "--config") {
      if (eq != std::string::npos) {
        path = it->substr(eq + 1);
      } else if (it + 1 != args.end()) {
        path = *(it + 1);
      }
    }
    given.push_back(flag);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  std::vector<std::string> from_file;
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    line = line.substr(first, line.find_last_not_of(" \t\r") + 1 - first);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(number) + ": expected key=value");
    }
    std::string key = line.substr(0, line.find_last_not_of(" \t", eq - 1) + 1);
    std::string value = line.substr(std::min(line.find_first_not_of(" \t", eq + 1), line.size()));
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "config") throw UsageError(path + ": config files do not nest");
    const std::string flag = "--" + key;
    if (std::find(given.begin(), given.end(), flag) != given.end()) continue;
    from_file.push_back(flag + "=" + value);
  }
  std::vector<std::string> out(args.begin(), verify_at + 1);
  out.insert(out.end(), from_file.begin(), from_file.end());
  out.insert(out.end(), verify_at + 1, args.end());
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resolvent-kernel verification toolkit"};
  app.require_subcommand(1);
  EvalArgs eval_args;
  VerifyArgs verify_args;
  std::function<void()> action;
  int status = kExitOk;
  add_eval(app, eval_args, action);
  add_verify(app, verify_args, action, status);

  std::vector<std::string> args;
  try {
    args = expand_config(std::vector<std::string>(argv, argv + argc));
  } catch (const UsageError& e) {
    writer().err(std::string("error: ") + e.what());
    return kExitUsage;
  }
  std::vector<char*> arg_ptrs;
  for (auto& a : args) arg_ptrs.push_back(a.data());
  try {
    app.parse(static_cast<int>(arg_ptrs.size()), arg_ptrs.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  try {
    if (action) action();
  } catch (const UsageError& e) {
    writer().err(std::string("error: ") + e.what());
    return kExitUsage;
  } catch (const rkl::DomainError& e) {
    writer().err(std::string("error: ") + e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    writer().err(std::string("numerical failure: ") + e.what());
    return kExitFailure;
  }
  return status;
}
