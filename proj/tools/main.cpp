// hardyrand command-line front end: parameter sweeps, single-point
// certification, classical baselines, qubit strategy search, and the
// acceptance checklist. CSV/JSON field layouts are documented in the
// README and kept byte-stable across runs.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <algorithm>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hardyrand/bell.hpp"
#include "hardyrand/lhv.hpp"
#include "hardyrand/npa.hpp"
#include "hardyrand/protocols.hpp"
#include "hardyrand/qubit.hpp"
#include "hardyrand/sdp.hpp"
#include "hardyrand/verify.hpp"

namespace {

using namespace hardyrand;
using protocols::CertificationResult;
using protocols::Family;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitSolverFailure = 3;
constexpr int kExitNoFeasiblePoint = 4;

// Fixed 9-significant-digit formatting keeps outputs diffable.
std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string status_word(sdp::Status s) {
  switch (s) {
    case sdp::Status::Optimal: return "ok";
    case sdp::Status::Infeasible: return "infeasible";
    case sdp::Status::SolverFailure: return "solver_failure";
  }
  return "?";
}

struct Output {
  std::string path;  // empty = stdout

  bool write(const std::string& text) const {
    if (path.empty()) {
      std::fputs(text.c_str(), stdout);
      return true;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
      std::fprintf(stderr, "error: cannot open %s for writing\n", path.c_str());
      return false;
    }
    out << text;
    return true;
  }
};

std::string csv_rows(const std::vector<double>& grid, const std::vector<CertificationResult>& rows,
                     npa::Level level) {
  std::ostringstream os;
  os << "param,p_guess,h_min,lhv,qubit_lower,status,gap,level\n";
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    os << num(grid[i]) << ',' << num(r.p_guess) << ',' << num(r.h_min) << ','
       << (r.lhv_baseline ? num(*r.lhv_baseline) : "infeasible") << ',' << num(r.qubit_lower)
       << ',' << status_word(r.status) << ',' << num(r.gap) << ',' << npa::to_string(level)
       << '\n';
  }
  return os.str();
}

std::string result_json(const std::string& param_text, const CertificationResult& r,
                        npa::Level level) {
  std::ostringstream os;
  os << "{\n";
  os << "  \"param\": " << param_text << ",\n";
  os << "  \"p_guess\": " << num(r.p_guess) << ",\n";
  os << "  \"h_min\": " << num(r.h_min) << ",\n";
  os << "  \"lhv\": " << (r.lhv_baseline ? num(*r.lhv_baseline) : "\"infeasible\"") << ",\n";
  os << "  \"qubit_lower\": " << num(r.qubit_lower) << ",\n";
  os << "  \"status\": \"" << status_word(r.status) << "\",\n";
  os << "  \"gap\": " << num(r.gap) << ",\n";
  os << "  \"level\": \"" << npa::to_string(level) << "\",\n";
  os << "  \"per_outcome\": [" << num(r.per_outcome[0]) << ", " << num(r.per_outcome[1]) << ", "
     << num(r.per_outcome[2]) << ", " << num(r.per_outcome[3]) << "]\n";
  os << "}\n";
  return os.str();
}

const char* param_label(Family f) {
  switch (f) {
    case Family::hardy: return "p_hardy";
    case Family::noisy_hardy: return "epsilon";
    case Family::cabello: return "p_cabello";
    case Family::dw_cabello: return "p_cabello";
    case Family::chsh: return "S";
  }
  return "param";
}

// Minimal SVG line plot: polyline, axes, ticks. No external renderer.
std::string svg_plot(const std::vector<double>& xs, const std::vector<double>& ys,
                     const std::string& xlabel, const std::string& title) {
  const int width = 640, height = 440;
  const double ml = 70, mr = 20, mt = 40, mb = 55;
  double xmin = 1e300, xmax = -1e300, ymin = 0.0, ymax = -1e300;
  std::vector<std::pair<double, double>> pts;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(ys[i])) continue;
    pts.push_back({xs[i], ys[i]});
    xmin = std::min(xmin, xs[i]);
    xmax = std::max(xmax, xs[i]);
    ymax = std::max(ymax, ys[i]);
  }
  if (pts.empty() || xmax <= xmin) {
    xmin = 0;
    xmax = 1;
  }
  if (ymax <= ymin) ymax = ymin + 1;
  ymax *= 1.05;

  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr); };
  auto py = [&](double y) { return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb); };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
     << title << "</text>\n";
  // axes
  os << "<line x1=\"" << ml << "\" y1=\"" << (height - mb) << "\" x2=\"" << (width - mr)
     << "\" y2=\"" << (height - mb) << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << (height - mb) << "\" x2=\"" << ml << "\" y2=\"" << mt
     << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double x = xmin + (xmax - xmin) * t / 5;
    const double y = ymin + (ymax - ymin) * t / 5;
    os << "<line x1=\"" << px(x) << "\" y1=\"" << (height - mb) << "\" x2=\"" << px(x) << "\" y2=\""
       << (height - mb + 5) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << px(x) << "\" y=\"" << (height - mb + 20)
       << "\" text-anchor=\"middle\" font-size=\"11\">" << num(x) << "</text>\n";
    os << "<line x1=\"" << (ml - 5) << "\" y1=\"" << py(y) << "\" x2=\"" << ml << "\" y2=\""
       << py(y) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << (ml - 8) << "\" y=\"" << (py(y) + 4)
       << "\" text-anchor=\"end\" font-size=\"11\">" << num(y) << "</text>\n";
  }
  os << "<text x=\"" << (ml + (width - ml - mr) / 2) << "\" y=\"" << (height - 12)
     << "\" text-anchor=\"middle\" font-size=\"13\">" << xlabel << "</text>\n";
  os << "<text x=\"18\" y=\"" << (mt + (height - mt - mb) / 2)
     << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
     << (mt + (height - mt - mb) / 2) << ")\">h_min (bits)</text>\n";
  os << "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.8\" points=\"";
  for (const auto& [x, y] : pts) os << px(x) << ',' << py(y) << ' ';
  os << "\"/>\n</svg>\n";
  return os.str();
}

std::optional<bell::Behavior> load_behavior(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::fprintf(stderr, "error: cannot read %s\n", path.c_str());
    return std::nullopt;
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s: %s\n", path.c_str(), e.what());
    return std::nullopt;
  }
  if (!j.contains("p")) {
    std::fprintf(stderr, "error: %s: missing \"p\" field\n", path.c_str());
    return std::nullopt;
  }
  std::vector<double> flat;
  try {
    for (const auto& item : j["p"]) {
      if (item.is_array()) {
        for (const auto& v : item) flat.push_back(v.get<double>());
      } else {
        flat.push_back(item.get<double>());
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s: %s\n", path.c_str(), e.what());
    return std::nullopt;
  }
  if (flat.size() != 16) {
    std::fprintf(stderr, "error: %s: expected 16 probabilities, got %zu\n", path.c_str(),
                 flat.size());
    return std::nullopt;
  }
  bell::Behavior b;
  for (int i = 0; i < 16; ++i) b.p[i] = flat[i];
  return b;
}

struct CommonFlags {
  std::string family = "hardy";
  std::string level = "1ab";
  double gap_tol = 1e-7;
  uint64_t seed = 1;
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  int restarts = 64;
  std::string out;
};

std::string config_help_sink;  // --config is handled before CLI11 parsing

void add_common(CLI::App* cmd, CommonFlags& f, bool with_family = true) {
  cmd->add_option("--config", config_help_sink, "Flat key=value config file; flags override");
  if (with_family)
    cmd->add_option("--family", f.family,
                    "Protocol family: hardy, noisy-hardy, cabello, dw-cabello, chsh");
  cmd->add_option("--level", f.level, "Relaxation level: 1ab or 2")
      ->check(CLI::IsMember({"1ab", "2"}));
  cmd->add_option("--gap-tol", f.gap_tol, "Solver duality-gap tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", f.seed, "Seed for the qubit search");
  cmd->add_option("--workers", f.workers, "Worker pool size")->check(CLI::PositiveNumber);
  cmd->add_option("--restarts", f.restarts, "Qubit search restarts")->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out, "Output path (default stdout)");
}

sdp::SolveOptions solve_options(const CommonFlags& f) {
  sdp::SolveOptions s;
  s.gap_tol = f.gap_tol;
  return s;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Flat key=value config: supplies any flag absent from the command line.
// Returns false on an unreadable file.
bool apply_config(std::vector<std::string>& args) {
  std::string path;
  for (size_t i = 0; i < args.size();) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + i, args.begin() + i + 2);
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + i);
    } else {
      ++i;
    }
  }
  if (path.empty()) return true;
  std::ifstream in(path);
  if (!in) {
    std::fprintf(stderr, "error: cannot read config file %s\n", path.c_str());
    return false;
  }
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string flag = "--" + key;
    bool present = false;
    for (const auto& a : args)
      if (a == flag || a.rfind(flag + "=", 0) == 0) present = true;
    if (present) continue;
    // The single-token form works for flags and options alike.
    args.push_back(value.empty() ? flag : flag + "=" + value);
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Randomness certification from non-inequality non-locality paradoxes"};
  app.require_subcommand(1);

  // --- sweep ---
  CommonFlags sweep_flags;
  double sweep_min = 0.0, sweep_max = 0.0;
  int sweep_points = 1;
  std::string sweep_plot;
  bool sweep_no_qubit = false;
  auto* sweep_cmd = app.add_subcommand("sweep", "Certify over a parameter grid, emit CSV");
  add_common(sweep_cmd, sweep_flags);
  sweep_cmd->add_option("--min", sweep_min, "Grid minimum")->required();
  sweep_cmd->add_option("--max", sweep_max, "Grid maximum")->required();
  sweep_cmd->add_option("--points", sweep_points, "Grid size")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--plot", sweep_plot, "Also write an SVG line plot here");
  sweep_cmd->add_flag("--no-qubit", sweep_no_qubit, "Skip the qubit lower-bound search");

  // --- bound ---
  CommonFlags bound_flags;
  double bound_param = 0.0;
  bool bound_has_param = false;
  std::string bound_behavior;
  auto* bound_cmd = app.add_subcommand("bound", "Certify a single point, emit JSON");
  add_common(bound_cmd, bound_flags);
  auto* popt = bound_cmd->add_option("--param", bound_param, "Protocol parameter");
  bound_cmd->add_option("--behavior", bound_behavior,
                        "JSON file with {\"p\": [16 probabilities]}; certifies the full table");

  // --- lhv ---
  CommonFlags lhv_flags;
  double lhv_param = 0.0;
  double lhv_min = 0.0, lhv_max = 0.0;
  int lhv_points = 0;
  auto* lhv_cmd = app.add_subcommand("lhv", "Classical (local polytope) optimum of the family");
  add_common(lhv_cmd, lhv_flags);
  lhv_cmd->add_option("--param", lhv_param, "Family parameter (epsilon for noisy-hardy)");
  lhv_cmd->add_option("--min", lhv_min, "Grid minimum");
  lhv_cmd->add_option("--max", lhv_max, "Grid maximum");
  lhv_cmd->add_option("--points", lhv_points, "Grid size (emits CSV when > 0)");

  // --- qubit-opt ---
  CommonFlags qopt_flags;
  double qopt_param = 0.0;
  auto* qopt_cmd = app.add_subcommand("qubit-opt", "Two-qubit achievability search, emit JSON");
  add_common(qopt_cmd, qopt_flags);
  qopt_cmd->add_option("--param", qopt_param, "Family parameter (epsilon for noisy-hardy)");

  // --- verify ---
  CommonFlags verify_flags;
  auto* verify_cmd = app.add_subcommand("verify", "Run the acceptance checklist");
  add_common(verify_cmd, verify_flags, false);

  std::vector<std::string> args(argv + 1, argv + argc);
  if (!apply_config(args)) return kExitUsage;
  std::reverse(args.begin(), args.end());  // CLI11's vector parse wants reversed order
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (sweep_cmd->parsed()) {
      const CommonFlags& f = sweep_flags;
      if (sweep_points < 1 || sweep_min > sweep_max) {
        std::fprintf(stderr, "error: need points >= 1 and min <= max\n");
        return kExitUsage;
      }
      const Family family = protocols::family_from_string(f.family);
      const npa::Level level = npa::level_from_string(f.level);
      std::vector<double> grid;
      for (int i = 0; i < sweep_points; ++i)
        grid.push_back(sweep_points == 1
                           ? sweep_min
                           : sweep_min + (sweep_max - sweep_min) * i / (sweep_points - 1));
      protocols::CertifyOptions opts;
      opts.solve = solve_options(f);
      opts.with_qubit = !sweep_no_qubit;
      opts.qubit_restarts = f.restarts;
      opts.seed = f.seed;
      opts.workers = f.workers;
      const auto rows = protocols::sweep(family, grid, level, opts);
      if (!Output{f.out}.write(csv_rows(grid, rows, level))) return kExitUsage;
      if (!sweep_plot.empty()) {
        std::vector<double> hs;
        for (const auto& r : rows) hs.push_back(r.h_min);
        const std::string title = std::string("min-entropy vs ") + param_label(family) + " (" +
                                  protocols::to_string(family) + ")";
        if (!Output{sweep_plot}.write(svg_plot(grid, hs, param_label(family), title)))
          return kExitUsage;
      }
      bool any_ok = false, any_fail = false;
      for (const auto& r : rows) {
        any_ok = any_ok || r.status == sdp::Status::Optimal;
        any_fail = any_fail || r.status == sdp::Status::SolverFailure;
      }
      if (!any_ok) return kExitInfeasible;
      if (any_fail) return kExitSolverFailure;
      return kExitOk;
    }

    if (bound_cmd->parsed()) {
      const CommonFlags& f = bound_flags;
      const npa::Level level = npa::level_from_string(f.level);
      protocols::CertifyOptions opts;
      opts.solve = solve_options(f);
      opts.qubit_restarts = f.restarts;
      opts.seed = f.seed;
      opts.workers = f.workers;

      CertificationResult res;
      std::string param_text;
      bound_has_param = popt->count() > 0;
      if (!bound_behavior.empty()) {
        auto b = load_behavior(bound_behavior);
        if (!b) return kExitUsage;
        const auto report = bell::validate(*b);
        if (!report.empty()) {
          std::fprintf(stderr, "error: behavior invalid: %s (magnitude %.3g)\n",
                       report.front().what.c_str(), report.front().magnitude);
          return kExitUsage;
        }
        res = protocols::certify_behavior(*b, level, opts);
        param_text = "null";
      } else if (bound_has_param) {
        const Family family = protocols::family_from_string(f.family);
        const auto spec = protocols::build(family, bound_param, level, opts.solve);
        res = protocols::certify(spec, level, opts);
        param_text = num(bound_param);
      } else {
        std::fprintf(stderr, "error: bound needs --param or --behavior\n");
        return kExitUsage;
      }
      if (!Output{f.out}.write(result_json(param_text, res, level))) return kExitUsage;
      if (res.status == sdp::Status::Infeasible) return kExitInfeasible;
      if (res.status == sdp::Status::SolverFailure) {
        if (!res.note.empty()) std::fprintf(stderr, "%s\n", res.note.c_str());
        return kExitSolverFailure;
      }
      return kExitOk;
    }

    if (lhv_cmd->parsed()) {
      const CommonFlags& f = lhv_flags;
      const Family family = protocols::family_from_string(f.family);
      const auto solve = solve_options(f);
      if (lhv_points > 0) {
        std::ostringstream os;
        os << "param,lhv,status\n";
        bool any_ok = false;
        for (int i = 0; i < lhv_points; ++i) {
          const double p = lhv_points == 1
                               ? lhv_min
                               : lhv_min + (lhv_max - lhv_min) * i / (lhv_points - 1);
          const auto r = protocols::lhv_baseline(family, p, solve);
          os << num(p) << ',' << num(r.value) << ',' << status_word(r.status) << '\n';
          any_ok = any_ok || r.status == sdp::Status::Optimal;
        }
        if (!Output{f.out}.write(os.str())) return kExitUsage;
        return any_ok ? kExitOk : kExitInfeasible;
      }
      const auto r = protocols::lhv_baseline(family, lhv_param, solve);
      std::ostringstream os;
      os << "{\n  \"family\": \"" << protocols::to_string(family) << "\",\n";
      os << "  \"param\": " << num(lhv_param) << ",\n";
      os << "  \"value\": " << num(r.value) << ",\n";
      os << "  \"status\": \"" << status_word(r.status) << "\",\n";
      os << "  \"weights\": [";
      for (int i = 0; i < 16; ++i) os << (i ? ", " : "") << num(r.model.weights[i]);
      os << "]\n}\n";
      if (!Output{f.out}.write(os.str())) return kExitUsage;
      if (r.status == sdp::Status::Infeasible) return kExitInfeasible;
      if (r.status == sdp::Status::SolverFailure) return kExitSolverFailure;
      return kExitOk;
    }

    if (qopt_cmd->parsed()) {
      const CommonFlags& f = qopt_flags;
      const Family family = protocols::family_from_string(f.family);
      qubit::OptimizeResult res;
      try {
        res = protocols::qubit_optimize(family, qopt_param, f.restarts, f.seed, f.workers);
      } catch (const qubit::NoFeasiblePoint& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return kExitNoFeasiblePoint;
      }
      std::ostringstream os;
      os << "{\n  \"family\": \"" << protocols::to_string(family) << "\",\n";
      os << "  \"param\": " << num(qopt_param) << ",\n";
      os << "  \"value\": " << num(res.value) << ",\n";
      os << "  \"constraint_residual\": " << num(res.constraint_residual) << ",\n";
      os << "  \"restart_index\": " << res.restart_index << ",\n";
      os << "  \"seed\": " << f.seed << ",\n";
      os << "  \"strategy\": {\n    \"state\": [";
      for (int i = 0; i < 4; ++i)
        os << (i ? ", " : "") << '[' << num(res.strategy.state(i).real()) << ", "
           << num(res.strategy.state(i).imag()) << ']';
      os << "],\n    \"meas\": [";
      for (int i = 0; i < 4; ++i)
        os << (i ? ", " : "") << '[' << num(res.strategy.meas[i].theta) << ", "
           << num(res.strategy.meas[i].phi) << ']';
      os << "]\n  }\n}\n";
      if (!Output{f.out}.write(os.str())) return kExitUsage;
      return kExitOk;
    }

    if (verify_cmd->parsed()) {
      const CommonFlags& f = verify_flags;
      verify::VerifyOptions opts;
      opts.solve = solve_options(f);
      opts.seed = f.seed != 1 ? f.seed : opts.seed;
      opts.workers = f.workers;
      opts.qubit_restarts = f.restarts;
      opts.include_level2 = (f.level == "2");
      int failed = 0;
      const auto results = verify::run_checks(opts, [&](const verify::CheckResult& r) {
        std::printf("%s\n", verify::format_row(r).c_str());
        std::fflush(stdout);
      });
      for (const auto& r : results) failed += r.pass ? 0 : 1;
      std::printf("%zu checks, %d failed\n", results.size(), failed);
      return failed == 0 ? kExitOk : kExitSolverFailure;
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolverFailure;
  }
  return kExitUsage;
}
