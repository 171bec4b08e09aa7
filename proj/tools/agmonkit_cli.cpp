// Command-line front end: solve, agmon, verify, construct-example, run, sweep, report.
//
// Exit codes: 0 when every verdict passes, 2 when a verdict fails, 1 on error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include <CLI11.hpp>

#include "agmonkit/agmon.hpp"
#include "agmonkit/error.hpp"
#include "agmonkit/field_io.hpp"
#include "agmonkit/scenario.hpp"

namespace fs = std::filesystem;
using namespace agmonkit;

namespace {

constexpr int kOk = 0;
constexpr int kError = 1;
constexpr int kVerdictFailed = 2;

fs::path out_dir(const Scenario& s, const std::string& flag) {
  return flag.empty() ? fs::path(s.output) : fs::path(flag);
}

void write_file(const fs::path& p, auto&& writer) {
  fs::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  if (!os) throw Error("cannot write " + p.string());
  writer(os);
}

GridField read_field(const fs::path& p, std::map<std::string, std::string>* extra = nullptr) {
  std::ifstream is(p);
  if (!is) throw Error("cannot open " + p.string());
  return read_field_csv(is, extra);
}

double header_number(const std::map<std::string, std::string>& h, const std::string& key,
                     const fs::path& p) {
  const auto it = h.find(key);
  if (it == h.end()) throw InvalidArgument(p.string() + ": header lacks '" + key + "'");
  return std::stod(it->second);
}

void print_verdicts(const DecayReport& r) {
  std::size_t width = 0;
  for (const auto& [k, v] : r.verdicts) width = std::max(width, k.size());
  for (const auto& [k, v] : r.verdicts) {
    std::printf("  %-*s  %s\n", static_cast<int>(width), k.c_str(), v ? "pass" : "FAIL");
  }
}

int verdict_code(const DecayReport& r) { return r.all_pass() ? kOk : kVerdictFailed; }

void write_report_files(const fs::path& out, const DecayReport& r) {
  write_file(out / "report.json", [&](std::ostream& os) { write_report_json(os, r.to_json()); });
  write_file(out / "constants.csv", [&](std::ostream& os) { write_constants_csv(os, r); });
}

int cmd_solve(const std::string& config, const std::string& out_flag) {
  const Scenario s = load_scenario(config);
  const auto bp = build_potential(s);
  const GridField v = sample(bp.spec, s.grid);
  const auto pairs = solve_scenario(s, v);
  const fs::path out = out_dir(s, out_flag);
  write_file(out / "fields" / "V.csv", [&](std::ostream& os) { write_field_csv(os, v); });
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& p = pairs[k];
    write_file(out / "fields" / ("psi_" + std::to_string(k) + ".csv"), [&](std::ostream& os) {
      write_field_csv(os, p.psi, {{"E", format_double(p.E)}, {"residual", format_double(p.residual)}});
    });
    std::printf("E_%zu = %s  residual = %s  iterations = %d\n", k, format_double(p.E).c_str(),
                format_double(p.residual).c_str(), p.iterations);
  }
  return kOk;
}

int cmd_agmon(const std::string& config, const std::string& out_flag, std::optional<double> energy,
              const std::string& method) {
  Scenario s = load_scenario(config);
  if (method == "quadrature") s.agmon = AgmonChoice::quadrature;
  else if (method == "fast_marching") s.agmon = AgmonChoice::fast_marching;
  else if (method != "auto") throw InvalidArgument("--method must be auto, quadrature or fast_marching");
  const auto bp = build_potential(s);
  const GridField v = sample(bp.spec, s.grid);
  double E = 0.0;
  if (energy) {
    E = *energy;
  } else {
    E = solve_scenario(s, v).at(static_cast<std::size_t>(s.eigen_index)).E;
  }
  const AgmonField rho = agmon_for(s, v, E);
  const fs::path out = out_dir(s, out_flag);
  write_file(out / "fields" / "rho.csv", [&](std::ostream& os) {
    write_field_csv(os, rho.rho, {{"method", method_name(rho.method)}, {"E", format_double(E)}});
  });
  write_file(out / "plots" / "rho.dat",
             [&](std::ostream& os) { write_plot_dat(os, rho.rho, "rho_E, E = " + format_double(E)); });
  std::printf("E = %s  method = %s  origin snap = %s\n", format_double(E).c_str(),
              method_name(rho.method).c_str(), format_double(rho.snap_distance).c_str());
  std::printf("eikonal violation = %s\n", format_double(check_eikonal(rho, v, E)).c_str());
  return kOk;
}

int cmd_verify(const std::string& config, const std::string& out_flag, const std::string& fields,
               double tol_scale) {
  const Scenario s = load_scenario(config);
  const auto bp = build_potential(s);
  GridField v;
  std::vector<EigenPair> pairs;
  AgmonField rho;
  if (fields.empty()) {
    v = sample(bp.spec, s.grid);
    pairs = solve_scenario(s, v);
    rho = agmon_for(s, v, pairs.at(static_cast<std::size_t>(s.eigen_index)).E);
  } else {
    const fs::path dir(fields);
    v = read_field(dir / "V.csv");
    for (int k = 0; k < s.eigen_k; ++k) {
      const fs::path p = dir / ("psi_" + std::to_string(k) + ".csv");
      std::map<std::string, std::string> h;
      EigenPair pair;
      pair.psi = read_field(p, &h);
      pair.E = header_number(h, "E", p);
      pair.residual = header_number(h, "residual", p);
      pairs.push_back(std::move(pair));
    }
    const fs::path rp = dir / "rho.csv";
    std::map<std::string, std::string> h;
    rho.rho = read_field(rp, &h);
    rho.E = header_number(h, "E", rp);
    rho.method = h["method"] == "fast_marching" ? AgmonMethod::fast_marching : AgmonMethod::quadrature_1d;
    rho.source = origin_node(rho.rho.grid());
    rho.snap_distance = std::hypot(rho.rho.grid().point(rho.source).x, rho.rho.grid().point(rho.source).y);
  }
  const DecayReport r = verify_scenario(s, v, pairs, rho, bp.spiky, tol_scale);
  write_report_files(out_dir(s, out_flag), r);
  std::printf("scenario %s\n", s.id.c_str());
  print_verdicts(r);
  return verdict_code(r);
}

int cmd_construct(const std::string& config, const std::string& out_flag) {
  const Scenario s = load_scenario(config);
  const auto bp = build_potential(s);
  if (!bp.spiky) throw InvalidArgument("construct-example needs a spiky potential");
  const fs::path out = out_dir(s, out_flag);
  const GridField v = sample(bp.spec, s.grid);
  write_file(out / "spiky.json", [&](std::ostream& os) { write_report_json(os, spiky_to_json(*bp.spiky)); });
  write_file(out / "fields" / "V.csv", [&](std::ostream& os) { write_field_csv(os, v); });
  write_file(out / "plots" / "V.dat", [&](std::ostream& os) { write_plot_dat(os, v, "V = V0 + V1"); });
  const auto& sp = *bp.spiky;
  std::printf("E0 = %s  R = %s  floor = %s  kept %zu of %zu spikes\n", format_double(sp.E0).c_str(),
              format_double(sp.R).c_str(), format_double(sp.floor).c_str(), sp.centers.size(),
              sp.requested);
  for (std::size_t k = 0; k < sp.centers.size(); ++k) {
    std::printf("  j=%zu  c=%s  l=%s\n", k + 1, format_double(sp.centers[k]).c_str(),
                format_double(sp.widths[k]).c_str());
  }
  std::printf("dropped tail bound = %s\n", format_double(sp.dropped_tail_bound).c_str());
  return kOk;
}

int cmd_run(const std::string& config, const std::string& out_flag, double tol_scale) {
  const Scenario s = load_scenario(config);
  RunOptions ro;
  if (!out_flag.empty()) ro.out = out_flag;
  ro.tol_scale = tol_scale;
  const auto res = run_scenario(s, ro);
  std::printf("scenario %s  E = %s\n", s.id.c_str(), format_double(res.pair.E).c_str());
  print_verdicts(res.report);
  return verdict_code(res.report);
}

int cmd_sweep(const std::string& path, const std::string& out_flag, int threads, double tol_scale) {
  const fs::path p(path);
  const SweepPlan plan = parse_sweep(load_json(p), p.parent_path());
  const std::string out = out_flag.empty() ? "out/" + plan.id : out_flag;
  const auto rows = run_sweep(plan, out, threads, tol_scale);
  int code = kOk;
  for (const auto& row : rows) {
    std::printf("%-40s %s%s%s\n", row.id.c_str(), row.status.c_str(), row.message.empty() ? "" : ": ",
                row.message.c_str());
    if (row.status == "error") code = kError;
    else if (row.status != "ok" && code == kOk) code = kVerdictFailed;
  }
  return code;
}

int cmd_report(const std::string& path) {
  fs::path p(path);
  if (fs::is_directory(p)) p /= "report.json";
  const Json j = load_json(p);
  int code = kOk;
  auto one = [&](const Json& r) {
    if (r.value("status", std::string()) == "error") {
      std::printf("scenario %s: error: %s\n", r.value("id", std::string()).c_str(),
                  r.value("message", std::string()).c_str());
      code = kError;
      return;
    }
    const DecayReport rep = DecayReport::from_json(r);
    std::printf("scenario %s\n", rep.id.c_str());
    for (const char* k : {"E", "S", "weighted_l2", "c_eps_delta", "theorem2_total_bound", "C_eps_envelope"}) {
      const double v = rep.constant(k);
      if (!std::isnan(v)) std::printf("  %-22s %s\n", k, format_double(v).c_str());
    }
    print_verdicts(rep);
    if (!rep.all_pass() && code == kOk) code = kVerdictFailed;
  };
  if (j.contains("scenarios")) {
    for (const auto& r : j.at("scenarios")) one(r);
  } else {
    one(j);
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Agmon distance fields, Schrodinger eigenpairs and weighted decay checks"};
  app.require_subcommand(1);

  std::string config, out, fields, method = "auto";
  double tol_scale = 1.0;
  std::optional<double> energy;
  const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  int threads = hw;

  auto* solve = app.add_subcommand("solve", "lowest eigenpairs of -Delta + V");
  solve->add_option("config", config, "scenario JSON")->required()->check(CLI::ExistingFile);
  solve->add_option("--out", out, "output directory");

  auto* agmon = app.add_subcommand("agmon", "Agmon distance rho_E to the origin");
  agmon->add_option("config", config, "scenario JSON")->required()->check(CLI::ExistingFile);
  agmon->add_option("--out", out, "output directory");
  agmon->add_option("--E", energy, "energy (default: the scenario eigenvalue)");
  agmon->add_option("--method", method, "auto, quadrature or fast_marching");

  auto* verify = app.add_subcommand("verify", "run the verification suite");
  verify->add_option("config", config, "scenario JSON")->required()->check(CLI::ExistingFile);
  verify->add_option("--out", out, "output directory");
  verify->add_option("--fields", fields, "directory with V.csv, psi_<k>.csv and rho.csv")
      ->check(CLI::ExistingDirectory);
  verify->add_option("--tol-scale", tol_scale, "multiplier on the inequality slack");

  auto* construct = app.add_subcommand("construct-example", "build the spiky potential");
  construct->add_option("config", config, "scenario JSON")->required()->check(CLI::ExistingFile);
  construct->add_option("--out", out, "output directory");

  auto* run = app.add_subcommand("run", "full pipeline with report and plot data");
  run->add_option("config", config, "scenario JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "output directory");
  run->add_option("--tol-scale", tol_scale, "multiplier on the inequality slack");

  auto* sweep = app.add_subcommand("sweep", "run a list or grid of scenarios");
  sweep->add_option("config", config, "sweep JSON")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", out, "output directory");
  sweep->add_option("--threads", threads, "concurrent scenarios")->check(CLI::PositiveNumber);
  sweep->add_option("--tol-scale", tol_scale, "multiplier on the inequality slack");

  auto* report = app.add_subcommand("report", "summarize a report.json");
  report->add_option("path", config, "report.json or its directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kError;
  }
  if (!(tol_scale > 0.0)) {
    std::fprintf(stderr, "error: --tol-scale must be > 0\n");
    return kError;
  }

  try {
    if (*solve) return cmd_solve(config, out);
    if (*agmon) return cmd_agmon(config, out, energy, method);
    if (*verify) return cmd_verify(config, out, fields, tol_scale);
    if (*construct) return cmd_construct(config, out);
    if (*run) return cmd_run(config, out, tol_scale);
    if (*sweep) return cmd_sweep(config, out, threads, tol_scale);
    if (*report) return cmd_report(config);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kError;
  }
  return kError;
}
