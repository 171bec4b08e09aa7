#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "agmonkit/agmon.hpp"
#include "agmonkit/potential.hpp"
#include "agmonkit/report.hpp"
#include "agmonkit/spectral.hpp"
#include "agmonkit/weights.hpp"

namespace agmonkit {

enum class Track { H2, H3, both };
enum class AgmonChoice { automatic, quadrature, fast_marching };

/// One configured pipeline run. Built from JSON by parse_scenario; the
/// original document is kept verbatim for the report.
struct Scenario {
  std::string id;
  Json config;
  Grid grid;
  Json potential;
  Weight weight = Weight::power(1.0);
  /// Weight used to size spikes; defaults to `weight`.
  std::optional<Weight> construction_weight;
  double epsilon = 0.5;
  /// Empty means "auto": half the gap between the spiky level E0 and E.
  std::optional<double> delta;
  std::vector<double> alphas{1.0, 0.1, 0.01, 0.001};
  /// Cutoff radius for the Lemma 2 and Theorem 2 checks; empty means auto.
  std::optional<double> cutoff_R;
  double lemma2_alpha = 0.1;
  double lemma2_tol = 5e-3;
  Track track = Track::H2;
  int eigen_k = 1;
  int eigen_index = 0;
  double eigen_tol = 1e-9;
  AgmonChoice agmon = AgmonChoice::automatic;
  int ball_centers = 50;
  int shells = 8;
  /// Repeat the eikonal and Lemma 2 checks on the refined grid.
  bool refinement_study = false;
  std::string output;
};

Weight parse_weight(const Json& j);
PotentialSpec parse_potential(const Json& j);
std::string track_name(Track t);

/// Validates the document, including the track requirements: H2 needs
/// epsilon above max{0, 1 - M_phi^-2}; H3 needs phi'/phi -> 0.
Scenario parse_scenario(const Json& j);
Scenario load_scenario(const std::filesystem::path& path);
Json load_json(const std::filesystem::path& path);

struct BuiltPotential {
  PotentialSpec spec;
  std::optional<SpikySpec> spiky;
};

BuiltPotential build_potential(const Scenario& s);
/// The same scenario on the refined grid (n -> 2n - 1).
Scenario refined(const Scenario& s);

std::vector<EigenPair> solve_scenario(const Scenario& s, const GridField& v);
AgmonField agmon_for(const Scenario& s, const GridField& v, double E);

/// Every check on precomputed fields; pairs[s.eigen_index] is the pair under
/// study and rho must be its Agmon distance.
DecayReport verify_scenario(const Scenario& s, const GridField& v,
                            const std::vector<EigenPair>& pairs, const AgmonField& rho,
                            const std::optional<SpikySpec>& spiky, double tol_scale = 1.0);

struct ScenarioResult {
  DecayReport report;
  GridField V;
  std::vector<EigenPair> pairs;
  EigenPair pair;
  AgmonField rho;
  std::optional<SpikySpec> spiky;
};

struct RunOptions {
  /// Overrides the scenario's output directory.
  std::optional<std::string> out;
  double tol_scale = 1.0;
  bool write_artifacts = true;
};

/// Runs potential -> eigenpair -> rho -> checks and writes report.json,
/// constants.csv, fields/*.csv and plots/*.dat. On failure every file
/// created so far is removed and the error names the stage.
ScenarioResult run_scenario(const Scenario& s, const RunOptions& opt = {});

Json spiky_to_json(const SpikySpec& s);

struct SweepPlan {
  std::string id;
  std::vector<Scenario> scenarios;
};

/// {"scenarios": [path or object, ...], "grid": {"base": ..., "params": {...}}}.
/// Parameter keys are dotted paths into the base document; the grid is
/// expanded as a cartesian product in key order.
SweepPlan parse_sweep(const Json& j, const std::filesystem::path& base_dir);

/// Runs every scenario (concurrently with `threads` workers), writes each
/// into out/<id>/ and the combined report.json and constants.csv into out/.
std::vector<SweepRow> run_sweep(const SweepPlan& plan, const std::string& out, int threads,
                                double tol_scale);

}  // namespace agmonkit
