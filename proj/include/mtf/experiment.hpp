#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "mtf/assembly.hpp"
#include "mtf/geometry.hpp"
#include "mtf/spectrum.hpp"
#include "mtf/transmission.hpp"

namespace mtf::experiment {

inline constexpr const char* kVersion = "1.0.0";

enum class Task { spectrum, identities, solve, convergence };

const char* to_string(Task t);

struct GeometrySpec {
  std::string id;  // fig1-circle-in-square | two-domain-circle | gap | custom
  double radius = 1.0;         // two-domain-circle
  std::vector<double> deltas;  // gap, one partition per value
  nlohmann::json partition;    // custom, inline partition document
};

struct ExperimentConfig {
  std::string name = "experiment";
  GeometrySpec geometry;
  std::vector<double> kappas;
  std::vector<Complex> alphas;
  std::vector<double> hs;
  std::vector<Task> tasks;
  std::string output_dir = "out";
  Vec2 incident_direction{1.0, 0.0};
  transmission::SolveOptions solver;
  std::string plot_style = "scatter";  // scatter | zoom
  std::uint64_t seed = 20240901;
  nlohmann::json source;  // the document the config was parsed from
};

/// Throws ValidationError on schema or range violations (delta <= 0,
/// empty task list, h <= 0, kappa count not matching the geometry).
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

std::vector<std::string> preset_names();
nlohmann::json preset_json(const std::string& name);

/// One partition of the experiment grid together with a short file tag.
struct Variant {
  std::string tag;
  geometry::PartitionConfig partition;
};

std::vector<Variant> variants(const ExperimentConfig& config);

/// Everything assembled for one (partition, h) grid point.
struct Problem {
  std::string geometry;
  double h = 0.0;
  geometry::SubdomainPartition partition;
  geometry::SkeletonMesh skeleton;
  std::vector<geometry::BoundaryMesh> meshes;
  assembly::MultiTraceDofMap dofmap;
  transmission::TransmissionPermutation p;
  CMatrix m;
  CMatrix b_a;
  CMatrix o_a;  // M^{-1} B_A
};

Problem build_problem(const geometry::PartitionConfig& partition, double h, int threads = 1);

struct Artifact {
  std::string task;
  std::string path;  // relative to the output directory
  std::string sha256;
};

struct RunManifest {
  nlohmann::json config;
  std::vector<Artifact> artifacts;
  std::vector<std::pair<std::string, double>> timings;  // task -> seconds
  std::string version = kVersion;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
};

/// Runs every task, writes artifacts and manifest.json into out_dir.
RunManifest run(const ExperimentConfig& config, const std::filesystem::path& out_dir, int parallel = 1);

/// Re-reads manifest.json in dir and recomputes every checksum. Returns the
/// paths whose checksum no longer matches.
std::vector<std::string> verify_manifest(const std::filesystem::path& dir);

/// One record per identity: name, status (pass | fail | not applicable |
/// info), residual per h, and the h-refinement ratio where applicable.
nlohmann::json run_identity_suite(const ExperimentConfig& config, int parallel = 1);

struct PlotPanel {
  std::string csv;    // path as it should appear in the script
  std::string title;
  std::array<Complex, 2> predicted{};
};

/// gnuplot script: one scatter panel per CSV, predicted points as crosses.
/// style "zoom" restricts each panel to the cluster around predicted[0].
/// Throws IoError if a CSV does not exist (checked relative to base_dir).
std::string emit_plot_script(const std::vector<PlotPanel>& panels, const std::string& style,
                             const std::filesystem::path& base_dir = {});

}  // namespace mtf::experiment
