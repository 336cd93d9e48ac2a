#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mtf/experiment.hpp"
#include "mtf/io.hpp"

namespace fs = std::filesystem;
namespace ex = mtf::experiment;
using nlohmann::json;

namespace {

void print_manifest(const ex::RunManifest& m, const fs::path& out) {
  std::cout << "wrote " << m.artifacts.size() << " artifacts to " << out.string() << "\n";
  for (const auto& [task, sec] : m.timings) {
    std::printf("  %-12s %8.2f s\n", task.c_str(), sec);
  }
}

int summarize_identities(const json& report) {
  int failures = 0;
  for (const auto& rec : report.at("identities")) {
    const auto status = rec.at("status").get<std::string>();
    std::printf("%-10s %-28s %s\n", rec.at("geometry").get<std::string>().c_str(),
                rec.at("name").get<std::string>().c_str(), status.c_str());
    failures += status == "fail";
  }
  return failures;
}

int run_command(const std::string& config_path, const std::string& out, int parallel) {
  const auto cfg = ex::load_config(config_path);
  const fs::path dir = out.empty() ? fs::path(config_path).parent_path() / cfg.output_dir : fs::path(out);
  print_manifest(ex::run(cfg, dir, parallel), dir);
  return 0;
}

int preset_command(const std::string& name, const std::string& out, int parallel, bool print) {
  const json doc = ex::preset_json(name);
  if (print) {
    std::cout << doc.dump(2) << "\n";
    return 0;
  }
  const auto cfg = ex::parse_config(doc);
  const fs::path dir = out.empty() ? fs::path(cfg.output_dir) : fs::path(out);
  print_manifest(ex::run(cfg, dir, parallel), dir);
  return 0;
}

// A manifest is checked against its artifacts; any other config runs the identity suite.
int verify_command(const std::string& path, int parallel) {
  json doc;
  try {
    doc = json::parse(mtf::io::read_text(path));
  } catch (const json::exception& e) {
    throw mtf::ValidationError("cannot parse " + path + ": " + e.what());
  }
  if (doc.contains("artifacts") && doc.contains("version")) {
    const auto bad = ex::verify_manifest(fs::path(path).parent_path());
    for (const auto& b : bad) {
      std::cout << "checksum mismatch: " << b << "\n";
    }
    std::cout << (bad.empty() ? "manifest ok\n" : "manifest damaged\n");
    return bad.empty() ? 0 : 1;
  }
  const auto cfg = ex::parse_config(doc, fs::path(path).parent_path());
  const json report = ex::run_identity_suite(cfg, parallel);
  const int failures = summarize_identities(report);
  const fs::path dir = fs::path(path).parent_path() / cfg.output_dir;
  fs::create_directories(dir);
  mtf::io::write_text(dir / "identities.json", report.dump(2) + "\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relaxed local multi-trace BEM experiments"};
  app.set_version_flag("--version", std::string(ex::kVersion));
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::string name;
  int parallel = 1;
  bool print = false;

  auto* run = app.add_subcommand("run", "run every task of an experiment config");
  run->add_option("config", config, "experiment config (JSON)")->required();
  run->add_option("--out", out, "output directory (default: the config's output entry)");
  run->add_option("--parallel", parallel, "grid points run concurrently")->check(CLI::PositiveNumber);

  auto* preset = app.add_subcommand("preset", "run a named figure preset");
  preset->add_option("name", name, "preset name")->required();
  preset->add_option("--out", out, "output directory");
  preset->add_option("--parallel", parallel, "grid points run concurrently")->check(CLI::PositiveNumber);
  preset->add_flag("--print", print, "print the preset config instead of running it");

  auto* verify = app.add_subcommand("verify", "identity suite for a config, or checksum check for a manifest");
  verify->add_option("config", config, "experiment config or manifest.json")->required();
  verify->add_option("--parallel", parallel, "grid points run concurrently")->check(CLI::PositiveNumber);

  auto* list = app.add_subcommand("presets", "list preset names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*run) return run_command(config, out, parallel);
    if (*preset) return preset_command(name, out, parallel, print);
    if (*verify) return verify_command(config, parallel);
    if (*list) {
      for (const auto& n : ex::preset_names()) {
        std::cout << n << "\n";
      }
      return 0;
    }
  } catch (const mtf::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const mtf::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const mtf::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 4;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
