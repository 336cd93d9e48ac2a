#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "mtf/assembly.hpp"
#include "mtf/transmission.hpp"
#include "mtf/types.hpp"

namespace mtf::io {

/// Writes the whole file or throws IoError.
void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Binary dump: uint64 dimension, 8 ASCII role bytes (space padded), then
/// little-endian float64 (re, im) pairs in row-major order. A JSON sidecar
/// <path>.json describes the dof layout.
void write_matrix(const std::filesystem::path& path, const CMatrix& m, const std::string& role,
                  const assembly::MultiTraceDofMap& dofmap);

struct MatrixFile {
  CMatrix matrix;
  std::string role;
};

MatrixFile read_matrix(const std::filesystem::path& path);

nlohmann::json dof_layout_json(const assembly::MultiTraceDofMap& dofmap);

struct SolutionMeta {
  Complex alpha;
  std::vector<double> kappas;
  double h = 0.0;
  std::string geometry;
};

nlohmann::json solution_json(const transmission::SolveReport& report, const assembly::MultiTraceDofMap& dofmap,
                             const SolutionMeta& meta);

}  // namespace mtf::io
