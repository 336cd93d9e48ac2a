#include "mtf/io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include <openssl/evp.h>

namespace mtf::io {
namespace {

static_assert(std::endian::native == std::endian::little, "matrix dumps assume a little-endian host");

std::string hex(const unsigned char* data, unsigned int len) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += digits[data[i] >> 4];
    out += digits[data[i] & 0xf];
  }
  return out;
}

}  // namespace

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_file(const std::filesystem::path& path) {
  const std::string bytes = read_text(path);
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw IoError("sha256 failed for " + path.string());
  }
  return hex(digest, len);
}

nlohmann::json dof_layout_json(const assembly::MultiTraceDofMap& dofmap) {
  nlohmann::json j;
  j["dimension"] = dofmap.dimension;
  j["order"] = "per subdomain: Dirichlet coefficients, then Neumann coefficients";
  for (const auto& b : dofmap.blocks) {
    j["subdomains"].push_back({{"index", b.subdomain},
                               {"dirichlet", {b.dirichlet(0), b.size()}},
                               {"neumann", {b.neumann(0), b.size()}},
                               {"curves", b.curves},
                               {"curve_signs", b.curve_signs},
                               {"curve_offsets", b.curve_offset}});
  }
  return j;
}

void write_matrix(const std::filesystem::path& path, const CMatrix& m, const std::string& role,
                  const assembly::MultiTraceDofMap& dofmap) {
  if (role.size() > 8) {
    throw IoError("matrix role tag longer than 8 bytes: " + role);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  const std::uint64_t dim = static_cast<std::uint64_t>(m.rows());
  std::array<char, 8> tag;
  tag.fill(' ');
  std::memcpy(tag.data(), role.data(), role.size());
  out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
  out.write(tag.data(), tag.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v[2] = {m(i, j).real(), m(i, j).imag()};
      out.write(reinterpret_cast<const char*>(v), sizeof(v));
    }
  }
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
  nlohmann::json side = dof_layout_json(dofmap);
  side["role"] = role;
  side["format"] = "uint64 dim, 8-byte role tag, row-major little-endian float64 (re, im)";
  write_text(path.string() + ".json", side.dump(2) + "\n");
}

MatrixFile read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::uint64_t dim = 0;
  std::array<char, 8> tag{};
  in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
  in.read(tag.data(), tag.size());
  if (!in) {
    throw IoError("truncated matrix header in " + path.string());
  }
  MatrixFile f;
  f.role.assign(tag.data(), tag.size());
  f.role.erase(f.role.find_last_not_of(' ') + 1);
  f.matrix.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::uint64_t i = 0; i < dim; ++i) {
    for (std::uint64_t j = 0; j < dim; ++j) {
      double v[2];
      in.read(reinterpret_cast<char*>(v), sizeof(v));
      f.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = Complex(v[0], v[1]);
    }
  }
  if (!in) {
    throw IoError("truncated matrix data in " + path.string());
  }
  return f;
}

nlohmann::json solution_json(const transmission::SolveReport& report, const assembly::MultiTraceDofMap& dofmap,
                             const SolutionMeta& meta) {
  nlohmann::json j;
  j["alpha"] = {meta.alpha.real(), meta.alpha.imag()};
  j["kappas"] = meta.kappas;
  j["h"] = meta.h;
  j["geometry"] = meta.geometry;
  j["residual"] = report.residual;
  j["method"] = report.method;
  j["iterations"] = report.iterations;
  if (!report.history.empty()) {
    j["residual_history"] = report.history;
  }
  for (const auto& b : dofmap.blocks) {
    nlohmann::json block;
    block["subdomain"] = b.subdomain;
    for (const auto& [name, first] : {std::pair{"dirichlet", b.dirichlet(0)}, std::pair{"neumann", b.neumann(0)}}) {
      std::vector<double> re;
      std::vector<double> im;
      for (int i = 0; i < b.size(); ++i) {
        re.push_back(report.coeffs[first + i].real());
        im.push_back(report.coeffs[first + i].imag());
      }
      block[name] = {{"re", re}, {"im", im}};
    }
    j["blocks"].push_back(block);
  }
  return j;
}

}  // namespace mtf::io
