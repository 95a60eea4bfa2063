#pragma once

// On-disk instance format. An instance directory holds manifest.json plus raw
// little-endian arrays:
//
//   Y.f64      float64, m x q, column-major
//   A.f64      float64, q matrices of m x n, column-major each, concatenated
//              in k order; A_k starts at element k*m*n
//   Ustar.f64  float64, n x r, column-major
//   Bstar.f64  float64, r x q, column-major
//   Pstar.i64  int64, length m, 0-based source index of each output row
//
// The ground-truth files are optional on read (manifest "has_truth").

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "permlrcs/core_model.hpp"

namespace permlrcs {

inline constexpr int kInstanceFormatVersion = 1;
inline constexpr const char* kManifestName = "manifest.json";

namespace io {

template <typename T>
void write_le(std::ostream& os, const T* data, std::size_t count) {
  static_assert(sizeof(T) == 8);
  std::vector<unsigned char> buf(count * 8);
  for (std::size_t i = 0; i < count; ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(data[i]);
    for (int b = 0; b < 8; ++b) buf[i * 8 + b] = static_cast<unsigned char>(bits >> (8 * b));
  }
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

template <typename T>
std::vector<T> read_le(const std::filesystem::path& file, std::size_t expected) {
  static_assert(sizeof(T) == 8);
  std::ifstream is(file, std::ios::binary);
  if (!is) throw FormatError("cannot open " + file.string());
  std::vector<unsigned char> buf(expected * 8);
  is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(is.gcount()) != buf.size() || is.peek() != std::char_traits<char>::eof())
    throw FormatError(file.string() + ": expected exactly " + std::to_string(buf.size()) + " bytes");
  std::vector<T> out(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(buf[i * 8 + b]) << (8 * b);
    out[i] = std::bit_cast<T>(bits);
  }
  return out;
}

inline void write_matrix(std::ostream& os, const Matrix& m) {
  write_le(os, m.data(), static_cast<std::size_t>(m.size()));
}

inline std::ofstream open_out(const std::filesystem::path& file) {
  std::ofstream os(file, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("cannot write " + file.string());
  return os;
}

inline nlohmann::json array_entry(const std::string& file, const std::string& dtype,
                                  std::vector<Index> shape, const std::string& layout) {
  return {{"file", file}, {"dtype", dtype}, {"shape", shape}, {"layout", layout}};
}

}  // namespace io

inline nlohmann::json to_json(const Dims& d) {
  return {{"n", d.n}, {"q", d.q}, {"m", d.m}, {"r", d.r}, {"s", d.s}};
}

inline Dims dims_from_json(const nlohmann::json& j) {
  return {j.at("n").get<Index>(), j.at("q").get<Index>(), j.at("m").get<Index>(),
          j.at("r").get<Index>(), j.at("s").get<Index>()};
}

// Writes the instance (and ground truth if given). Returns the manifest path.
inline std::filesystem::path write_instance(const std::filesystem::path& dir, const ProblemInstance& inst,
                                            const GroundTruth* truth = nullptr,
                                            const std::optional<Seeds>& seeds = std::nullopt) {
  inst.validate();
  const auto& d = inst.dims;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw FormatError("cannot create " + dir.string() + ": " + ec.message());

  nlohmann::json manifest;
  manifest["format"] = "permlrcs-instance";
  manifest["format_version"] = kInstanceFormatVersion;
  manifest["byte_order"] = "little";
  manifest["dims"] = to_json(d);
  manifest["seeds"] = seeds ? nlohmann::json{{"instance", seeds->instance}, {"permutation", seeds->permutation}}
                            : nlohmann::json(nullptr);
  manifest["has_truth"] = truth != nullptr;

  auto& arrays = manifest["arrays"];
  {
    auto os = io::open_out(dir / "Y.f64");
    io::write_matrix(os, inst.Y);
    arrays["Y"] = io::array_entry("Y.f64", "float64", {d.m, d.q}, "column-major");
  }
  {
    auto os = io::open_out(dir / "A.f64");
    for (const auto& a : inst.A) io::write_matrix(os, a);
    arrays["A"] = io::array_entry("A.f64", "float64", {d.q, d.m, d.n},
                                  "A_k column-major (m x n), concatenated for k = 0..q-1; "
                                  "A_k starts at element k*m*n");
  }
  if (truth) {
    if (truth->Ustar.rows() != d.n || truth->Ustar.cols() != d.r || truth->Bstar.rows() != d.r ||
        truth->Bstar.cols() != d.q || truth->Pstar.size() != d.m)
      throw DimensionError("write_instance: ground truth does not match dims");
    auto os = io::open_out(dir / "Ustar.f64");
    io::write_matrix(os, truth->Ustar);
    arrays["Ustar"] = io::array_entry("Ustar.f64", "float64", {d.n, d.r}, "column-major");
    auto bs = io::open_out(dir / "Bstar.f64");
    io::write_matrix(bs, truth->Bstar);
    arrays["Bstar"] = io::array_entry("Bstar.f64", "float64", {d.r, d.q}, "column-major");
    std::vector<std::int64_t> perm(truth->Pstar.assignment().begin(), truth->Pstar.assignment().end());
    auto ps = io::open_out(dir / "Pstar.i64");
    io::write_le(ps, perm.data(), perm.size());
    arrays["Pstar"] = io::array_entry("Pstar.i64", "int64", {d.m},
                                      "0-based source row of each output row; block size s");
    manifest["sigma_max"] = truth->sigma_max;
  }

  const auto path = dir / kManifestName;
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw FormatError("cannot write " + path.string());
  os << manifest.dump(2) << '\n';
  return path;
}

struct LoadedInstance {
  ProblemInstance instance;
  std::optional<GroundTruth> truth;
  std::optional<Seeds> seeds;
};

// Accepts the instance directory or the manifest path itself.
inline LoadedInstance read_instance(std::filesystem::path path) {
  if (std::filesystem::is_regular_file(path)) path = path.parent_path();
  const auto manifest_path = path / kManifestName;
  std::ifstream is(manifest_path);
  if (!is) throw FormatError("cannot open " + manifest_path.string());

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }

  LoadedInstance out;
  try {
    if (manifest.at("format") != "permlrcs-instance") throw FormatError("not a permlrcs instance manifest");
    if (manifest.at("format_version").get<int>() != kInstanceFormatVersion)
      throw FormatError("unsupported format_version");
    const Dims d = dims_from_json(manifest.at("dims"));
    d.validate();
    const auto& arrays = manifest.at("arrays");
    auto file_of = [&](const char* name) { return path / arrays.at(name).at("file").get<std::string>(); };
    auto as_matrix = [](const std::vector<double>& v, Index rows, Index cols) {
      return Matrix(Eigen::Map<const Matrix>(v.data(), rows, cols));
    };

    out.instance.dims = d;
    const auto mq = static_cast<std::size_t>(d.m * d.q);
    out.instance.Y = as_matrix(io::read_le<double>(file_of("Y"), mq), d.m, d.q);
    const auto mn = static_cast<std::size_t>(d.m * d.n);
    const auto a = io::read_le<double>(file_of("A"), mn * static_cast<std::size_t>(d.q));
    out.instance.A.reserve(static_cast<std::size_t>(d.q));
    for (Index k = 0; k < d.q; ++k)
      out.instance.A.emplace_back(Eigen::Map<const Matrix>(a.data() + k * d.m * d.n, d.m, d.n));

    if (manifest.value("has_truth", false)) {
      GroundTruth t;
      t.Ustar = as_matrix(io::read_le<double>(file_of("Ustar"), static_cast<std::size_t>(d.n * d.r)), d.n, d.r);
      t.Bstar = as_matrix(io::read_le<double>(file_of("Bstar"), static_cast<std::size_t>(d.r * d.q)), d.r, d.q);
      const auto p = io::read_le<std::int64_t>(file_of("Pstar"), static_cast<std::size_t>(d.m));
      t.Pstar = BlockPermutation::from_assignment(std::vector<Index>(p.begin(), p.end()), d.s);
      t.sigma_max = manifest.at("sigma_max").get<double>();
      out.truth = std::move(t);
    }
    if (manifest.contains("seeds") && !manifest["seeds"].is_null())
      out.seeds = Seeds{manifest["seeds"].at("instance").get<std::uint64_t>(),
                        manifest["seeds"].at("permutation").get<std::uint64_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(manifest_path.string() + ": " + e.what());
  }
  return out;
}

}  // namespace permlrcs
