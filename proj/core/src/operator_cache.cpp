#include "permext/operator_cache.hpp"

#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace permext {

namespace {

constexpr char kMagic[8] = {'P', 'X', 'E', 'I', 'G', 'v', '0', '1'};

std::string cache_file(const std::string& dir, double h, int n) {
  std::ostringstream os;
  os.precision(17);
  os << "eig_h" << h << "_n" << n << ".bin";
  return (std::filesystem::path(dir) / os.str()).string();
}

bool read_cache(const std::string& path, double h, int n, EigenSystem& E) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  char magic[8];
  double hh = 0;
  std::int64_t nn = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&hh), sizeof hh);
  in.read(reinterpret_cast<char*>(&nn), sizeof nn);
  if (!in || std::memcmp(magic, kMagic, 8) != 0 || hh != h || nn != n) return false;
  E.values.resize(n);
  E.vectors.resize(n, n);
  in.read(reinterpret_cast<char*>(E.values.data()), sizeof(double) * n);
  in.read(reinterpret_cast<char*>(E.vectors.data()), sizeof(cplx) * n * n);
  in.read(reinterpret_cast<char*>(&E.residual), sizeof(double));
  in.read(reinterpret_cast<char*>(&E.orthogonality_defect), sizeof(double));
  return static_cast<bool>(in);
}

void write_cache(const std::string& path, double h, int n, const EigenSystem& E) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) return;
    const std::int64_t nn = n;
    out.write(kMagic, 8);
    out.write(reinterpret_cast<const char*>(&h), sizeof h);
    out.write(reinterpret_cast<const char*>(&nn), sizeof nn);
    out.write(reinterpret_cast<const char*>(E.values.data()), sizeof(double) * n);
    out.write(reinterpret_cast<const char*>(E.vectors.data()), sizeof(cplx) * n * n);
    out.write(reinterpret_cast<const char*>(&E.residual), sizeof(double));
    out.write(reinterpret_cast<const char*>(&E.orthogonality_defect), sizeof(double));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
}

}  // namespace

SpectralOperator build_spectral_operator(double h, int n) {
  SpectralOperator s;
  s.op = build_operator(h, n);
  s.eig = eigen(s.op);
  return s;
}

SpectralOperator load_or_build(double h, int n, const std::string& dir) {
  if (dir.empty()) return build_spectral_operator(h, n);
  SpectralOperator s;
  s.op = build_operator(h, n);
  const std::string path = cache_file(dir, h, n);
  if (read_cache(path, h, n, s.eig)) return s;
  s.eig = eigen(s.op);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (!ec) write_cache(path, h, n, s.eig);
  return s;
}

std::optional<std::string> cache_dir_from_env() {
  const char* v = std::getenv("PERMEXT_CACHE_DIR");
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

}  // namespace permext
