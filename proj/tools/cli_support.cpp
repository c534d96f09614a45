#include "cli_support.hpp"

#include <sstream>

#include "permext/errors.hpp"

#ifndef PERMEXT_VERSION_STRING
#define PERMEXT_VERSION_STRING "unknown"
#endif

namespace permext::cli {

json metadata(const std::string& command, const json& config) {
  json m;
  m["tool"] = "permext";
  m["version"] = PERMEXT_VERSION_STRING;
  m["command"] = command;
  m["config"] = config;
  m["seed"] = config.contains("seed") ? config["seed"] : json(nullptr);
  return m;
}

void write_csv_header(std::ostream& os, const json& meta) {
  for (auto it = meta.begin(); it != meta.end(); ++it) os << "# " << it.key() << ": " << it.value().dump() << '\n';
}

Sink::Sink(const std::string& path) {
  if (path.empty() || path == "-") return;
  file_ = std::make_unique<std::ofstream>(path);
  if (!*file_) throw UsageError("cannot open output file " + path);
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    try {
      v.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw UsageError("not a number: '" + cell + "'");
    }
  }
  if (v.empty()) throw UsageError("empty list");
  return v;
}

std::vector<double> parse_range(const std::string& s, int n) {
  const auto pos = s.find("..");
  if (pos == std::string::npos) return parse_list(s);
  if (n < 2) throw UsageError("a range needs at least two points");
  double lo = 0, hi = 0;
  try {
    lo = std::stod(s.substr(0, pos));
    hi = std::stod(s.substr(pos + 2));
  } catch (const std::exception&) {
    throw UsageError("malformed range '" + s + "'");
  }
  std::vector<double> v;
  for (int k = 0; k < n; ++k) v.push_back(lo + (hi - lo) * k / (n - 1));
  return v;
}

SpectralOperator spectral_operator(double h, int n, const std::string& cache_dir) {
  std::string dir = cache_dir;
  if (dir.empty()) {
    if (auto env = cache_dir_from_env()) dir = *env;
  }
  return load_or_build(h, n, dir);
}

}  // namespace permext::cli
