#include "permext/io.hpp"

#include <iomanip>
#include <istream>
#include <json.hpp>
#include <ostream>
#include <sstream>

#include "permext/errors.hpp"

namespace permext {

using nlohmann::json;

std::string to_json(const StieltjesRational& f, int indent) {
  json j;
  j["rho_star"] = f.rho_star();
  j["h"] = f.h();
  j["nodes"] = f.nodes();
  j["masses"] = f.masses();
  return j.dump(indent);
}

StieltjesRational stieltjes_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
    return StieltjesRational(j.at("rho_star").get<double>(), j.at("h").get<double>(),
                             j.value("nodes", std::vector<double>{}), j.value("masses", std::vector<double>{}));
  } catch (const json::exception& e) {
    throw Error(std::string("stieltjes_from_json: ") + e.what());
  }
}

void write_csv(std::ostream& os, const GridFunction& g) {
  g.validate();
  for (const auto& [k, v] : g.metadata) os << "# " << k << ": " << v << '\n';
  os << "re_omega,im_omega,re_f,im_f\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < g.grid.size(); ++i)
    os << g.grid[i].real() << ',' << g.grid[i].imag() << ',' << g.values[i].real() << ',' << g.values[i].imag()
       << '\n';
}

GridFunction read_grid_csv(std::istream& is) {
  GridFunction g;
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      if (line.find("re_omega") != std::string::npos) continue;
    }
    std::stringstream ss(line);
    std::string cell;
    double v[4];
    for (int k = 0; k < 4; ++k) {
      if (!std::getline(ss, cell, ',')) throw GridError("read_grid_csv: expected four columns");
      v[k] = std::stod(cell);
    }
    g.grid.emplace_back(v[0], v[1]);
    g.values.emplace_back(v[2], v[3]);
  }
  g.validate();
  return g;
}

ExperimentalData read_band_csv(std::istream& is, double band_max) {
  if (!(band_max > 0.0)) throw RangeError("read_band_csv: band_max must be positive");
  ExperimentalData d;
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      if (line.find("omega") != std::string::npos) continue;
    }
    std::stringstream ss(line);
    std::string cell;
    double v[3];
    for (int k = 0; k < 3; ++k) {
      if (!std::getline(ss, cell, ',')) throw GridError("read_band_csv: expected columns omega, re_f, im_f");
      try {
        v[k] = std::stod(cell);
      } catch (const std::exception&) {
        throw GridError("read_band_csv: unparsable number '" + cell + "'");
      }
    }
    d.grid.push_back(v[0] / band_max);
    d.values.emplace_back(v[1], v[2]);
  }
  d.validate();
  attach_gauss_rule(d);
  return d;
}

void write_band_csv(std::ostream& os, const ExperimentalData& d, double band_max) {
  d.validate();
  os << "omega,re_f,im_f\n" << std::setprecision(17);
  for (std::size_t i = 0; i < d.grid.size(); ++i)
    os << d.grid[i] * band_max << ',' << d.values[i].real() << ',' << d.values[i].imag() << '\n';
}

}  // namespace permext
