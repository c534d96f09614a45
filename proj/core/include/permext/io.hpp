#pragma once

#include <iosfwd>
#include <string>

#include "permext/lsqfit.hpp"
#include "permext/stieltjes.hpp"

namespace permext {

/// {"rho_star": r, "h": h, "nodes": [...], "masses": [...]}
std::string to_json(const StieltjesRational& f, int indent = 2);
StieltjesRational stieltjes_from_json(const std::string& text);

/// Columns re_omega, im_omega, re_f, im_f. Lines starting with '#' are comments.
void write_csv(std::ostream& os, const GridFunction& g);
GridFunction read_grid_csv(std::istream& is);

/// Band data with columns omega, re_f, im_f. Frequencies are divided by band_max so
/// that the band [0, band_max] becomes [0, 1].
ExperimentalData read_band_csv(std::istream& is, double band_max = 1.0);
void write_band_csv(std::ostream& os, const ExperimentalData& d, double band_max = 1.0);

}  // namespace permext
