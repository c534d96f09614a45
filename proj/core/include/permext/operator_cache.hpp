#pragma once

#include <optional>
#include <string>

#include "permext/quadop.hpp"

namespace permext {

/// Operator plus its eigendecomposition, built once per (h, n).
struct SpectralOperator {
  DiscretizedOperator op;
  EigenSystem eig;
};

SpectralOperator build_spectral_operator(double h, int n = kDefaultNodes);

/// Reads the eigensystem from `dir` if a matching file exists, else builds it and
/// writes it there. An empty dir disables caching. Files carry a versioned header.
SpectralOperator load_or_build(double h, int n, const std::string& dir);

/// Cache directory from the PERMEXT_CACHE_DIR environment variable, if set.
std::optional<std::string> cache_dir_from_env();

}  // namespace permext
