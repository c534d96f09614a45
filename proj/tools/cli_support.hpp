#pragma once

#include <algorithm>
#include <atomic>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "permext/operator_cache.hpp"

namespace permext::cli {

using nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRange = 3;
inline constexpr int kExitCertification = 4;

/// Raised for inconsistent flag combinations detected after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Header shared by every output: tool version, command and the resolved config.
json metadata(const std::string& command, const json& config);

/// Writes "# key: value" lines for CSV outputs.
void write_csv_header(std::ostream& os, const json& meta);

/// Output sink: a file when a path is given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path);
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

/// "a,b,c" -> {a, b, c}
std::vector<double> parse_list(const std::string& s);
/// "lo..hi" -> n points linearly spaced; a plain list is accepted as well.
std::vector<double> parse_range(const std::string& s, int n);

/// Spectral operator through the on-disk cache when one is configured.
SpectralOperator spectral_operator(double h, int n, const std::string& cache_dir);

/// Runs fn(i) for i in [0, n) on `threads` workers; results land by index.
template <class T>
std::vector<T> parallel_map(std::size_t n, unsigned threads, const std::function<T(std::size_t)>& fn) {
  std::vector<T> out(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace permext::cli
