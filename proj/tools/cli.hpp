#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace otval::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;

struct GenOptions {
  int case_id = 1;
  int clients = 5;
  long per_client = 200;
  int classes = 10;
  long dim = 5;
  double separation = 3.0;
  double sigma = 1.0;
  long validation_size = 0;  ///< 0: same as per_client
  std::uint64_t seed = 0;
  std::string out = "data";
};

/// Unset fields fall back to the manifest's "config" object, then defaults.
struct RunOptions {
  std::string manifest;
  std::string out = "out";
  std::optional<std::string> mode;
  std::optional<int> iters;
  std::optional<long> support;  ///< 0 or unset everywhere: largest client size
  std::optional<double> t;
  std::optional<double> p;
  std::optional<double> epsilon;
  std::optional<std::string> backend;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<double> regularization;
  std::optional<std::string> covariance;
  std::string detect_mode = "eta_q";
  bool parallel_clients = false;
};

struct BenchOptions {
  std::vector<int> ns{1, 2, 4, 8, 16};
  long m = 200;
  long support = 100;
  int iters = 5;
  int classes = 10;
  long dim = 5;
  int repeats = 3;
  std::uint64_t seed = 0;
  bool parallel_clients = false;
  std::string out = "bench";
};

/// Each command writes its files under `out` and returns the summary it also
/// stores there as JSON.
nlohmann::json cmd_gen(const GenOptions& options);
nlohmann::json cmd_valuate(const RunOptions& options);
nlohmann::json cmd_detect(const RunOptions& options);
nlohmann::json cmd_bench(const BenchOptions& options);

/// Full command line entry point; returns the process exit code. Errors are
/// written to `err` as one JSON object.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace otval::cli
