#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "otval/augment.hpp"
#include "otval/valuation.hpp"

namespace otval::io {

inline constexpr int kSchemaVersion = 1;

/// Header f0..f{d-1},label; one row per point. Throws InputError when the
/// file cannot be written.
void write_dataset_csv(const LabeledDataset& data, const std::filesystem::path& path);

/// Reads the format above. Labels must be nonnegative integers; num_classes
/// is max(label) + 1 unless a larger value is given.
LabeledDataset read_dataset_csv(const std::filesystem::path& path, int num_classes = 0);

struct ManifestClient {
  std::string path;  ///< relative to the manifest's directory unless absolute
  Index size = 0;
  double noise_ratio = 0.0;
  std::vector<Index> noisy;
};

struct Manifest {
  int schema_version = kSchemaVersion;
  int case_id = 0;
  std::uint64_t seed = 0;
  int num_classes = 1;
  Index dim = 0;
  std::string noise_kind;  ///< "feature", "label" or empty
  std::vector<ManifestClient> clients;
  std::optional<std::string> validation;
  nlohmann::json config = nlohmann::json::object();  ///< run settings below the flags
  std::filesystem::path base_dir;  ///< not serialized

  std::filesystem::path resolve(const std::string& relative) const;
};

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const Manifest& manifest, const std::filesystem::path& path);

/// round,A,estimate_0..estimate_{N-1}
void write_history_csv(const std::vector<double>& a_history,
                       const std::vector<std::vector<double>>& estimates,
                       const std::filesystem::path& path);

struct DatumRow {
  int client = 0;
  DatumValuation value;
};

/// client,datum_index,gradient,flagged
void write_datum_csv(const std::vector<DatumRow>& rows, const std::filesystem::path& path);

void write_json(const nlohmann::json& value, const std::filesystem::path& path);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace otval::io
