#include "otval/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "otval/error.hpp"

namespace otval::io {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  return in;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

template <class T>
T parse_cell(std::string_view cell, const fs::path& path, std::size_t line_no) {
  while (!cell.empty() && (cell.front() == ' ')) cell.remove_prefix(1);
  while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\r')) cell.remove_suffix(1);
  T value{};
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
    throw InputError(path.string() + ":" + std::to_string(line_no) + ": cannot parse '" +
                     std::string(cell) + "'");
  }
  return value;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_dataset_csv(const LabeledDataset& data, const fs::path& path) {
  data.validate();
  std::ofstream out = open_out(path);
  for (Index k = 0; k < data.dim(); ++k) out << 'f' << k << ',';
  out << "label\n";
  for (Index i = 0; i < data.size(); ++i) {
    for (Index k = 0; k < data.dim(); ++k) out << format_double(data.features(i, k)) << ',';
    out << data.labels[static_cast<std::size_t>(i)] << '\n';
  }
  if (!out) throw InputError("failed writing " + path.string());
}

LabeledDataset read_dataset_csv(const fs::path& path, int num_classes) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw InputError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  if (header.size() < 2 || header.back() != "label") {
    throw InputError(path.string() + ": header must be f0..f{d-1},label");
  }
  const auto d = static_cast<Index>(header.size() - 1);
  for (Index k = 0; k < d; ++k) {
    if (header[static_cast<std::size_t>(k)] != "f" + std::to_string(k)) {
      throw InputError(path.string() + ": header must be f0..f{d-1},label");
    }
  }
  std::vector<double> values;
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (static_cast<Index>(cells.size()) != d + 1) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(d + 1) + " columns");
    }
    for (Index k = 0; k < d; ++k) values.push_back(parse_cell<double>(cells[static_cast<std::size_t>(k)], path, line_no));
    labels.push_back(parse_cell<int>(cells.back(), path, line_no));
  }
  LabeledDataset data;
  const auto n = static_cast<Index>(labels.size());
  data.features = Eigen::Map<const Matrix>(values.data(), n, d);
  data.labels = std::move(labels);
  int max_label = 0;
  for (int y : data.labels) {
    if (y < 0) throw InputError(path.string() + ": labels must be nonnegative");
    max_label = std::max(max_label, y);
  }
  data.num_classes = std::max(num_classes, max_label + 1);
  data.validate();
  return data;
}

fs::path Manifest::resolve(const std::string& relative) const {
  const fs::path p(relative);
  return p.is_absolute() ? p : base_dir / p;
}

Manifest read_manifest(const fs::path& path) {
  std::ifstream in = open_in(path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": invalid JSON: " + e.what());
  }
  Manifest m;
  m.base_dir = path.parent_path();
  try {
    m.schema_version = j.value("schema_version", 0);
    if (m.schema_version != kSchemaVersion) {
      throw InputError(path.string() + ": unsupported schema_version " +
                       std::to_string(m.schema_version));
    }
    m.case_id = j.value("case", 0);
    m.seed = j.value("seed", std::uint64_t{0});
    m.num_classes = j.value("num_classes", 1);
    m.dim = j.value("dim", Index{0});
    m.noise_kind = j.value("noise_kind", std::string());
    for (const auto& c : j.at("clients")) {
      ManifestClient mc;
      mc.path = c.at("path").get<std::string>();
      mc.size = c.value("size", Index{0});
      mc.noise_ratio = c.value("noise_ratio", 0.0);
      if (c.contains("noisy")) mc.noisy = c.at("noisy").get<std::vector<Index>>();
      m.clients.push_back(std::move(mc));
    }
    if (j.contains("validation") && !j.at("validation").is_null()) {
      m.validation = j.at("validation").get<std::string>();
    }
    if (j.contains("config")) m.config = j.at("config");
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": malformed manifest: " + e.what());
  }
  if (m.clients.empty()) throw InputError(path.string() + ": manifest lists no clients");
  return m;
}

void write_manifest(const Manifest& m, const fs::path& path) {
  json clients = json::array();
  for (const auto& c : m.clients) {
    clients.push_back({{"path", c.path}, {"size", c.size}, {"noise_ratio", c.noise_ratio},
                       {"noisy", c.noisy}});
  }
  json j{{"schema_version", m.schema_version},
         {"case", m.case_id},
         {"seed", m.seed},
         {"num_classes", m.num_classes},
         {"dim", m.dim},
         {"noise_kind", m.noise_kind},
         {"clients", std::move(clients)},
         {"validation", m.validation ? json(*m.validation) : json(nullptr)},
         {"config", m.config}};
  write_json(j, path);
}

void write_history_csv(const std::vector<double>& a_history,
                       const std::vector<std::vector<double>>& estimates, const fs::path& path) {
  std::ofstream out = open_out(path);
  const std::size_t n = estimates.empty() ? 0 : estimates.front().size();
  out << "round,A";
  for (std::size_t i = 0; i < n; ++i) out << ",estimate_" << i;
  out << '\n';
  for (std::size_t k = 0; k < a_history.size(); ++k) {
    out << k << ',' << format_double(a_history[k]);
    if (k < estimates.size())
      for (double e : estimates[k]) out << ',' << format_double(e);
    out << '\n';
  }
  if (!out) throw InputError("failed writing " + path.string());
}

void write_datum_csv(const std::vector<DatumRow>& rows, const fs::path& path) {
  std::ofstream out = open_out(path);
  out << "client,datum_index,gradient,flagged\n";
  for (const auto& r : rows) {
    out << r.client << ',' << r.value.index << ',' << format_double(r.value.gradient) << ','
        << (r.value.flagged ? 1 : 0) << '\n';
  }
  if (!out) throw InputError("failed writing " + path.string());
}

void write_json(const json& value, const fs::path& path) {
  std::ofstream out = open_out(path);
  out << value.dump(2) << '\n';
  if (!out) throw InputError("failed writing " + path.string());
}

}  // namespace otval::io
