#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "otval/datagen.hpp"
#include "otval/io.hpp"

using namespace otval;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "otval_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir.parent_path());
  return dir;
}

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "otval");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json load(const fs::path& p) { return json::parse(slurp(p)); }

}  // namespace

TEST_CASE("gen writes deterministic datasets and a manifest") {
  const fs::path a = scratch("gen_a");
  const fs::path b = scratch("gen_b");
  const std::vector<std::string> flags{"--case", "1", "--clients", "5", "--per-client", "200", "--seed", "7"};
  auto args = flags;
  args.insert(args.begin(), "gen");
  args.insert(args.end(), {"--out", a.string()});
  REQUIRE(invoke(args).code == 0);
  args.back() = b.string();
  REQUIRE(invoke(args).code == 0);
  for (int i = 0; i < 5; ++i) {
    const std::string name = "client_" + std::to_string(i) + ".csv";
    CHECK(fs::exists(a / name));
    CHECK(slurp(a / name) == slurp(b / name));
  }
  CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
  const json m = load(a / "manifest.json");
  CHECK(m.at("schema_version") == io::kSchemaVersion);
  CHECK(m.at("clients").size() == 5);
}

TEST_CASE("gen case 5 records ground truth") {
  const fs::path dir = scratch("gen5");
  REQUIRE(invoke({"gen", "--case", "5", "--per-client", "100", "--out", dir.string()}).code == 0);
  const io::Manifest m = io::read_manifest(dir / "manifest.json");
  CHECK(m.noise_kind == "feature");
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(m.clients[i].noisy.size() ==
          static_cast<std::size_t>(noise_count(0.05 * static_cast<double>(i), 100)));
  }
}

TEST_CASE("valuate: case 1 shares, outputs and audit") {
  const fs::path data = scratch("val_data");
  const fs::path out = scratch("val_out");
  REQUIRE(invoke({"gen", "--case", "1", "--per-client", "200", "--seed", "3", "--out", data.string()}).code == 0);
  const Result r = invoke({"valuate", "--manifest", (data / "manifest.json").string(), "--iters", "5",
                           "--out", out.string()});
  REQUIRE(r.code == 0);
  const json report = load(out / "report.json");
  CHECK(report == json::parse(r.out));
  CHECK(report.at("config").at("mode") == "fixed");
  CHECK(report.at("config").at("support") == 200);
  for (const auto& c : report.at("clients")) {
    CHECK(c.at("share").get<double>() >= 0.17);
    CHECK(c.at("share").get<double>() <= 0.23);
  }
  CHECK(report.at("audit").at("passed") == true);
  CHECK(report.at("history").at("monotone_within_slack") == true);
  CHECK(fs::exists(out / "history.csv"));
  std::ifstream t(out / "transcript.jsonl");
  std::size_t lines = 0;
  for (std::string line; std::getline(t, line);) ++lines;
  CHECK(lines == 3u * 5u * 6u);
}

TEST_CASE("valuate: one client equal to the validation set") {
  const fs::path data = scratch("self_data");
  const fs::path out = scratch("self_out");
  REQUIRE(invoke({"gen", "--clients", "1", "--per-client", "60", "--classes", "3", "--out", data.string()}).code == 0);
  io::Manifest m = io::read_manifest(data / "manifest.json");
  m.validation = m.clients[0].path;
  io::write_manifest(m, data / "manifest.json");
  REQUIRE(invoke({"valuate", "--manifest", (data / "manifest.json").string(), "--iters", "25",
                  "--out", out.string()}).code == 0);
  const json report = load(out / "report.json");
  CHECK(report.at("clients")[0].at("distance").get<double>() <= 1e-3 * report.at("history").at("range_hint").get<double>());
}

TEST_CASE("valuate: barycenter mode flags the noisy client") {
  const fs::path data = scratch("bary_data");
  const fs::path out = scratch("bary_out");
  REQUIRE(invoke({"gen", "--case", "1", "--per-client", "200", "--seed", "11", "--out", data.string()}).code == 0);
  io::Manifest m = io::read_manifest(data / "manifest.json");
  const fs::path last = m.resolve(m.clients[4].path);
  const LabeledDataset clean = io::read_dataset_csv(last, m.num_classes);
  const NoisedDataset noisy = inject_noise(clean, 1.0, NoiseKind::kFeature, 2.0, 5);
  io::write_dataset_csv(noisy.data, last);
  const Result r = invoke({"valuate", "--manifest", (data / "manifest.json").string(), "--mode", "barycenter",
                           "--iters", "5", "--out", out.string()});
  REQUIRE(r.code == 0);
  const json report = json::parse(r.out);
  for (const auto& c : report.at("clients")) CHECK(c.at("flagged") == (c.at("client") == 4));
}

TEST_CASE("flags override the manifest config") {
  const fs::path data = scratch("prec_data");
  REQUIRE(invoke({"gen", "--clients", "2", "--per-client", "40", "--classes", "2", "--out", data.string()}).code == 0);
  io::Manifest m = io::read_manifest(data / "manifest.json");
  m.config = {{"iters", 2}, {"t", 0.25}, {"support", 30}};
  io::write_manifest(m, data / "manifest.json");
  const fs::path a = scratch("prec_a");
  json r = json::parse(invoke({"valuate", "--manifest", (data / "manifest.json").string(), "--out", a.string()}).out);
  CHECK(r.at("config").at("iters") == 2);
  CHECK(r.at("config").at("t") == 0.25);
  CHECK(r.at("config").at("support") == 30);
  r = json::parse(invoke({"valuate", "--manifest", (data / "manifest.json").string(), "--iters", "3",
                          "--out", a.string()}).out);
  CHECK(r.at("config").at("iters") == 3);
  CHECK(r.at("config").at("t") == 0.25);
}

TEST_CASE("detect: metrics, nulls and datum CSV") {
  const fs::path data = scratch("det_data");
  const fs::path out = scratch("det_out");
  REQUIRE(invoke({"gen", "--case", "5", "--clients", "2", "--per-client", "100", "--classes", "1",
                  "--sigma", "10", "--out", data.string()}).code == 0);
  const Result r = invoke({"detect", "--manifest", (data / "manifest.json").string(), "--iters", "3",
                           "--out", out.string()});
  REQUIRE(r.code == 0);
  const json report = load(out / "detect.json");
  CHECK(report.at("detect_mode") == "eta_q");
  CHECK(report.at("clients")[0].at("recall").is_null());
  CHECK(report.at("clients")[1].at("ground_truth") == 5);
  CHECK(report.at("clients")[1].at("recall").is_number());
  CHECK(std::abs(report.at("clients")[1].at("gradient_sum").get<double>()) <= 1e-8);
  std::ifstream csv(out / "datum.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "client,datum_index,gradient,flagged");

  const fs::path label_data = scratch("det_label");
  REQUIRE(invoke({"gen", "--case", "4", "--clients", "3", "--per-client", "60", "--classes", "3",
                  "--out", label_data.string()}).code == 0);
  const Result lr = invoke({"detect", "--manifest", (label_data / "manifest.json").string(), "--iters", "2",
                            "--detect-mode", "gamma", "--out", scratch("det_label_out").string()});
  REQUIRE(lr.code == 0);
  const json lj = json::parse(lr.out);
  CHECK(lj.at("noise_kind") == "label");
  CHECK(lj.at("clients")[2].contains("f1"));
}

TEST_CASE("bench writes timings and a fit") {
  const fs::path out = scratch("bench");
  const Result r = invoke({"bench", "--ns", "1,2,3", "--m", "40", "--support", "20", "--iters", "1",
                           "--repeats", "1", "--out", out.string()});
  REQUIRE(r.code == 0);
  const std::string csv = slurp(out / "timing.csv");
  CHECK(csv.rfind("n,seconds_median,seconds_min,repeats\n1,", 0) == 0);
  CHECK(csv.find("# fit slope=") != std::string::npos);
  CHECK(load(out / "bench.json").at("rows").size() == 3);
}

TEST_CASE("exit codes and structured errors") {
  Result r = invoke({"valuate", "--manifest", "/nonexistent/manifest.json"});
  CHECK(r.code == cli::kExitConfig);
  CHECK(json::parse(r.err).at("error") == "input");
  r = invoke({"gen", "--case", "9"});
  CHECK(r.code == cli::kExitConfig);
  CHECK(json::parse(r.err).at("error") == "usage");
  r = invoke({"gen", "--out", "/proc/otval_cannot_write"});
  CHECK(r.code == cli::kExitConfig);
  r = invoke({"--simd", "sse9", "bench"});
  CHECK(r.code == cli::kExitConfig);

  const fs::path data = scratch("err_data");
  REQUIRE(invoke({"gen", "--clients", "2", "--per-client", "20", "--classes", "2", "--out", data.string()}).code == 0);
  r = invoke({"valuate", "--manifest", (data / "manifest.json").string(), "--t", "2", "--out",
              scratch("err_out").string()});
  CHECK(r.code == cli::kExitConfig);
  r = invoke({"valuate", "--manifest", (data / "manifest.json").string(), "--backend", "entropic",
              "--epsilon", "1e-320", "--iters", "1", "--out", scratch("err_out").string()});
  CHECK(r.code == cli::kExitSolver);
  CHECK(json::parse(r.err).at("error") == "solver");
  r = invoke({"valuate", "--manifest", (data / "manifest.json").string(), "--mode", "sideways"});
  CHECK(r.code == cli::kExitConfig);
}
