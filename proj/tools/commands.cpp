#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <spdlog/spdlog.h>

#include "cli.hpp"
#include "otval/datagen.hpp"
#include "otval/error.hpp"
#include "otval/fed/audit.hpp"
#include "otval/fed/session.hpp"
#include "otval/io.hpp"
#include "otval/valuation.hpp"

namespace otval::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw InputError("cannot create output directory " + dir.string());
}

template <class T>
T pick(const std::optional<T>& flag, const json& config, const char* key, T fallback) {
  if (flag) return *flag;
  if (config.contains(key) && !config.at(key).is_null()) {
    try {
      return config.at(key).get<T>();
    } catch (const json::exception&) {
      throw InputError(std::string("manifest config entry '") + key + "' has the wrong type");
    }
  }
  return fallback;
}

CovarianceMode parse_covariance(const std::string& name) {
  if (name == "auto") return CovarianceMode::kAuto;
  if (name == "full") return CovarianceMode::kFull;
  if (name == "diagonal") return CovarianceMode::kDiagonal;
  throw InputError("unknown covariance mode '" + name + "' (expected auto|full|diagonal)");
}

struct LoadedRun {
  io::Manifest manifest;
  std::vector<LabeledDataset> raw;
  std::vector<AugmentedDataset> clients;
  std::optional<AugmentedDataset> validation;
  fed::FedConfig config;
  json settings;
};

LoadedRun load_run(const RunOptions& opt) {
  if (opt.manifest.empty()) throw InputError("--manifest is required");
  LoadedRun run;
  run.manifest = io::read_manifest(opt.manifest);
  const json& mc = run.manifest.config;

  const std::string mode_name =
      pick(opt.mode, mc, "mode",
           std::string(run.manifest.validation ? "fixed" : "barycenter"));
  const fed::Mode mode = fed::parse_mode(mode_name);
  const double reg = pick(opt.regularization, mc, "regularization", kDefaultRegularization);
  const CovarianceMode cov = parse_covariance(pick(opt.covariance, mc, "covariance", std::string("auto")));

  Index largest = 0;
  for (const auto& c : run.manifest.clients) {
    run.raw.push_back(io::read_dataset_csv(run.manifest.resolve(c.path), run.manifest.num_classes));
    largest = std::max(largest, run.raw.back().size());
    run.clients.push_back(augment(run.raw.back(), reg, cov));
  }
  if (mode == fed::Mode::kFixedValidation) {
    if (!run.manifest.validation) throw InputError("fixed mode needs a validation set in the manifest");
    const LabeledDataset val =
        io::read_dataset_csv(run.manifest.resolve(*run.manifest.validation), run.manifest.num_classes);
    run.validation = augment(val, reg, cov);
  }

  fed::FedConfig& cfg = run.config;
  cfg.mode = mode;
  cfg.rounds = pick(opt.iters, mc, "iters", 10);
  const long support = pick(opt.support, mc, "support", 0L);
  if (support < 0) throw InputError("--support must be positive (0 selects the largest client size)");
  cfg.support_size = support > 0 ? support : largest;
  cfg.t = pick(opt.t, mc, "t", 0.5);
  cfg.solver.power = pick(opt.p, mc, "p", 2.0);
  cfg.solver.epsilon = pick(opt.epsilon, mc, "epsilon", 0.01);
  cfg.solver.backend = parse_backend(pick(opt.backend, mc, "backend", std::string("exact")));
  cfg.seed = pick(opt.seed, mc, "seed", run.manifest.seed);
  cfg.stop_tolerance = pick(opt.tol, mc, "tol", 1e-6);
  cfg.parallel_clients = opt.parallel_clients;
  cfg.num_clients = static_cast<Index>(run.clients.size());
  cfg.validate();

  run.settings = json{{"mode", fed::mode_name(cfg.mode)},
                      {"clients", cfg.num_clients},
                      {"iters", cfg.rounds},
                      {"support", cfg.support_size},
                      {"t", cfg.t},
                      {"p", cfg.solver.power},
                      {"backend", backend_name(cfg.solver.backend)},
                      {"epsilon", cfg.solver.epsilon},
                      {"seed", cfg.seed},
                      {"tol", cfg.stop_tolerance},
                      {"regularization", reg},
                      {"parallel_clients", cfg.parallel_clients}};
  return run;
}

fed::FedSession execute(LoadedRun& run) {
  fed::FedSession session = fed::init_session(run.clients, run.validation, run.config);
  fed::run(session);
  return session;
}

fed::AuditReport audit(const fed::FedSession& session, const LoadedRun& run) {
  std::vector<Matrix> secrets;
  for (std::size_t i = 0; i < run.raw.size(); ++i) {
    secrets.push_back(run.raw[i].features);
    secrets.push_back(run.clients[i].stacked);
  }
  return fed::audit_transcript(session.transcript, secrets);
}

json audit_json(const fed::AuditReport& report) {
  json matches = json::array();
  for (const auto& m : report.matches) matches.push_back(m.message_index);
  return json{{"passed", report.passed()},
              {"messages", report.messages},
              {"rows_scanned", report.rows_scanned},
              {"offending_messages", std::move(matches)}};
}

json history_json(const fed::FedSession& session) {
  const auto& a = session.a_history;
  double worst = 0.0;
  for (std::size_t k = 1; k < a.size(); ++k) worst = std::max(worst, a[k] - a[k - 1]);
  const double slack = a.empty() ? 0.0 : 1e-6 * a.front();
  return json{{"a_history", a},
              {"max_increase", worst},
              {"monotone_within_slack", worst <= slack},
              {"rounds_run", session.rounds_run},
              {"early_stopped", session.early_stopped},
              {"range_hint", session.range_hint}};
}

void write_session_files(const fed::FedSession& session, const fs::path& out) {
  io::write_history_csv(session.a_history, session.estimates, out / "history.csv");
  std::ofstream transcript(out / "transcript.jsonl");
  if (!transcript) throw InputError("cannot write " + (out / "transcript.jsonl").string());
  fed::write_jsonl(session.transcript, transcript);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

json cmd_gen(const GenOptions& opt) {
  if (opt.clients < 1 || opt.per_client < 1 || opt.classes < 1 || opt.dim < 1) {
    throw InputError("--clients, --per-client, --classes and --dim must be positive");
  }
  if (opt.validation_size < 0) throw InputError("--validation-size must be nonnegative");
  if (!(opt.sigma > 0.0)) throw InputError("--sigma must be positive");
  const fs::path out(opt.out);
  make_dir(out);

  CaseSpec spec = CaseSpec::standard(opt.case_id, opt.clients, opt.per_client, opt.classes, opt.seed + 3);
  spec.sigma = opt.sigma;
  // Enough rows per class for every client's largest-remainder allocation.
  Index per_class = 0;
  for (std::size_t c = 0; c < spec.sizes.size(); ++c) {
    const double top = *std::max_element(spec.proportions[c].begin(), spec.proportions[c].end());
    per_class += static_cast<Index>(std::ceil(top * static_cast<double>(spec.sizes[c]))) + 1;
  }
  const Matrix means = class_means(opt.classes, opt.dim, opt.separation, opt.seed);
  const Matrix cov = Matrix::Identity(opt.dim, opt.dim);
  const LabeledDataset base = gaussian_blobs(opt.classes, per_class, means, cov, opt.seed + 1);
  const long vs = opt.validation_size > 0 ? opt.validation_size : opt.per_client;
  const LabeledDataset validation =
      gaussian_blobs(opt.classes, std::max<long>(1, vs / opt.classes), means, cov, opt.seed + 2);
  const std::vector<ClientData> clients = make_case(spec, base);

  io::Manifest manifest;
  manifest.case_id = opt.case_id;
  manifest.seed = opt.seed;
  manifest.num_classes = opt.classes;
  manifest.dim = opt.dim;
  manifest.noise_kind = opt.case_id == 4 ? "label" : opt.case_id == 5 ? "feature" : "";
  for (std::size_t c = 0; c < clients.size(); ++c) {
    const std::string name = "client_" + std::to_string(c) + ".csv";
    io::write_dataset_csv(clients[c].data, out / name);
    manifest.clients.push_back({name, clients[c].data.size(), spec.noise_ratios[c], clients[c].noisy});
  }
  io::write_dataset_csv(validation, out / "validation.csv");
  manifest.validation = "validation.csv";
  manifest.config = json{{"seed", opt.seed}};
  io::write_manifest(manifest, out / "manifest.json");

  json summary{{"schema_version", io::kSchemaVersion},
               {"command", "gen"},
               {"manifest", (out / "manifest.json").string()},
               {"clients", clients.size()},
               {"validation_size", validation.size()}};
  return summary;
}

json cmd_valuate(const RunOptions& opt) {
  LoadedRun run = load_run(opt);
  const fs::path out(opt.out);
  make_dir(out);
  const fed::FedSession session = execute(run);
  write_session_files(session, out);

  const fed::AuditReport audited = audit(session, run);
  const RelevanceReport rel = relevance_report(session);
  json clients = json::array();
  for (const ClientScore& c : rel.clients) {
    clients.push_back({{"client", c.client},
                       {"path", run.manifest.clients[static_cast<std::size_t>(c.client)].path},
                       {"size", run.clients[static_cast<std::size_t>(c.client)].size()},
                       {"distance", c.distance},
                       {"share", c.share},
                       {"flagged", c.flagged}});
  }
  json report{{"schema_version", io::kSchemaVersion},
              {"command", "valuate"},
              {"config", run.settings},
              {"clients", std::move(clients)},
              {"relevance", {{"median", rel.median}, {"mad", rel.mad}, {"threshold", rel.threshold}}},
              {"history", history_json(session)},
              {"audit", audit_json(audited)},
              {"outputs",
               {{"history_csv", "history.csv"}, {"transcript", "transcript.jsonl"}}}};
  io::write_json(report, out / "report.json");
  audited.ensure_passed();
  return report;
}

json cmd_detect(const RunOptions& opt) {
  LoadedRun run = load_run(opt);
  const DetectionMode mode = parse_detection_mode(opt.detect_mode);
  const fs::path out(opt.out);
  make_dir(out);
  const fed::FedSession session = execute(run);
  write_session_files(session, out);

  const fed::AuditReport audited = audit(session, run);
  std::vector<io::DatumRow> rows;
  json clients = json::array();
  for (std::size_t i = 0; i < run.clients.size(); ++i) {
    const Detection det = detect_noisy(session, static_cast<int>(i), mode);
    const DetectionMetrics m = score_detection(det.data, run.manifest.clients[i].noisy);
    double total = 0.0;
    for (const auto& d : det.data) {
      rows.push_back({static_cast<int>(i), d});
      total += d.gradient;
    }
    clients.push_back({{"client", i},
                       {"size", det.data.size()},
                       {"flagged", m.flagged},
                       {"ground_truth", m.truth},
                       {"true_positives", m.true_positives},
                       {"precision", number_or_null(m.precision)},
                       {"recall", number_or_null(m.recall)},
                       {"f1", number_or_null(m.f1)},
                       {"gradient_sum", total},
                       {"distance", det.distance}});
  }
  io::write_datum_csv(rows, out / "datum.csv");
  json report{{"schema_version", io::kSchemaVersion},
              {"command", "detect"},
              {"detect_mode", detection_mode_name(mode)},
              {"noise_kind", run.manifest.noise_kind},
              {"config", run.settings},
              {"clients", std::move(clients)},
              {"history", history_json(session)},
              {"audit", audit_json(audited)},
              {"outputs", {{"datum_csv", "datum.csv"}, {"history_csv", "history.csv"},
                           {"transcript", "transcript.jsonl"}}}};
  io::write_json(report, out / "detect.json");
  audited.ensure_passed();
  return report;
}

json cmd_bench(const BenchOptions& opt) {
  if (opt.ns.empty()) throw InputError("--ns needs at least one client count");
  for (int n : opt.ns)
    if (n < 1) throw InputError("--ns entries must be positive");
  if (opt.m < 1 || opt.support < 1 || opt.iters < 1 || opt.repeats < 1 || opt.classes < 1 || opt.dim < 1) {
    throw InputError("bench sizes must be positive");
  }
  const fs::path out(opt.out);
  make_dir(out);
  const Matrix means = class_means(opt.classes, opt.dim, 3.0, opt.seed);
  const Matrix cov = Matrix::Identity(opt.dim, opt.dim);
  const Index per_class = std::max<Index>(1, opt.m / opt.classes);

  std::vector<double> xs;
  std::vector<double> ys;
  json rows = json::array();
  std::ofstream csv(out / "timing.csv");
  if (!csv) throw InputError("cannot write " + (out / "timing.csv").string());
  csv << "n,seconds_median,seconds_min,repeats\n";
  for (int n : opt.ns) {
    std::vector<AugmentedDataset> clients;
    for (int c = 0; c < n; ++c) {
      clients.push_back(augment(gaussian_blobs(opt.classes, per_class, means, cov,
                                               opt.seed + 100 + static_cast<std::uint64_t>(c))));
    }
    fed::FedConfig cfg;
    cfg.mode = fed::Mode::kBarycenter;
    cfg.rounds = opt.iters;
    cfg.support_size = opt.support;
    cfg.stop_tolerance = 0.0;
    cfg.seed = opt.seed;
    cfg.parallel_clients = opt.parallel_clients;
    std::vector<double> times;
    for (int r = 0; r < opt.repeats; ++r) {
      const auto start = std::chrono::steady_clock::now();
      fed::FedSession session = fed::init_session(clients, std::nullopt, cfg);
      fed::run(session);
      times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    }
    const double med = median(times);
    const double best = *std::min_element(times.begin(), times.end());
    spdlog::info("bench N={} median {:.4f}s", n, med);
    csv << n << ',' << io::format_double(med) << ',' << io::format_double(best) << ',' << opt.repeats << '\n';
    rows.push_back({{"n", n}, {"seconds_median", med}, {"seconds_min", best}});
    xs.push_back(n);
    ys.push_back(med);
  }

  // Least-squares line through (N, median seconds).
  const double k = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / k;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / k;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sxx > 0.0 ? sxy / sxx : std::nan("");
  const double intercept = my - slope * mx;
  const double r2 = sxx > 0.0 && syy > 0.0 ? (sxy * sxy) / (sxx * syy) : std::nan("");
  csv << "# fit slope=" << io::format_double(slope) << " intercept=" << io::format_double(intercept)
      << " r2=" << io::format_double(r2) << '\n';
  if (!csv) throw InputError("failed writing timing.csv");

  json report{{"schema_version", io::kSchemaVersion},
              {"command", "bench"},
              {"m", opt.m},
              {"support", opt.support},
              {"iters", opt.iters},
              {"repeats", opt.repeats},
              {"rows", std::move(rows)},
              {"fit", {{"slope", number_or_null(slope)}, {"intercept", number_or_null(intercept)},
                       {"r2", number_or_null(r2)}}}};
  io::write_json(report, out / "bench.json");
  return report;
}

}  // namespace otval::cli
