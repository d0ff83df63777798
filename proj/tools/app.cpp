#include <CLI11.hpp>
#include <exception>
#include <ostream>

#include "cli.hpp"
#include "otval/error.hpp"
#include "otval/log.hpp"
#include "otval/simd/kernels.hpp"

namespace otval::cli {
namespace {

int report(std::ostream& err, int code, const char* kind, const std::string& message) {
  err << nlohmann::json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
  return code;
}

void add_run_flags(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--manifest", o.manifest, "manifest.json written by gen")->required();
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--mode", o.mode, "fixed|barycenter");
  cmd->add_option("--iters", o.iters, "protocol rounds K");
  cmd->add_option("--support", o.support, "atoms per gamma (0: largest client)");
  cmd->add_option("--t", o.t, "interpolation parameter in (0,1)");
  cmd->add_option("--p", o.p, "ground cost exponent");
  cmd->add_option("--epsilon", o.epsilon, "entropic regularization");
  cmd->add_option("--backend", o.backend, "exact|entropic");
  cmd->add_option("--seed", o.seed, "protocol seed");
  cmd->add_option("--tol", o.tol, "relative early-stop tolerance (0 disables)");
  cmd->add_option("--regularization", o.regularization, "covariance ridge");
  cmd->add_option("--covariance", o.covariance, "auto|full|diagonal");
  cmd->add_flag("--parallel-clients", o.parallel_clients, "one thread per client");
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Federated optimal-transport data valuation"};
  app.require_subcommand(1);
  std::string simd = "auto";
  std::string log_level;
  app.add_option("--simd", simd, "auto|scalar|avx2");
  app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off");

  GenOptions gen;
  CLI::App* g = app.add_subcommand("gen", "generate a synthetic case");
  g->add_option("--case", gen.case_id, "case 1-5")->check(CLI::Range(1, 5));
  g->add_option("--clients", gen.clients);
  g->add_option("--per-client", gen.per_client);
  g->add_option("--classes", gen.classes);
  g->add_option("--dim", gen.dim);
  g->add_option("--separation", gen.separation, "class mean spread");
  g->add_option("--sigma", gen.sigma, "feature noise scale");
  g->add_option("--validation-size", gen.validation_size);
  g->add_option("--seed", gen.seed);
  g->add_option("--out", gen.out);

  RunOptions valuate;
  add_run_flags(app.add_subcommand("valuate", "score clients"), valuate);

  RunOptions detect;
  CLI::App* d = app.add_subcommand("detect", "flag noisy data points");
  add_run_flags(d, detect);
  d->add_option("--detect-mode", detect.detect_mode, "eta_q|gamma|server_eta_q|server_q");

  BenchOptions bench;
  CLI::App* b = app.add_subcommand("bench", "time the protocol against N");
  b->add_option("--ns", bench.ns, "client counts")->delimiter(',');
  b->add_option("--m", bench.m, "points per client");
  b->add_option("--support", bench.support);
  b->add_option("--iters", bench.iters);
  b->add_option("--classes", bench.classes);
  b->add_option("--dim", bench.dim);
  b->add_option("--repeats", bench.repeats);
  b->add_option("--seed", bench.seed);
  b->add_option("--out", bench.out);
  b->add_flag("--parallel-clients", bench.parallel_clients);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return report(err, kExitConfig, "usage", e.what());
  }

  try {
    configure_logging(log_level);
    simd::set_level(simd::parse_level(simd));
    nlohmann::json result;
    if (g->parsed()) {
      result = cmd_gen(gen);
    } else if (app.got_subcommand("valuate")) {
      result = cmd_valuate(valuate);
    } else if (d->parsed()) {
      result = cmd_detect(detect);
    } else {
      result = cmd_bench(bench);
    }
    out << result.dump(2) << '\n';
    return kExitOk;
  } catch (const SolverError& e) {
    return report(err, kExitSolver, "solver", e.what());
  } catch (const AuditError& e) {
    return report(err, kExitConfig, "audit", e.what());
  } catch (const InputError& e) {
    return report(err, kExitConfig, "input", e.what());
  } catch (const std::exception& e) {
    return report(err, kExitInternal, "internal", e.what());
  }
}

}  // namespace otval::cli
