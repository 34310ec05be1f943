// Experiment runner: validates configs, executes single runs and sweeps,
// and checks the hypergradient oracle against finite differences.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "adasdbo/errors.hpp"
#include "adasdbo/experiment.hpp"
#include "adasdbo/oracle.hpp"
#include "adasdbo/rng.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitOracle = 4;
constexpr int kExitIo = 5;

std::string resolve_outdir(const std::string& flag_value, const adasdbo::ExperimentConfig& cfg) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("ADASDBO_OUTDIR"); env && *env) return env;
  if (!cfg.output.directory.empty()) return cfg.output.directory;
  return "out";
}

// Central-difference check of the implicit hypergradient against the value
// function assembled from the lower-level solver.
double hypergradient_fd_error(const adasdbo::BilevelProblem& problem, adasdbo::Rng& rng,
                              int points) {
  using adasdbo::Vec;
  adasdbo::OracleConfig ocfg;
  ocfg.inner_tol = 1e-11;
  adasdbo::Oracle oracle(problem, ocfg);
  adasdbo::Oracle phi_oracle(problem, ocfg);

  auto phi = [&](const Vec& x) {
    const Vec y = phi_oracle.solve_lower(x);
    return phi_oracle.avg_upper_loss(x, y);
  };

  double worst = 0.0;
  for (int pt = 0; pt < points; ++pt) {
    Vec x(problem.upper_dim());
    for (double& c : x) c = 0.5 * rng.normal();
    const Vec g = oracle.true_hypergradient(x);
    Vec fd(x.size());
    const double h = 1e-4;
    for (std::size_t k = 0; k < x.size(); ++k) {
      Vec xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      fd[k] = (phi(xp) - phi(xm)) / (2.0 * h);
    }
    const double err = adasdbo::norm(adasdbo::sub(fd, g)) /
                       std::max({adasdbo::norm(g), adasdbo::norm(fd), 1e-8});
    worst = std::max(worst, err);
  }
  return worst;
}

int cmd_oracle_check(bool quiet) {
  using namespace adasdbo;
  double worst = 0.0;

  {
    const QuadraticBilevel quad = QuadraticBilevel::make_default(5, 5, 4, /*seed=*/7);
    Rng rng(11, "oracle-check/quadratic");
    worst = std::max(worst, hypergradient_fd_error(quad, rng, 5));
    // The quadratic instance also has a closed form to compare against.
    Oracle oracle(quad);
    for (int pt = 0; pt < 5; ++pt) {
      Vec x(quad.upper_dim());
      for (double& c : x) c = rng.normal();
      const Vec numeric = oracle.true_hypergradient(x);
      const Vec exact = quad.true_hypergradient(x);
      worst = std::max(worst, norm(sub(numeric, exact)) / std::max(norm(exact), 1e-8));
    }
  }
  {
    RngSpec spec{23, "oracle-check"};
    SyntheticDataset data = generate_synthetic(3, 8, 30, 30, 0.5, spec);
    const SyntheticLogisticHPO logistic(std::move(data.agents));
    Rng rng(29, "oracle-check/logistic");
    worst = std::max(worst, hypergradient_fd_error(logistic, rng, 3));
  }

  if (!quiet) std::printf("max relative hypergradient error: %.3e\n", worst);
  if (!(worst <= 1e-5)) {
    std::fprintf(stderr, "oracle-check FAILED: %.3e > 1e-5\n", worst);
    return kExitOracle;
  }
  if (!quiet) std::printf("oracle-check passed\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AdaSDBO decentralized bilevel optimization simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, outdir_flag;
  int threads = 1;
  bool quiet = false;
  app.add_option("--config", config_path, "path to the experiment config");
  app.add_option("--outdir", outdir_flag, "output directory (overrides config/env)");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--quiet", quiet, "suppress progress output");

  auto* validate = app.add_subcommand("validate", "parse and validate a config");
  auto* run = app.add_subcommand("run", "execute a single run");
  auto* sweep = app.add_subcommand("sweep", "execute a parameter sweep");
  auto* oracle_check =
      app.add_subcommand("oracle-check", "finite-difference check of the hypergradient oracle");

  CLI11_PARSE(app, argc, argv);

  try {
    if (oracle_check->parsed()) return cmd_oracle_check(quiet);

    if (config_path.empty()) {
      std::fprintf(stderr, "error: --config is required\n");
      return kExitConfig;
    }
    const adasdbo::ExperimentConfig cfg = adasdbo::parse_config_file(config_path);

    if (validate->parsed()) {
      if (!quiet)
        std::printf("config ok, hash %s\n", adasdbo::config_hash(cfg).c_str());
      return kExitOk;
    }

    const std::string outdir = resolve_outdir(outdir_flag, cfg);

    if (run->parsed()) {
      const adasdbo::RunSummary s = adasdbo::run_single(cfg, outdir, threads, quiet);
      if (!quiet) std::printf("summary: %s\n", s.summary_path.c_str());
      return s.diverged ? kExitDivergence : kExitOk;
    }
    if (sweep->parsed()) {
      adasdbo::run_sweep(cfg, outdir, threads, quiet);
      if (!quiet) std::printf("sweep results under %s\n", outdir.c_str());
      return kExitOk;
    }
  } catch (const adasdbo::ParseError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const adasdbo::OracleFailure& e) {
    std::fprintf(stderr, "oracle failure: %s\n", e.what());
    return kExitOracle;
  } catch (const adasdbo::DivergenceError& e) {
    std::fprintf(stderr, "divergence: %s\n", e.what());
    return kExitDivergence;
  } catch (const adasdbo::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitOk;
}
