// Command-line front end: validate / fit / summarize / sensitivity / simulate.

#include <iostream>

#include <CLI11.hpp>

#include "seroprev/cli.hpp"

namespace cli = seroprev::cli;

int main(int argc, char** argv) {
  CLI::App app{"Bayesian seroprevalence estimation from multi-test surveys"};
  app.require_subcommand(1);

  seroprev::io::InputPaths paths;
  auto add_inputs = [&](CLI::App* sub) {
    sub->add_option("--participants", paths.participants, "participants CSV")
        ->required();
    sub->add_option("--tracts", paths.tracts, "tract frame CSV")->required();
    sub->add_option("--poststrat", paths.poststrat, "poststratification CSV")
        ->required();
    sub->add_option("--nonresponse", paths.nonresponse,
                    "regional non-response CSV")
        ->required();
  };

  std::string outdir = cli::default_outdir();
  auto add_outdir = [&](CLI::App* sub) {
    sub->add_option("--outdir", outdir,
                    "output directory (default $SEROPREV_OUTDIR)");
  };

  auto* validate = app.add_subcommand("validate", "check the survey inputs");
  add_inputs(validate);

  auto* fit = app.add_subcommand("fit", "run the MCMC sampler");
  add_inputs(fit);
  add_outdir(fit);
  cli::FitOptions fit_options;
  fit->add_option("--iterations", fit_options.sampler.n_iterations,
                  "sweeps per chain");
  fit->add_option("--burnin", fit_options.sampler.n_burnin,
                  "discarded initial sweeps");
  fit->add_option("--thin", fit_options.sampler.thin_every, "thinning stride");
  fit->add_option("--chains", fit_options.sampler.n_chains, "number of chains");
  fit->add_option("--seed", fit_options.sampler.rng_seed, "RNG seed");
  fit->add_flag("--fresh-b", fit_options.sampler.poststrat.fresh_b_for_all_tracts,
                "redraw tract effects for all tracts when poststratifying");

  double level = 0.95;
  std::string draws_dir;
  auto* summarize = app.add_subcommand("summarize", "summarize stored draws");
  add_inputs(summarize);
  add_outdir(summarize);
  summarize->add_option("--draws", draws_dir, "directory holding draws.tsv")
      ->required();
  summarize->add_option("--level", level, "credible level");

  std::vector<double> lambdas;
  auto* sensitivity =
      app.add_subcommand("sensitivity", "non-response sensitivity sweep");
  add_inputs(sensitivity);
  add_outdir(sensitivity);
  sensitivity->add_option("--draws", draws_dir, "directory holding draws.tsv")
      ->required();
  sensitivity->add_option("--lambda", lambdas, "relative prevalence values")
      ->expected(-1);
  sensitivity->add_option("--level", level, "credible level");

  auto* simulate = app.add_subcommand("simulate", "generate a synthetic survey");
  add_outdir(simulate);
  std::string truth_path;
  std::uint64_t sim_seed = 1;
  simulate->add_option("--truth", truth_path, "truth config (key = value)");
  simulate->add_option("--seed", sim_seed, "RNG seed");

  CLI11_PARSE(app, argc, argv);

  if (validate->parsed()) return cli::cmd_validate(paths, std::cout);
  if (fit->parsed()) {
    fit_options.paths = paths;
    fit_options.outdir = outdir;
    return cli::cmd_fit(fit_options, std::cout);
  }
  if (summarize->parsed())
    return cli::cmd_summarize(draws_dir, paths, level, outdir, std::cout);
  if (sensitivity->parsed()) {
    if (lambdas.empty()) lambdas = {0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0};
    return cli::cmd_sensitivity(draws_dir, paths, lambdas, level, outdir,
                                std::cout);
  }
  if (simulate->parsed())
    return cli::cmd_simulate(truth_path, sim_seed, outdir, std::cout);
  return cli::kExitValidation;
}
