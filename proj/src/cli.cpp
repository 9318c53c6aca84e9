#include "seroprev/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "seroprev/inference.hpp"
#include "seroprev/poststrat.hpp"
#include "seroprev/prevmodel.hpp"
#include "seroprev/rng.hpp"

namespace seroprev::cli {

namespace fs = std::filesystem;

namespace {

struct ValidatedInput {
  Dataset data;
};

/// Reads and validates the survey tables, reporting every issue to `out`.
/// Returns nullopt (caller exits with kExitValidation) on any error.
std::optional<ValidatedInput> load_validated(const io::InputPaths& paths,
                                             std::ostream& out) {
  RawTables raw;
  try {
    raw = io::read_raw_tables(paths);
  } catch (const io::IngestError& e) {
    out << "error: " << e.what() << '\n';
    return std::nullopt;
  }
  auto result = validate_dataset(raw);
  for (const auto& w : result.warnings) out << "warning: " << w.message << '\n';
  for (const auto& e : result.errors) out << "error: " << e.message << '\n';
  if (!result.ok()) return std::nullopt;
  return ValidatedInput{std::move(*result.dataset)};
}

std::vector<std::pair<std::string, std::string>> input_manifest(
    const io::InputPaths& paths) {
  return {{"participants", paths.participants},
          {"tracts", paths.tracts},
          {"poststrat", paths.poststrat},
          {"nonresponse", paths.nonresponse}};
}

void write_summary_files(const std::string& outdir, const Dataset& data,
                         const std::vector<ChainDraws>& chains, double level) {
  const auto prev = summarize_chains(chains, data, level);
  const auto probs = participant_infection_probs(chains, data);

  {
    std::ofstream out(fs::path(outdir) / "summary.txt");
    out << "level = " << io::format_double(level) << '\n';
    out << "prevalence_mean = " << io::format_double(prev.mean) << '\n';
    out << "prevalence_hpd_lower = " << io::format_double(prev.hpd_lower)
        << '\n';
    out << "prevalence_hpd_upper = " << io::format_double(prev.hpd_upper)
        << '\n';
    out << "implied_infected_adults = " << io::format_double(prev.implied_adults)
        << '\n';
    out << "n_participants = " << data.n() << '\n';
    out << "n_prob_above_1pct = " << probs.count_above_1pct << '\n';
  }
  {
    std::ofstream out(fs::path(outdir) / "summary_table.tsv");
    out << "scope\tmean\thpd_lower\thpd_upper\n";
    out << "statewide\t" << io::format_double(prev.mean) << '\t'
        << io::format_double(prev.hpd_lower) << '\t'
        << io::format_double(prev.hpd_upper) << '\n';
    for (std::size_t r = 0; r < data.regions.size(); ++r)
      out << data.regions[r] << '\t' << io::format_double(prev.region_mean[r])
          << '\t' << io::format_double(prev.region_hpd_lower[r]) << '\t'
          << io::format_double(prev.region_hpd_upper[r]) << '\n';
  }
  {
    // Pooled mean, summed per-chain ESS, and split R-hat per column.
    std::ofstream out(fs::path(outdir) / "diagnostics.tsv");
    out << "param\tmean\tess\trhat\n";
    const auto& names = chains.front().param_names;
    auto emit = [&](const std::string& name,
                    const std::vector<std::vector<double>>& per_chain) {
      std::vector<double> pooled;
      for (const auto& c : per_chain)
        pooled.insert(pooled.end(), c.begin(), c.end());
      out << name << '\t' << io::format_double(posterior_mean(pooled)) << '\t'
          << io::format_double(ess_multi(per_chain)) << '\t'
          << io::format_double(rhat(per_chain)) << '\n';
    };
    for (std::size_t j = 0; j < names.size(); ++j) {
      std::vector<std::vector<double>> per_chain;
      for (const auto& c : chains) {
        std::vector<double> col;
        col.reserve(c.draws.size());
        for (const auto& row : c.draws) col.push_back(row[j]);
        per_chain.push_back(std::move(col));
      }
      emit(names[j], per_chain);
    }
    if (!chains.front().pi_statewide.empty()) {
      std::vector<std::vector<double>> per_chain;
      for (const auto& c : chains) per_chain.push_back(c.pi_statewide);
      emit("pi", per_chain);
      for (std::size_t r = 0; r < data.regions.size(); ++r) {
        std::vector<std::vector<double>> region_chains;
        for (const auto& c : chains) {
          std::vector<double> col;
          col.reserve(c.pi_region.size());
          for (const auto& row : c.pi_region) col.push_back(row[r]);
          region_chains.push_back(std::move(col));
        }
        emit("pi_r." + data.regions[r], region_chains);
      }
    }
  }
  {
    std::ofstream out(fs::path(outdir) / "participant_probs.tsv");
    out << "id\tprob_infected\n";
    for (int i = 0; i < data.n(); ++i)
      out << data.participants[i].id << '\t'
          << io::format_double(probs.prob[i]) << '\n';
  }
}

/// Rebuilds the per-draw poststratification cell fields exactly as the fit
/// produced them, keyed off the stored seed and chain/draw indices.
std::vector<std::vector<double>> rebuild_fields(const io::LoadedDraws& loaded,
                                                const Dataset& data) {
  const auto ws = ModelWorkspace::build(data);
  PoststratOptions opt;
  opt.fresh_b_for_all_tracts = loaded.fresh_b_for_all_tracts;
  std::vector<std::vector<double>> fields;
  for (const auto& c : loaded.chains) {
    for (std::size_t k = 0; k < c.draws.size(); ++k) {
      TestParams params;
      RegressionState state;
      io::unpack_draw(c.param_names, c.draws[k], data, params, state);
      const std::uint64_t key =
          poststrat_key(loaded.seed, c.chain_index, static_cast<long>(k));
      fields.push_back(poststrat_field(data, ws, state, key, opt));
    }
  }
  return fields;
}

void write_sweep_svg(const std::string& path, const SensitivityGrid& grid) {
  // Minimal static line chart: statewide mean with the HPD band across lambda.
  const double w = 640, h = 400, ml = 70, mr = 20, mt = 20, mb = 50;
  double lo = grid.lambda.front(), hi = grid.lambda.back();
  if (hi <= lo) hi = lo + 1.0;
  double ymax = 0.0;
  for (const auto& s : grid.summary)
    ymax = std::max(ymax, s.hpd_upper);
  if (ymax <= 0.0) ymax = 1.0;
  ymax *= 1.1;
  auto sx = [&](double l) { return ml + (l - lo) / (hi - lo) * (w - ml - mr); };
  auto sy = [&](double p) { return h - mb - p / ymax * (h - mt - mb); };

  std::ofstream out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << ' ' << h
      << "\">\n";
  out << "<rect width=\"" << w << "\" height=\"" << h
      << "\" fill=\"white\"/>\n";

  auto polyline = [&](auto value, const char* style) {
    out << "<polyline fill=\"none\" " << style << " points=\"";
    for (std::size_t i = 0; i < grid.lambda.size(); ++i)
      out << sx(grid.lambda[i]) << ',' << sy(value(grid.summary[i])) << ' ';
    out << "\"/>\n";
  };
  // HPD band as a closed polygon.
  out << "<polygon fill=\"#c6dbef\" stroke=\"none\" points=\"";
  for (std::size_t i = 0; i < grid.lambda.size(); ++i)
    out << sx(grid.lambda[i]) << ',' << sy(grid.summary[i].hpd_upper) << ' ';
  for (std::size_t i = grid.lambda.size(); i-- > 0;)
    out << sx(grid.lambda[i]) << ',' << sy(grid.summary[i].hpd_lower) << ' ';
  out << "\"/>\n";
  polyline([](const PrevalenceSummary& s) { return s.mean; },
           "stroke=\"#08519c\" stroke-width=\"2\"");

  // Axes and ticks.
  out << "<line x1=\"" << ml << "\" y1=\"" << (h - mb) << "\" x2=\"" << (w - mr)
      << "\" y2=\"" << (h - mb) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml
      << "\" y2=\"" << (h - mb) << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double l = lo + (hi - lo) * i / 4.0;
    const double p = ymax / 1.1 * i / 4.0;
    out << "<text x=\"" << sx(l) << "\" y=\"" << (h - mb + 18)
        << "\" font-size=\"12\" text-anchor=\"middle\">" << l << "</text>\n";
    out << "<text x=\"" << (ml - 8) << "\" y=\"" << (sy(p) + 4)
        << "\" font-size=\"12\" text-anchor=\"end\">" << p << "</text>\n";
  }
  out << "<text x=\"" << (ml + (w - ml - mr) / 2) << "\" y=\"" << (h - 12)
      << "\" font-size=\"13\" text-anchor=\"middle\">"
         "relative prevalence among non-responders (lambda)</text>\n";
  out << "<text x=\"16\" y=\"" << (mt + (h - mt - mb) / 2)
      << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << (mt + (h - mt - mb) / 2) << ")\">statewide prevalence</text>\n";
  out << "</svg>\n";
}

}  // namespace

std::string default_outdir() {
  if (const char* env = std::getenv("SEROPREV_OUTDIR"); env && *env)
    return env;
  return "seroprev-out";
}

int cmd_validate(const io::InputPaths& paths, std::ostream& out) {
  const auto input = load_validated(paths, out);
  if (!input) {
    out << "validation failed\n";
    return kExitValidation;
  }
  const auto& d = input->data;
  out << "validation ok\n";
  out << "participants: " << d.n() << '\n';
  out << "regions: " << d.regions.size() << '\n';
  out << "tracts: " << d.tracts.size() << " (" << d.sampled_tracts.size()
      << " sampled)\n";
  out << "poststrat cells: " << d.poststrat.rows.size() << '\n';
  out << "poststrat adult population: "
      << io::format_double(d.poststrat.total_population()) << '\n';
  return kExitOk;
}

int cmd_fit(const FitOptions& options, std::ostream& out) {
  const auto input = load_validated(options.paths, out);
  if (!input) return kExitValidation;
  try {
    options.sampler.validate();
    options.priors.require_valid();
  } catch (const std::exception& e) {
    out << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  std::vector<ChainDraws> chains;
  try {
    chains = run_chains(options.sampler, input->data, options.priors);
  } catch (const SamplerFault& e) {
    out << "sampler fault: " << e.what() << '\n';
    return kExitSamplerFault;
  }

  fs::create_directories(options.outdir);
  io::write_draws(options.outdir, chains, input->data, options.sampler);
  io::write_manifest(
      options.outdir, input_manifest(options.paths),
      {{"command", "fit"},
       {"seed", std::to_string(options.sampler.rng_seed)},
       {"n_iterations", std::to_string(options.sampler.n_iterations)},
       {"n_burnin", std::to_string(options.sampler.n_burnin)},
       {"thin_every", std::to_string(options.sampler.thin_every)},
       {"n_chains", std::to_string(options.sampler.n_chains)}});

  out << "chains: " << chains.size() << ", kept draws per chain: "
      << options.sampler.n_kept() << '\n';
  out << "wrote " << (fs::path(options.outdir) / "draws.tsv").string() << '\n';
  return kExitOk;
}

int cmd_summarize(const std::string& draws_dir, const io::InputPaths& paths,
                  double level, const std::string& outdir, std::ostream& out) {
  const auto input = load_validated(paths, out);
  if (!input) return kExitValidation;
  io::LoadedDraws loaded;
  try {
    loaded = io::load_draws(draws_dir);
  } catch (const std::exception& e) {
    out << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  if (loaded.chains.empty() || loaded.chains.front().pi_statewide.empty()) {
    out << "error: " << draws_dir
        << " holds no poststratified draws to summarize\n";
    return kExitValidation;
  }
  io::recompute_infection_probs(loaded.chains, input->data);

  fs::create_directories(outdir);
  write_summary_files(outdir, input->data, loaded.chains, level);
  io::write_manifest(outdir, input_manifest(paths),
                     {{"command", "summarize"},
                      {"draws", draws_dir},
                      {"level", io::format_double(level)}});
  out << "wrote summary.txt, summary_table.tsv, diagnostics.tsv, "
         "participant_probs.tsv in "
      << outdir << '\n';
  return kExitOk;
}

int cmd_sensitivity(const std::string& draws_dir, const io::InputPaths& paths,
                    const std::vector<double>& lambdas, double level,
                    const std::string& outdir, std::ostream& out) {
  const auto input = load_validated(paths, out);
  if (!input) return kExitValidation;
  if (lambdas.empty()) {
    out << "error: no lambda values given\n";
    return kExitValidation;
  }
  io::LoadedDraws loaded;
  try {
    loaded = io::load_draws(draws_dir);
  } catch (const std::exception& e) {
    out << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  if (loaded.chains.empty()) {
    out << "error: " << draws_dir << " holds no draws\n";
    return kExitValidation;
  }

  const auto fields = rebuild_fields(loaded, input->data);
  const auto grid = sensitivity_sweep(input->data, fields, lambdas, level);

  fs::create_directories(outdir);
  {
    std::ofstream tsv(fs::path(outdir) / "sensitivity.tsv");
    tsv << "lambda\tscope\tmean\thpd_lower\thpd_upper\n";
    for (std::size_t i = 0; i < grid.lambda.size(); ++i) {
      const auto& s = grid.summary[i];
      tsv << io::format_double(grid.lambda[i]) << "\tstatewide\t"
          << io::format_double(s.mean) << '\t'
          << io::format_double(s.hpd_lower) << '\t'
          << io::format_double(s.hpd_upper) << '\n';
      for (std::size_t r = 0; r < input->data.regions.size(); ++r)
        tsv << io::format_double(grid.lambda[i]) << '\t'
            << input->data.regions[r] << '\t'
            << io::format_double(s.region_mean[r]) << '\t'
            << io::format_double(s.region_hpd_lower[r]) << '\t'
            << io::format_double(s.region_hpd_upper[r]) << '\n';
    }
  }
  write_sweep_svg((fs::path(outdir) / "sweep.svg").string(), grid);
  io::write_manifest(outdir, input_manifest(paths),
                     {{"command", "sensitivity"},
                      {"draws", draws_dir},
                      {"level", io::format_double(level)}});
  out << "wrote sensitivity.tsv and sweep.svg in " << outdir << '\n';
  return kExitOk;
}

int cmd_simulate(const std::string& truth_config_path, std::uint64_t seed,
                 const std::string& outdir, std::ostream& out) {
  simgen::TruthConfig truth;
  try {
    truth = truth_config_path.empty()
                ? simgen::TruthConfig::defaults()
                : io::parse_truth_config(io::read_key_values(truth_config_path));
    truth.validate();
  } catch (const std::exception& e) {
    out << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  rng::Stream stream(seed);
  const auto sim = simgen::simulate_survey(truth, stream);
  fs::create_directories(outdir);
  io::write_raw_tables(sim.tables, outdir);
  {
    std::ofstream t(fs::path(outdir) / "truth.txt");
    const auto& tr = sim.truth;
    auto put = [&](const char* k, double v) {
      t << k << " = " << io::format_double(v) << '\n';
    };
    for (int i = 0; i < kNumTests; ++i) {
      t << 'S' << (i + 1) << " = "
        << io::format_double(tr.test_params.sensitivity[i]) << '\n';
      t << 'C' << (i + 1) << " = "
        << io::format_double(tr.test_params.specificity[i]) << '\n';
    }
    put("R1", tr.test_params.cov_pos);
    put("R0", tr.test_params.cov_neg);
    put("alpha", tr.alpha);
    put("sigma", tr.sigma);
    put("tau", tr.tau);
    put("beta_age1", tr.beta_s[0]);
    put("beta_age2", tr.beta_s[1]);
    put("beta_sex", tr.beta_s[2]);
    put("beta_logpop", tr.beta_t);
    for (std::size_t r = 0; r < tr.alpha_r.size(); ++r)
      t << "alpha_r." << r << " = " << io::format_double(tr.alpha_r[r]) << '\n';
    for (const auto& [tract, b] : tr.b_t)
      t << "b." << tract << " = " << io::format_double(b) << '\n';
  }
  std::vector<std::pair<std::string, std::string>> inputs;
  if (!truth_config_path.empty()) inputs.push_back({"truth", truth_config_path});
  io::write_manifest(outdir, inputs,
                     {{"command", "simulate"}, {"seed", std::to_string(seed)}});
  out << "simulated " << sim.tables.participants.size()
      << " participants into " << outdir << '\n';
  return kExitOk;
}

}  // namespace seroprev::cli
