#pragma once

// Subcommand implementations behind the command-line front end.
// Exit codes: 0 success, 1 validation failure, 2 sampler fault.

#include <iosfwd>
#include <string>
#include <vector>

#include "seroprev/io.hpp"
#include "seroprev/sampler.hpp"

namespace seroprev::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitSamplerFault = 2;

int cmd_validate(const io::InputPaths& paths, std::ostream& out);

struct FitOptions {
  io::InputPaths paths;
  SamplerConfig sampler;
  PriorSpec priors = PriorSpec::defaults();
  std::string outdir;
};
int cmd_fit(const FitOptions& options, std::ostream& out);

int cmd_summarize(const std::string& draws_dir, const io::InputPaths& paths,
                  double level, const std::string& outdir, std::ostream& out);

int cmd_sensitivity(const std::string& draws_dir, const io::InputPaths& paths,
                    const std::vector<double>& lambdas, double level,
                    const std::string& outdir, std::ostream& out);

int cmd_simulate(const std::string& truth_config_path, std::uint64_t seed,
                 const std::string& outdir, std::ostream& out);

/// Default output directory: $SEROPREV_OUTDIR or "./seroprev-out".
std::string default_outdir();

}  // namespace seroprev::cli
