#pragma once

// CSV ingestion, key-value configs, draws persistence, and run manifests.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "seroprev/domain.hpp"
#include "seroprev/sampler.hpp"
#include "seroprev/simgen.hpp"

namespace seroprev::io {

inline constexpr const char* kVersion = "0.1.0";

struct IngestError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InputPaths {
  std::string participants;
  std::string tracts;
  std::string poststrat;
  std::string nonresponse;
};

/// Reads the four survey CSVs. Throws IngestError naming the offending file,
/// column, and row on malformed input.
RawTables read_raw_tables(const InputPaths& paths);

/// Writes the four CSVs (participants.csv, tracts.csv, poststrat.csv,
/// nonresponse.csv) into `dir` with deterministic formatting.
void write_raw_tables(const RawTables& tables, const std::string& dir);

/// Key-value config file: `key = value` lines, '#' comments.
std::map<std::string, std::string> read_key_values(const std::string& path);

simgen::TruthConfig parse_truth_config(
    const std::map<std::string, std::string>& kv);

/// FNV-1a hash of a file's bytes, hex-encoded.
std::string file_hash(const std::string& path);

std::string format_double(double v);  // round-trip exact ("%.17g")

// --- draws persistence -----------------------------------------------------

void write_draws(const std::string& dir, const std::vector<ChainDraws>& chains,
                 const Dataset& data, const SamplerConfig& config);

struct LoadedDraws {
  std::vector<std::string> param_names;
  std::vector<ChainDraws> chains;  // draws, pi columns; latent not persisted
  std::map<std::string, std::string> meta;
  std::uint64_t seed = 0;
  bool fresh_b_for_all_tracts = false;
};

LoadedDraws load_draws(const std::string& dir);

/// Rebuilds the parameter state of one stored draw row.
void unpack_draw(const std::vector<std::string>& names,
                 const std::vector<double>& row, const Dataset& data,
                 TestParams& params, RegressionState& state);

/// Fills each chain's Rao-Blackwellized infection-probability sums from the
/// stored parameter draws (used after load_draws, which does not persist
/// them).
void recompute_infection_probs(std::vector<ChainDraws>& chains,
                               const Dataset& data);

void write_manifest(const std::string& dir,
                    const std::vector<std::pair<std::string, std::string>>&
                        input_files,
                    const std::vector<std::pair<std::string, std::string>>&
                        config_echo);

}  // namespace seroprev::io
