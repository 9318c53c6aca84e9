#include "seroprev/io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "seroprev/prevmodel.hpp"
#include "seroprev/rng.hpp"
#include "seroprev/testmodel.hpp"

namespace seroprev::io {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == sep) {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

struct Csv {
  std::string path;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // data rows, file row = idx+2

  int column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw IngestError(path + ": missing required column '" + name + "'");
    return static_cast<int>(it - header.begin());
  }
};

Csv read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open file: " + path);
  Csv csv;
  csv.path = path;
  std::string line;
  if (!std::getline(in, line))
    throw IngestError(path + ": empty file (expected a header row)");
  for (auto& f : split(line, ',')) csv.header.push_back(trim(f));
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    csv.rows.push_back(split(line, ','));
  }
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    if (csv.rows[i].size() != csv.header.size())
      throw IngestError(path + ": row " + std::to_string(i + 2) + " has " +
                        std::to_string(csv.rows[i].size()) + " fields, expected " +
                        std::to_string(csv.header.size()));
  }
  return csv;
}

bool is_missing(const std::string& tok) {
  return tok.empty() || tok == "NA" || tok == "na" || tok == "NaN";
}

std::optional<int> parse_binary(const Csv& csv, std::size_t row, int col) {
  const std::string tok = trim(csv.rows[row][col]);
  if (is_missing(tok)) return std::nullopt;
  if (tok == "0") return 0;
  if (tok == "1") return 1;
  throw IngestError(csv.path + ": row " + std::to_string(row + 2) +
                    ", column '" + csv.header[col] + "': expected 0/1/NA, got '" +
                    tok + "'");
}

double parse_number(const Csv& csv, std::size_t row, int col) {
  const std::string tok = trim(csv.rows[row][col]);
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw IngestError(csv.path + ": row " + std::to_string(row + 2) +
                      ", column '" + csv.header[col] +
                      "': expected a number, got '" + tok + "'");
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RawTables read_raw_tables(const InputPaths& paths) {
  RawTables raw;

  const Csv parts = read_csv(paths.participants);
  {
    const int c_id = parts.column("id"), c_region = parts.column("region"),
              c_age = parts.column("age_group"), c_sex = parts.column("sex"),
              c_tract = parts.column("tract"), c_a = parts.column("abbott_igg"),
              c_l = parts.column("liaison_igg"),
              c_e = parts.column("epitope_igm");
    for (std::size_t i = 0; i < parts.rows.size(); ++i) {
      raw.participants.push_back(
          {trim(parts.rows[i][c_id]), trim(parts.rows[i][c_region]),
           trim(parts.rows[i][c_tract]), trim(parts.rows[i][c_age]),
           trim(parts.rows[i][c_sex]), parse_binary(parts, i, c_a),
           parse_binary(parts, i, c_l), parse_binary(parts, i, c_e),
           static_cast<long>(i + 2)});
    }
  }

  const Csv tracts = read_csv(paths.tracts);
  {
    const int c_tract = tracts.column("tract"),
              c_region = tracts.column("region"),
              c_pop = tracts.column("total_population");
    for (std::size_t i = 0; i < tracts.rows.size(); ++i) {
      raw.tracts.push_back({trim(tracts.rows[i][c_tract]),
                            trim(tracts.rows[i][c_region]),
                            parse_number(tracts, i, c_pop),
                            static_cast<long>(i + 2)});
    }
  }

  const Csv ps = read_csv(paths.poststrat);
  {
    const int c_region = ps.column("region"), c_tract = ps.column("tract"),
              c_age = ps.column("age_group"), c_sex = ps.column("sex"),
              c_pop = ps.column("adult_population");
    for (std::size_t i = 0; i < ps.rows.size(); ++i) {
      raw.poststrat.push_back({trim(ps.rows[i][c_region]),
                               trim(ps.rows[i][c_tract]),
                               trim(ps.rows[i][c_age]), trim(ps.rows[i][c_sex]),
                               parse_number(ps, i, c_pop),
                               static_cast<long>(i + 2)});
    }
  }

  const Csv nr = read_csv(paths.nonresponse);
  {
    const int c_region = nr.column("region"), c_rate = nr.column("rate");
    for (std::size_t i = 0; i < nr.rows.size(); ++i) {
      raw.nonresponse.push_back({trim(nr.rows[i][c_region]),
                                 parse_number(nr, i, c_rate),
                                 static_cast<long>(i + 2)});
    }
  }
  return raw;
}

void write_raw_tables(const RawTables& tables, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream out(fs::path(dir) / name);
    if (!out) throw IngestError("cannot write " + name + " in " + dir);
    return out;
  };
  auto bin = [](const std::optional<int>& v) {
    return v ? std::to_string(*v) : std::string("NA");
  };
  {
    auto out = open("participants.csv");
    out << "id,region,age_group,sex,tract,abbott_igg,liaison_igg,epitope_igm\n";
    for (const auto& p : tables.participants)
      out << p.id << ',' << p.region << ',' << p.age_group << ',' << p.sex
          << ',' << p.tract << ',' << bin(p.abbott_igg) << ','
          << bin(p.liaison_igg) << ',' << bin(p.epitope_igm) << '\n';
  }
  {
    auto out = open("tracts.csv");
    out << "tract,region,total_population\n";
    for (const auto& t : tables.tracts)
      out << t.tract << ',' << t.region << ','
          << format_double(t.total_population) << '\n';
  }
  {
    auto out = open("poststrat.csv");
    out << "region,tract,age_group,sex,adult_population\n";
    for (const auto& r : tables.poststrat)
      out << r.region << ',' << r.tract << ',' << r.age_group << ',' << r.sex
          << ',' << format_double(r.adult_population) << '\n';
  }
  {
    auto out = open("nonresponse.csv");
    out << "region,rate\n";
    for (const auto& r : tables.nonresponse)
      out << r.region << ',' << format_double(r.rate) << '\n';
  }
}

std::map<std::string, std::string> read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  long row = 0;
  while (std::getline(in, line)) {
    ++row;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw IngestError(path + ": line " + std::to_string(row) +
                        ": expected 'key = value'");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

namespace {
std::vector<double> parse_list(const std::string& value) {
  std::vector<double> out;
  for (const auto& tok : split(value, ',')) {
    const std::string t = trim(tok);
    if (!t.empty()) out.push_back(std::stod(t));
  }
  return out;
}
}  // namespace

simgen::TruthConfig parse_truth_config(
    const std::map<std::string, std::string>& kv) {
  simgen::TruthConfig t = simgen::TruthConfig::defaults();
  auto get = [&](const char* key, auto setter) {
    const auto it = kv.find(key);
    if (it != kv.end()) setter(it->second);
  };
  auto num = [](const std::string& v) { return std::stod(v); };
  get("alpha", [&](const std::string& v) { t.alpha = num(v); });
  get("sigma", [&](const std::string& v) { t.sigma = num(v); });
  get("tau", [&](const std::string& v) { t.tau = num(v); });
  get("beta_age1", [&](const std::string& v) { t.beta_s[0] = num(v); });
  get("beta_age2", [&](const std::string& v) { t.beta_s[1] = num(v); });
  get("beta_sex", [&](const std::string& v) { t.beta_s[2] = num(v); });
  get("beta_logpop", [&](const std::string& v) { t.beta_t = num(v); });
  get("n_regions", [&](const std::string& v) { t.n_regions = std::stoi(v); });
  get("tracts_per_region",
      [&](const std::string& v) { t.tracts_per_region = std::stoi(v); });
  get("sample_tracts_per_region",
      [&](const std::string& v) { t.sample_tracts_per_region = std::stoi(v); });
  get("households_per_tract",
      [&](const std::string& v) { t.households_per_tract = std::stoi(v); });
  get("pop_log_mean", [&](const std::string& v) { t.pop_log_mean = num(v); });
  get("pop_log_sd", [&](const std::string& v) { t.pop_log_sd = num(v); });
  get("adult_fraction",
      [&](const std::string& v) { t.adult_fraction = num(v); });
  get("nonresponse",
      [&](const std::string& v) { t.nonresponse = parse_list(v); });
  get("sensitivity", [&](const std::string& v) {
    const auto l = parse_list(v);
    if (l.size() != 3) throw IngestError("sensitivity: expected 3 values");
    std::copy(l.begin(), l.end(), t.test_params.sensitivity.begin());
  });
  get("specificity", [&](const std::string& v) {
    const auto l = parse_list(v);
    if (l.size() != 3) throw IngestError("specificity: expected 3 values");
    std::copy(l.begin(), l.end(), t.test_params.specificity.begin());
  });
  get("cov_pos", [&](const std::string& v) { t.test_params.cov_pos = num(v); });
  get("cov_neg", [&](const std::string& v) { t.test_params.cov_neg = num(v); });
  get("missing_prob", [&](const std::string& v) {
    const auto l = parse_list(v);
    if (l.size() != 3) throw IngestError("missing_prob: expected 3 values");
    std::copy(l.begin(), l.end(), t.missing_prob.begin());
  });
  get("age_probs", [&](const std::string& v) {
    const auto l = parse_list(v);
    if (l.size() != 3) throw IngestError("age_probs: expected 3 values");
    std::copy(l.begin(), l.end(), t.age_probs.begin());
  });
  get("sex_probs", [&](const std::string& v) {
    const auto l = parse_list(v);
    if (l.size() != 2) throw IngestError("sex_probs: expected 2 values");
    std::copy(l.begin(), l.end(), t.sex_probs.begin());
  });
  return t;
}

std::string file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open file for hashing: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  char out[20];
  std::snprintf(out, sizeof out, "%016llx",
                static_cast<unsigned long long>(h));
  return out;
}

void write_draws(const std::string& dir, const std::vector<ChainDraws>& chains,
                 const Dataset& data, const SamplerConfig& config) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  if (chains.empty()) throw std::invalid_argument("write_draws: no chains");
  const auto& names = chains.front().param_names;
  const bool has_pi = !chains.front().pi_statewide.empty();

  std::ofstream out(fs::path(dir) / "draws.tsv");
  out << "chain\tdraw";
  for (const auto& n : names) out << '\t' << n;
  if (has_pi) {
    out << "\tpi";
    for (const auto& r : data.regions) out << "\tpi_r." << r;
  }
  out << '\n';
  for (const auto& c : chains) {
    for (std::size_t k = 0; k < c.draws.size(); ++k) {
      out << c.chain_index << '\t' << k;
      for (double v : c.draws[k]) out << '\t' << format_double(v);
      if (has_pi) {
        out << '\t' << format_double(c.pi_statewide[k]);
        for (double v : c.pi_region[k]) out << '\t' << format_double(v);
      }
      out << '\n';
    }
  }

  std::ofstream meta(fs::path(dir) / "meta.txt");
  meta << "version = " << kVersion << '\n';
  meta << "seed = " << config.rng_seed << '\n';
  meta << "n_iterations = " << config.n_iterations << '\n';
  meta << "n_burnin = " << config.n_burnin << '\n';
  meta << "thin_every = " << config.thin_every << '\n';
  meta << "n_chains = " << config.n_chains << '\n';
  meta << "fresh_b_for_all_tracts = "
       << (config.poststrat.fresh_b_for_all_tracts ? 1 : 0) << '\n';
  meta << "flat_intercept = " << (config.flat_intercept ? 1 : 0) << '\n';
  meta << "columns = ";
  for (std::size_t i = 0; i < names.size(); ++i)
    meta << (i ? "," : "") << names[i];
  meta << '\n';
  for (const auto& c : chains)
    for (const auto& b : c.acceptance)
      meta << "accept." << c.chain_index << '.' << b.name << " = "
           << b.accepted << '/' << b.proposed
           << " step=" << format_double(b.step_size) << '\n';
}

LoadedDraws load_draws(const std::string& dir) {
  namespace fs = std::filesystem;
  LoadedDraws out;
  out.meta = read_key_values((fs::path(dir) / "meta.txt").string());
  out.seed = std::stoull(out.meta.at("seed"));
  out.fresh_b_for_all_tracts =
      out.meta.count("fresh_b_for_all_tracts") &&
      out.meta.at("fresh_b_for_all_tracts") == "1";

  std::ifstream in(fs::path(dir) / "draws.tsv");
  if (!in) throw IngestError("cannot open draws.tsv in " + dir);
  std::string line;
  if (!std::getline(in, line)) throw IngestError("draws.tsv is empty");
  const auto header = split(line, '\t');
  std::size_t pi_col = header.size();
  for (std::size_t i = 2; i < header.size(); ++i) {
    if (header[i] == "pi") {
      pi_col = i;
      break;
    }
    out.param_names.push_back(header[i]);
  }

  std::map<int, ChainDraws> by_chain;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split(line, '\t');
    if (fields.size() != header.size())
      throw IngestError("draws.tsv: malformed row");
    const int chain = std::stoi(fields[0]);
    auto& cd = by_chain[chain];
    cd.chain_index = chain;
    cd.param_names = out.param_names;
    std::vector<double> row;
    for (std::size_t i = 2; i < (pi_col == header.size() ? header.size() : pi_col);
         ++i)
      row.push_back(std::stod(fields[i]));
    cd.draws.push_back(std::move(row));
    if (pi_col < header.size()) {
      cd.pi_statewide.push_back(std::stod(fields[pi_col]));
      std::vector<double> regions;
      for (std::size_t i = pi_col + 1; i < header.size(); ++i)
        regions.push_back(std::stod(fields[i]));
      cd.pi_region.push_back(std::move(regions));
    }
  }
  for (auto& [idx, cd] : by_chain) out.chains.push_back(std::move(cd));
  return out;
}

void unpack_draw(const std::vector<std::string>& names,
                 const std::vector<double>& row, const Dataset& data,
                 TestParams& params, RegressionState& state) {
  if (names.size() != row.size())
    throw std::invalid_argument("unpack_draw: names/row size mismatch");
  state.alpha_r.clear();
  state.b_t.clear();
  std::vector<double> alpha_r(data.regions.size(), 0.0);
  bool has_alpha_r = false;
  std::vector<double> b(data.sampled_tracts.size(), 0.0);
  for (std::size_t i = 0; i < names.size(); ++i) {
    const std::string& n = names[i];
    const double v = row[i];
    if (n == "S1") params.sensitivity[0] = v;
    else if (n == "S2") params.sensitivity[1] = v;
    else if (n == "S3") params.sensitivity[2] = v;
    else if (n == "C1") params.specificity[0] = v;
    else if (n == "C2") params.specificity[1] = v;
    else if (n == "C3") params.specificity[2] = v;
    else if (n == "R1") params.cov_pos = v;
    else if (n == "R0") params.cov_neg = v;
    else if (n == "alpha") state.alpha = v;
    else if (n == "beta_age1") state.beta_s[0] = v;
    else if (n == "beta_age2") state.beta_s[1] = v;
    else if (n == "beta_sex") state.beta_s[2] = v;
    else if (n == "beta_logpop") state.beta_t = v;
    else if (n == "sigma") state.sigma2 = v * v;
    else if (n == "tau") state.tau2 = v * v;
    else if (n.rfind("alpha_r.", 0) == 0) {
      const int r = data.region_index(n.substr(8));
      if (r < 0) throw std::invalid_argument("unpack_draw: unknown region " + n);
      alpha_r[r] = v;
      has_alpha_r = true;
    } else if (n.rfind("b.", 0) == 0) {
      const int t = data.tract_index(n.substr(2));
      if (t < 0) throw std::invalid_argument("unpack_draw: unknown tract " + n);
      const auto it = std::find(data.sampled_tracts.begin(),
                                data.sampled_tracts.end(), t);
      if (it == data.sampled_tracts.end())
        throw std::invalid_argument("unpack_draw: tract not sampled: " + n);
      b[static_cast<std::size_t>(it - data.sampled_tracts.begin())] = v;
    } else {
      throw std::invalid_argument("unpack_draw: unknown column " + n);
    }
  }
  if (has_alpha_r) state.alpha_r = std::move(alpha_r);
  state.b_t = std::move(b);
}

void recompute_infection_probs(std::vector<ChainDraws>& chains,
                               const Dataset& data) {
  const auto ws = ModelWorkspace::build(data);
  for (auto& c : chains) {
    c.infection_prob_sum.assign(data.participants.size(), 0.0);
    c.infection_prob_count = 0;
    for (const auto& row : c.draws) {
      TestParams params;
      RegressionState state;
      unpack_draw(c.param_names, row, data, params, state);
      for (int i = 0; i < data.n(); ++i) {
        const double pi = expit(participant_logit(state, ws, i));
        c.infection_prob_sum[i] +=
            latent_full_conditional(data.participants[i].panel, pi, params);
      }
      c.infection_prob_count++;
    }
  }
}

void write_manifest(
    const std::string& dir,
    const std::vector<std::pair<std::string, std::string>>& input_files,
    const std::vector<std::pair<std::string, std::string>>& config_echo) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ofstream out(fs::path(dir) / "manifest.txt");
  out << "version = " << kVersion << '\n';
  for (const auto& [label, path] : input_files)
    out << "input." << label << " = " << path << " fnv1a:" << file_hash(path)
        << '\n';
  for (const auto& [key, value] : config_echo)
    out << key << " = " << value << '\n';
}

}  // namespace seroprev::io
