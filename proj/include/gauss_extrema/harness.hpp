#pragma once

// Experiment configuration, the trial worker pool, the nine experiments and
// report emission (ordered JSON plus CSV tables).

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gauss_extrema/error.hpp"
#include "gauss_extrema/gaussian_measure.hpp"
#include "gauss_extrema/linalg.hpp"
#include "gauss_extrema/norms.hpp"
#include "gauss_extrema/process_sim.hpp"
#include "gauss_extrema/rng.hpp"
#include "gauss_extrema/sequence_extremes.hpp"
#include "gauss_extrema/special.hpp"
#include "gauss_extrema/spectral.hpp"
#include "gauss_extrema/statistics.hpp"

namespace gauss_extrema {

inline constexpr std::string_view kLibraryVersion = "0.1.0";
inline constexpr std::string_view kSeedEnvVar = "GAUSS_EXTREMA_SEED";

using Json = nlohmann::ordered_json;

enum class Experiment {
  MaximaIid,
  MaximaStationary,
  VaryingGamma,
  DarlingErdos,
  OuDecay,
  OuStationarity,
  PathMaxima,
  SpectralLaws,
  Medians,
};

struct ExperimentInfo {
  Experiment id;
  std::string_view name;
  std::string_view summary;
  std::vector<std::string_view> params;
};

inline const std::vector<ExperimentInfo>& experiment_catalog() {
  static const std::vector<ExperimentInfo> catalog = {
      {Experiment::MaximaIid, "maxima-iid", "partial maxima of iid Gaussian vectors against sqrt(2 L n)", {}},
      {Experiment::MaximaStationary, "maxima-stationary",
       "partial maxima of a stationary scalar sequence, compared with the iid case", {"correlation"}},
      {Experiment::VaryingGamma, "varying-gamma", "maxima under covariances Sigma_k converging to Sigma",
       {"schedule"}},
      {Experiment::DarlingErdos, "darling-erdos",
       "Darling-Erdos statistic against the Gumbel law and normalized-sum maxima against sqrt(2 LL n)",
       {"crosscheck_trials"}},
      {Experiment::OuDecay, "ou-decay", "covariance decay of OU unit blocks against the exponential bound",
       {"k_max"}},
      {Experiment::OuStationarity, "ou-stationarity",
       "two-point law and shift invariance of the OU process, with a mutated-recursion control", {"grid", "shift"}},
      {Experiment::PathMaxima, "path-maxima", "grid suprema of the OU process against sqrt(2 L T)", {}},
      {Experiment::SpectralLaws, "spectral-laws",
       "spectral radius, normalized sums and cluster-set distances for random symmetric matrices",
       {"cloud_resolution", "distance_resolution", "t_steps", "export_cloud"}},
      {Experiment::Medians, "medians", "medians of partial maxima against the exact iid median", {}},
  };
  return catalog;
}

inline const ExperimentInfo& experiment_info(Experiment e) {
  for (const auto& info : experiment_catalog())
    if (info.id == e) return info;
  throw Error(ErrorCode::ConfigError, "unknown experiment");
}

inline std::string_view to_string(Experiment e) { return experiment_info(e).name; }

inline Experiment parse_experiment(std::string_view name) {
  for (const auto& info : experiment_catalog())
    if (info.name == name) return info.id;
  throw Error(ErrorCode::ConfigError, "unknown experiment '" + std::string(name) + "'");
}

struct MeasureSpec {
  std::size_t dimension = 0;
  std::string source;  // "preset:<name>", "inline" or "csv:<path>"
  Matrix covariance;
};

struct RunConfig {
  Experiment experiment = Experiment::MaximaIid;
  std::uint64_t seed = 0;
  std::size_t trials = 1;
  std::vector<std::uint64_t> checkpoints;
  MeasureSpec measure;
  NormKind norm = NormKind::Linf;
  double grid_step = 1.0 / 64.0;
  std::string output_dir = "out";
  Json params = Json::object();
};

// Row-major, header-free, comma-separated.
inline Matrix load_covariance_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::ConfigError, "cannot open covariance file " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const auto first = cell.find_first_not_of(" \t");
      const auto last = cell.find_last_not_of(" \t");
      require(first != std::string::npos, ErrorCode::ConfigError, "empty cell in " + path.string());
      const std::string_view token(cell.data() + first, last - first + 1);
      double v = 0.0;
      const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
      require(res.ec == std::errc() && res.ptr == token.data() + token.size(), ErrorCode::ConfigError,
              "bad number '" + std::string(token) + "' in " + path.string());
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), ErrorCode::ConfigError, "covariance file " + path.string() + " is empty");
  for (const auto& r : rows)
    require(r.size() == rows.size(), ErrorCode::ConfigError,
            "covariance file " + path.string() + " is not a square matrix");
  return Matrix::from_rows(rows);
}

inline Matrix covariance_preset(std::string_view name, std::size_t d, double rho) {
  Matrix c(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      if (name == "identity")
        c(i, j) = i == j ? 1.0 : 0.0;
      else if (name == "equicorrelated")
        c(i, j) = i == j ? 1.0 : rho;
      else if (name == "diagonal-ramp")
        c(i, j) = i == j ? static_cast<double>(i + 1) : 0.0;
      else if (name == "toeplitz")
        c(i, j) = std::pow(rho, static_cast<double>(i > j ? i - j : j - i));
      else
        throw Error(ErrorCode::ConfigError, "unknown covariance preset '" + std::string(name) + "'");
    }
  return c;
}

namespace detail {

inline void check_keys(const Json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    require(std::find(allowed.begin(), allowed.end(), it.key()) != allowed.end(), ErrorCode::ConfigError,
            "unknown key '" + it.key() + "' in " + std::string(where));
}

template <class T>
T get_as(const Json& j, std::string_view what) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, "bad value for " + std::string(what) + ": " + e.what());
  }
}

inline std::uint64_t get_u64(const Json& j, std::string_view what) {
  require(j.is_number_unsigned() || (j.is_number_integer() && j.get<std::int64_t>() >= 0), ErrorCode::ConfigError,
          std::string(what) + " must be a non-negative integer");
  return j.get<std::uint64_t>();
}

inline MeasureSpec parse_measure(const Json& j, const std::filesystem::path& base_dir) {
  require(j.is_object(), ErrorCode::ConfigError, "measure must be an object");
  check_keys(j, {"dimension", "covariance", "rho"}, "measure");
  MeasureSpec spec;
  std::optional<std::size_t> dim;
  if (j.contains("dimension")) {
    dim = static_cast<std::size_t>(get_u64(j["dimension"], "measure.dimension"));
    require(*dim >= 1, ErrorCode::ConfigError, "measure.dimension must be positive");
  }
  const double rho = j.contains("rho") ? get_as<double>(j["rho"], "measure.rho") : 0.5;
  const Json cov = j.contains("covariance") ? j["covariance"] : Json("identity");
  if (cov.is_string()) {
    require(dim.has_value(), ErrorCode::ConfigError, "a covariance preset needs measure.dimension");
    const auto name = cov.get<std::string>();
    spec.covariance = covariance_preset(name, *dim, rho);
    spec.source = "preset:" + name;
  } else if (cov.is_array()) {
    std::vector<std::vector<double>> rows;
    for (const auto& r : cov) rows.push_back(get_as<std::vector<double>>(r, "measure.covariance row"));
    require(!rows.empty(), ErrorCode::ConfigError, "inline covariance is empty");
    for (const auto& r : rows)
      require(r.size() == rows.size(), ErrorCode::ConfigError, "inline covariance is not a square matrix");
    spec.covariance = Matrix::from_rows(rows);
    spec.source = "inline";
  } else if (cov.is_object() && cov.contains("csv")) {
    check_keys(cov, {"csv"}, "measure.covariance");
    const auto rel = get_as<std::string>(cov["csv"], "measure.covariance.csv");
    std::filesystem::path p(rel);
    if (p.is_relative()) p = base_dir / p;
    spec.covariance = load_covariance_csv(p);
    spec.source = "csv:" + rel;
  } else {
    throw Error(ErrorCode::ConfigError, "measure.covariance must be a preset name, nested array or {\"csv\": path}");
  }
  spec.dimension = spec.covariance.rows();
  require(!dim || *dim == spec.dimension, ErrorCode::ConfigError,
          "measure.dimension " + std::to_string(dim.value_or(0)) + " does not match the covariance size " +
              std::to_string(spec.dimension));
  return spec;
}

}  // namespace detail

inline RunConfig parse_config(const Json& j, const std::filesystem::path& base_dir = {}) {
  require(j.is_object(), ErrorCode::ConfigError, "config must be a JSON object");
  detail::check_keys(j,
                     {"experiment", "seed", "trials", "n_checkpoints", "measure", "norm", "grid_step", "output_dir",
                      "params"},
                     "config");
  require(j.contains("experiment"), ErrorCode::ConfigError, "config needs 'experiment'");
  RunConfig cfg;
  cfg.experiment = parse_experiment(detail::get_as<std::string>(j["experiment"], "experiment"));
  if (j.contains("seed")) cfg.seed = detail::get_u64(j["seed"], "seed");
  if (j.contains("trials")) cfg.trials = static_cast<std::size_t>(detail::get_u64(j["trials"], "trials"));
  require(cfg.trials >= 1, ErrorCode::ConfigError, "trials must be at least 1");
  if (j.contains("n_checkpoints")) {
    require(j["n_checkpoints"].is_array(), ErrorCode::ConfigError, "n_checkpoints must be a list");
    for (const auto& v : j["n_checkpoints"]) cfg.checkpoints.push_back(detail::get_u64(v, "n_checkpoints entry"));
  } else {
    cfg.checkpoints = {100, 1000, 10000};
  }
  try {
    validate_checkpoints(cfg.checkpoints, std::numeric_limits<std::uint64_t>::max());
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, std::string("n_checkpoints: ") + e.what());
  }
  cfg.measure = detail::parse_measure(j.contains("measure") ? j["measure"] : Json::object(), base_dir);
  if (j.contains("norm")) cfg.norm = parse_norm_kind(detail::get_as<std::string>(j["norm"], "norm"));
  if (j.contains("grid_step")) cfg.grid_step = detail::get_as<double>(j["grid_step"], "grid_step");
  require(cfg.grid_step > 0.0 && cfg.grid_step <= 1.0, ErrorCode::ConfigError, "grid_step must lie in (0, 1]");
  if (j.contains("output_dir")) cfg.output_dir = detail::get_as<std::string>(j["output_dir"], "output_dir");
  if (j.contains("params")) {
    require(j["params"].is_object(), ErrorCode::ConfigError, "params must be an object");
    cfg.params = j["params"];
    const auto& allowed = experiment_info(cfg.experiment).params;
    for (auto it = cfg.params.begin(); it != cfg.params.end(); ++it)
      require(std::find(allowed.begin(), allowed.end(), it.key()) != allowed.end(), ErrorCode::ConfigError,
              "unknown parameter '" + it.key() + "' for experiment " + std::string(to_string(cfg.experiment)));
  }
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::ConfigError, "cannot open config " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, "config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j, path.parent_path());
}

// Seed from the environment, if set. Rejects anything but a plain decimal.
inline std::optional<std::uint64_t> seed_from_env() {
  const char* raw = std::getenv(std::string(kSeedEnvVar).c_str());
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  const std::string_view s(raw);
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  require(res.ec == std::errc() && res.ptr == s.data() + s.size(), ErrorCode::ConfigError,
          std::string(kSeedEnvVar) + " must be an unsigned 64-bit integer");
  return v;
}

// Everything that determines the results. The output directory is left out.
inline Json canonical_config(const RunConfig& cfg) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < cfg.measure.covariance.rows(); ++i) {
    Json row = Json::array();
    for (std::size_t k = 0; k < cfg.measure.covariance.cols(); ++k) row.push_back(cfg.measure.covariance(i, k));
    rows.push_back(std::move(row));
  }
  Json j;
  j["experiment"] = std::string(to_string(cfg.experiment));
  j["seed"] = cfg.seed;
  j["trials"] = cfg.trials;
  j["n_checkpoints"] = cfg.checkpoints;
  j["measure"] = Json{{"dimension", cfg.measure.dimension}, {"source", cfg.measure.source}, {"covariance", rows}};
  j["norm"] = std::string(to_string(cfg.norm));
  j["grid_step"] = cfg.grid_step;
  j["params"] = cfg.params;
  return j;
}

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string config_hash(const RunConfig& cfg) {
  const std::uint64_t h = fnv1a64(canonical_config(cfg).dump());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Shortest text that reads back to the same double.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  template <class... Cells>
  void add(const Cells&... cells) {
    std::vector<std::string> row;
    (row.push_back(cell(cells)), ...);
    rows.push_back(std::move(row));
  }

  std::string csv() const {
    std::string out;
    for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + columns[c];
    out += '\n';
    for (const auto& r : rows) {
      for (std::size_t c = 0; c < r.size(); ++c) out += (c ? "," : "") + r[c];
      out += '\n';
    }
    return out;
  }

 private:
  static std::string cell(double v) { return format_number(v); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(std::string_view s) { return std::string(s); }
  static std::string cell(bool b) { return b ? "true" : "false"; }
  template <class I>
    requires std::is_integral_v<I>
  static std::string cell(I v) {
    return std::to_string(v);
  }
};

struct Assertion {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ExperimentReport {
  RunConfig config;
  std::string hash;
  Json results = Json::object();
  std::vector<Assertion> assertions;
  std::vector<Table> tables;
  double wall_seconds = 0.0;  // kept out of the JSON so reruns compare equal

  bool passed() const {
    return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.passed; });
  }

  Json to_json() const {
    Json j;
    j["experiment"] = std::string(to_string(config.experiment));
    j["library_version"] = std::string(kLibraryVersion);
    j["config_hash"] = hash;
    j["master_seed"] = config.seed;
    j["config"] = canonical_config(config);
    j["results"] = results;
    Json list = Json::array();
    for (const auto& a : assertions) list.push_back(Json{{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}});
    j["assertions"] = std::move(list);
    j["passed"] = passed();
    return j;
  }

  std::string file_stem() const { return std::string(to_string(config.experiment)) + "-" + hash; }
};

// Runs fn(i) for i in [0, count) on a fixed pool and returns the results in
// index order, so the output never depends on scheduling.
template <class Fn>
auto run_trials(std::size_t count, std::size_t workers, Fn&& fn) {
  using T = std::invoke_result_t<Fn&, std::size_t>;
  std::vector<std::optional<T>> slots(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  const auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next.store(count);
      }
    }
  };
  const std::size_t pool = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (pool == 1) {
    work();
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(pool);
    for (std::size_t w = 0; w < pool; ++w) threads.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<T> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

namespace detail {

// Stream tags keep auxiliary randomness apart from the trial streams.
inline constexpr std::uint64_t kBootstrapTag = 0xb007;
inline constexpr std::uint64_t kComparisonTag = 0xc0de;
inline constexpr std::uint64_t kCrossCheckTag = 0xc4ec;
inline constexpr std::uint64_t kDecayTag = 0xdeca;
inline constexpr std::uint64_t kStationarityTag = 0x57a7;

inline Json summary_json(const SummaryRow& r) {
  return Json{{"median", r.median}, {"q10", r.q10}, {"q90", r.q90}, {"se", r.se}, {"count", r.count}};
}

inline SummaryRow summary_of(std::span<const double> data, std::uint64_t seed, std::uint64_t column,
                             std::uint64_t row) {
  return summarize(data, RngStream(seed, row, kBootstrapTag + column));
}

inline std::vector<double> column(std::span<const MaximaTrace> traces, std::size_t c, bool centered) {
  std::vector<double> out;
  out.reserve(traces.size());
  for (const auto& t : traces) out.push_back(centered ? t.checkpoints[c].centered : t.checkpoints[c].max_value);
  return out;
}

inline Table trace_table(std::string name, std::span<const MaximaTrace> traces) {
  Table t{std::move(name), {"n", "max", "centered", "trial"}, {}};
  for (std::size_t trial = 0; trial < traces.size(); ++trial)
    for (const auto& c : traces[trial].checkpoints) t.add(c.n, c.max_value, c.centered, trial);
  return t;
}

inline std::string fmt(double v) { return format_number(v); }

inline Assertion check(std::string name, bool ok, std::string detail) {
  return {std::move(name), ok, std::move(detail)};
}

inline std::vector<double> abs_values(std::vector<double> v) {
  for (double& x : v) x = std::abs(x);
  return v;
}

inline bool monotone(const MaximaTrace& t) {
  for (std::size_t i = 1; i < t.checkpoints.size(); ++i)
    if (t.checkpoints[i].max_value < t.checkpoints[i - 1].max_value) return false;
  return true;
}

// Median of |centered| at the first and last checkpoints: a strict decrease
// is the finite-n surrogate for the centered maxima tending to zero.
inline Assertion shrink_check(std::string name, double first, double last, std::uint64_t n_first,
                              std::uint64_t n_last) {
  return check(std::move(name), std::abs(last) < std::abs(first),
               "|median| " + fmt(std::abs(first)) + " at n=" + std::to_string(n_first) + ", " + fmt(std::abs(last)) +
                   " at n=" + std::to_string(n_last));
}

inline NormSpec norm_for(const RunConfig& cfg) { return NormSpec::make(cfg.norm, cfg.measure.dimension); }

inline GaussianMeasure measure_for(const RunConfig& cfg) {
  return GaussianMeasure(cfg.measure.covariance, cfg.measure.source);
}

inline double median_abs_centered(std::span<const MaximaTrace> traces, std::size_t c) {
  return median(abs_values(column(traces, c, true)));
}

inline Assertion abs_shrink_check(const RunConfig& cfg, std::span<const MaximaTrace> traces) {
  const std::size_t last = cfg.checkpoints.size() - 1;
  const double a = median_abs_centered(traces, 0);
  const double b = median_abs_centered(traces, last);
  return check("abs-centered-median-shrinks", b < a,
               "median |centered| " + fmt(a) + " at n=" + std::to_string(cfg.checkpoints.front()) + ", " + fmt(b) +
                   " at n=" + std::to_string(cfg.checkpoints.back()));
}

inline Json checkpoint_rows(const RunConfig& cfg, std::span<const MaximaTrace> traces, std::uint64_t column_base) {
  Json rows = Json::array();
  for (std::size_t c = 0; c < cfg.checkpoints.size(); ++c) {
    const auto centered = column(traces, c, true);
    rows.push_back(Json{{"n", cfg.checkpoints[c]},
                        {"max", summary_json(summary_of(column(traces, c, false), cfg.seed, column_base, c))},
                        {"centered", summary_json(summary_of(centered, cfg.seed, column_base + 1, c))},
                        {"abs_centered_median", median(abs_values(centered))}});
  }
  return rows;
}

// ---------------------------------------------------------------- maxima-iid, medians

inline std::vector<IidMaxima> iid_runs(const RunConfig& cfg, std::size_t workers, const GaussianMeasure& m,
                                       const NormSpec& q, const DualWitness& w) {
  return run_trials(cfg.trials, workers, [&](std::size_t t) {
    auto s = derive_stream(cfg.seed, t);
    return iid_maxima(m, q, w.gamma, w.f0, cfg.checkpoints, s);
  });
}

inline void run_maxima_iid(ExperimentReport& rep, std::size_t workers) {
  const auto& cfg = rep.config;
  const auto m = measure_for(cfg);
  const auto q = norm_for(cfg);
  const auto w = extremal_witness(m, q);
  const auto runs = iid_runs(cfg, workers, m, q, w);
  std::vector<MaximaTrace> norm_traces;
  for (const auto& r : runs) norm_traces.push_back(r.norm);
  rep.results["gamma"] = w.gamma;
  rep.results["checkpoints"] = checkpoint_rows(cfg, norm_traces, 0);
  rep.tables.push_back(trace_table("traces", norm_traces));

  const bool mono = std::all_of(norm_traces.begin(), norm_traces.end(), monotone);
  rep.assertions.push_back(check("running-max-monotone", mono, "every trace non-decreasing in n"));
  if (cfg.checkpoints.size() >= 2) rep.assertions.push_back(abs_shrink_check(cfg, norm_traces));
}

inline constexpr std::uint64_t kOracleMaxN = 10000;

inline void run_medians(ExperimentReport& rep, std::size_t workers) {
  const auto& cfg = rep.config;
  const auto m = measure_for(cfg);
  const auto q = norm_for(cfg);
  const auto w = extremal_witness(m, q);
  const auto runs = iid_runs(cfg, workers, m, q, w);
  std::vector<MaximaTrace> signed_traces, norm_traces;
  for (const auto& r : runs) {
    signed_traces.push_back(r.signed_max);
    norm_traces.push_back(r.norm);
  }
  rep.results["gamma"] = w.gamma;
  Json rows = Json::array();
  Table summary{"summary", {"n", "median", "se", "oracle", "z", "median_centered"}, {}};
  for (std::size_t c = 0; c < cfg.checkpoints.size(); ++c) {
    const std::uint64_t n = cfg.checkpoints[c];
    const auto maxima = column(signed_traces, c, false);
    const auto s = summary_of(maxima, cfg.seed, 0, c);
    const double oracle = median_oracle_iid(n);
    const double z = s.se > 0.0 ? (s.median - oracle) / s.se : 0.0;
    const double med_centered = median(column(signed_traces, c, true));
    rows.push_back(Json{{"n", n},
                        {"signed_max", summary_json(s)},
                        {"oracle", oracle},
                        {"z", z},
                        {"median_centered", med_centered},
                        {"norm_centered", summary_json(summary_of(column(norm_traces, c, true), cfg.seed, 1, c))}});
    summary.add(n, s.median, s.se, oracle, z, med_centered);
    if (n <= kOracleMaxN)
      rep.assertions.push_back(check("median-oracle-n" + std::to_string(n), std::abs(z) <= 3.0,
                                     "median " + fmt(s.median) + " vs " + fmt(oracle) + ", " + fmt(z) + " SE"));
  }
  rep.results["checkpoints"] = std::move(rows);
  rep.tables.push_back(std::move(summary));
  rep.tables.push_back(trace_table("signed-traces", signed_traces));
  rep.tables.push_back(trace_table("traces", norm_traces));

  if (cfg.checkpoints.size() >= 2) {
    const std::size_t last = cfg.checkpoints.size() - 1;
    rep.assertions.push_back(shrink_check("centered-median-shrinks", median(column(signed_traces, 0, true)),
                                          median(column(signed_traces, last, true)), cfg.checkpoints.front(),
                                          cfg.checkpoints.back()));
    // Independent halves of the trials give the symmetrized differences.
    const std::size_t half = cfg.trials / 2;
    if (half >= kMinSymmetrizationTrials) {
      const auto gap_at = [&](std::size_t c) {
        const auto all = column(signed_traces, c, false);
        return symmetrization_gap(std::span(all).first(half), std::span(all).subspan(half, half));
      };
      const auto g0 = gap_at(0);
      const auto g1 = gap_at(last);
      rep.results["symmetrization"] = Json{{"first", Json{{"median", g0.median}, {"q90", g0.q90}}},
                                           {"last", Json{{"median", g1.median}, {"q90", g1.q90}}}};
      rep.assertions.push_back(check("symmetrization-gap-shrinks", g1.median < g0.median,
                                     "median gap " + fmt(g0.median) + " -> " + fmt(g1.median)));
    }
  }
}

// ---------------------------------------------------------------- maxima-stationary

inline CorrelationModel correlation_from(const Json& p, std::uint64_t n_max) {
  const Json spec = p.contains("correlation") ? p["correlation"] : Json{{"kind", "exp-half"}};
  require(spec.is_object() && spec.contains("kind"), ErrorCode::ConfigError,
          "params.correlation must be an object with 'kind'");
  check_keys(spec, {"kind", "rate"}, "params.correlation");
  const auto kind = get_as<std::string>(spec["kind"], "params.correlation.kind");
  if (kind == "iid") return CorrelationModel::iid();
  if (kind == "exp-half") return CorrelationModel::geometric(std::exp(-0.5));
  if (kind == "geometric") {
    require(spec.contains("rate"), ErrorCode::ConfigError, "geometric correlation needs 'rate'");
    const double rate = get_as<double>(spec["rate"], "params.correlation.rate");
    require(rate >= 0.0 && rate < 1.0, ErrorCode::ConfigError, "geometric rate must lie in [0, 1)");
    return CorrelationModel::geometric(rate);
  }
  if (kind == "inverse-log")
    return CorrelationModel::tabulated(
        [](std::uint64_t k) { return k == 0 ? 1.0 : 1.0 / std::log(static_cast<double>(k) + 2.0); }, n_max);
  if (kind == "inverse-sqrt")
    return CorrelationModel::tabulated([](std::uint64_t k) { return 1.0 / std::sqrt(static_cast<double>(k) + 1.0); },
                                       n_max);
  throw Error(ErrorCode::ConfigError, "unknown correlation kind '" + kind + "'");
}

inline constexpr double kIidMatchTolerance = 0.1;

inline void run_maxima_stationary(ExperimentReport& rep, std::size_t workers) {
  const auto& cfg = rep.config;
  require(cfg.measure.dimension == 1, ErrorCode::ConfigError, "maxima-stationary is scalar: measure.dimension must be 1");
  const std::uint64_t n = cfg.checkpoints.back();
  const auto model = correlation_from(cfg.params, n);
  const StationaryGenerator gen(model, static_cast<std::size_t>(n));
  const double gamma = std::sqrt(model(0));
  const auto q = norm_for(cfg);
  const auto traces = run_trials(cfg.trials, workers, [&](std::size_t t) {
    auto s = derive_stream(cfg.seed, t);
    auto x = gen.sample(s);
    for (double& v : x) v = q(std::span<const double>(&v, 1)) / gamma;
    return partial_maxima(x, cfg.checkpoints);
  });
  const auto iid = run_trials(cfg.trials, workers, [&](std::size_t t) {
    RngStream s(cfg.seed, t, kComparisonTag);
    std::vector<double> x(n);
    for (double& v : x) v = std::abs(s.next_normal());
    return partial_maxima(x, cfg.checkpoints);
  });
  const auto berman = berman_condition(model, n);
  const auto logc = log_condition(model, n);
  rep.results["gamma"] = gamma;
  rep.results["berman_convergent"] = berman.convergent;
  rep.results["log_condition_convergent"] = logc.convergent;
  rep.results["clipped_pivots"] = gen.clipped_pivots();
  rep.results["checkpoints"] = checkpoint_rows(cfg, traces, 0);
  rep.results["iid_checkpoints"] = checkpoint_rows(cfg, iid, 2);
  rep.tables.push_back(trace_table("traces", traces));
  Table cond{"conditions", {"n", "n_r_n", "log_n_r_n"}, {}};
  for (std::size_t i = 0; i < berman.rows.size(); ++i)
    cond.add(berman.rows[i].first, berman.rows[i].second, logc.rows[i].second);
  rep.tables.push_back(std::move(cond));

  const std::size_t last = cfg.checkpoints.size() - 1;
  if (cfg.checkpoints.size() >= 2) rep.assertions.push_back(abs_shrink_check(cfg, traces));
  const double a = median(abs_values(column(traces, last, true)));
  const double b = median(abs_values(column(iid, last, true)));
  rep.assertions.push_back(check("matches-iid-at-last", std::abs(a - b) <= kIidMatchTolerance,
                                 "median |centered| " + fmt(a) + " vs iid " + fmt(b)));
}

// ---------------------------------------------------------------- varying-gamma

inline void run_varying_gamma(ExperimentReport& rep, std::size_t workers) {
  const auto& cfg = rep.config;
  const auto base = measure_for(cfg);
  const auto q = norm_for(cfg);
  const std::string schedule =
      cfg.params.contains("schedule") ? get_as<std::string>(cfg.params["schedule"], "params.schedule") : "inverse-k";
  std::function<double(double)> factor;
  bool expect_convergent = true;
  if (schedule == "inverse-k") {
    factor = [](double k) { return 1.0 + 1.0 / k; };
  } else if (schedule == "inverse-sqrt-log") {
    factor = [](double k) { return 1.0 + 1.0 / std::sqrt(big_l(k)); };
    expect_convergent = false;
  } else if (schedule == "constant") {
    factor = [](double) { return 1.0; };
  } else {
    throw Error(ErrorCode::ConfigError, "unknown schedule '" + schedule + "'");
  }
  const std::uint64_t n = cfg.checkpoints.back();
  std::vector<GaussianMeasure> measures;
  measures.reserve(n);
  for (std::uint64_t k = 1; k <= n; ++k) measures.push_back(base.scaled(factor(static_cast<double>(k))));
  const auto gammas = measure_gammas(measures, q);
  const double limit = dual_sigma(base, q);
  const auto runs = run_trials(cfg.trials, workers, [&](std::size_t t) {
    auto s = derive_stream(cfg.seed, t);
    auto r = varying_gamma_maxima(measures, gammas, limit, q, cfg.checkpoints, s);
    r.condition.rows.clear();
    r.gammas.clear();
    return r;
  });
  std::vector<MaximaTrace> tilde, plain;
  for (const auto& r : runs) {
    tilde.push_back(r.tilde);
    plain.push_back(r.plain);
  }
  ConditionDiagnostic cond;
  for (std::uint64_t k = 1; k <= n; ++k)
    cond.rows.emplace_back(k, std::abs(gammas[k - 1] / limit - 1.0) * std::sqrt(big_l(static_cast<double>(k))));
  cond.convergent = eventually_small_and_decreasing(cond.rows);

  rep.results["limit_gamma"] = limit;
  rep.results["schedule"] = schedule;
  rep.results["condition_convergent"] = cond.convergent;
  rep.results["tilde"] = checkpoint_rows(cfg, tilde, 0);
  rep.results["plain"] = checkpoint_rows(cfg, plain, 2);
  rep.tables.push_back(trace_table("tilde-traces", tilde));
  rep.tables.push_back(trace_table("plain-traces", plain));
  Table ct{"condition", {"k", "gamma_k", "value"}, {}};
  for (std::uint64_t k = 1; k <= n; ++k)
    if (k <= 10 || k == n || k % (n / std::min<std::uint64_t>(n, 1000)) == 0)
      ct.add(k, gammas[k - 1], cond.rows[k - 1].second);
  rep.tables.push_back(std::move(ct));

  rep.assertions.push_back(check("condition-flag", cond.convergent == expect_convergent,
                                 std::string("condition ") + (cond.convergent ? "convergent" : "violating") +
                                     " for schedule " + schedule));
  if (schedule == "constant")
    rep.assertions.push_back(check("tilde-equals-plain", tilde == plain, "identical traces when Sigma_k = Sigma"));
  if (cfg.checkpoints.size() >= 2) rep.assertions.push_back(abs_shrink_check(cfg, tilde));
}

// ---------------------------------------------------------------- darling-erdos

struct DarlingErdosTrial {
  std::vector<double> statistic;  // per checkpoint
  std::vector<double> normalized;  // per checkpoint
};

inline void run_darling_erdos(ExperimentReport& rep, std::size_t workers) {
  const auto& cfg = rep.config;
  require(cfg.checkpoints.front() >= kMinDarlingErdosLength, ErrorCode::ConfigError,
          "darling-erdos needs checkpoints >= 3");
  const auto m = measure_for(cfg);
  const auto q = norm_for(cfg);
  const auto w = extremal_witness(m, q);
  const std::uint64_t n = cfg.checkpoints.back();
  const std::size_t d = m.dim();
  const auto runs = run_trials(cfg.trials, workers, [&](std::size_t t) {
    auto s = derive_stream(cfg.seed, t);
    std::vector<double> g(n * d), xi(n);
    Vector z(d);
    for (std::uint64_t k = 0; k < n; ++k) {
      const std::span<double> gk(g.data() + k * d, d);
      m.sample_into(s, gk, z);
      xi[k] = dot(w.f0, gk) / w.gamma;
    }
    DarlingErdosTrial out;
    for (std::uint64_t c : cfg.checkpoints) {
      out.statistic.push_back(darling_erdos_statistic(std::span(xi).first(c)));
      out.normalized.push_back(normalized_sum_maxima(std::span(g).first(c * d), q, w.gamma));
    }
    return out;
  });

  const std::size_t cross = cfg.params.contains("crosscheck_trials")
                                ? static_cast<std::size_t>(get_u64(cfg.params["crosscheck_trials"], "crosscheck_trials"))
                                : 20;
  const auto checks = run_trials(cross, workers, [&](std::size_t t) {
    RngStream s(cfg.seed, t, kCrossCheckTag);
    return darling_erdos_ou_crosscheck(static_cast<std::size_t>(cfg.checkpoints.front()), s);
  });
  const bool exact = std::all_of(checks.begin(), checks.end(), [](const OuIdentityCheck& c) { return c.exact; });

  Json rows = Json::array();
  Table summary{"summary", {"n", "alpha", "beta", "ks", "statistic_median", "normalized_median", "normalized_se"}, {}};
  std::vector<double> ks, norm_medians;
  Table stats{"statistics", {"n", "trial", "statistic", "normalized"}, {}};
  for (std::size_t c = 0; c < cfg.checkpoints.size(); ++c) {
    std::vector<double> st, nm;
    for (std::size_t t = 0; t < runs.size(); ++t) {
      st.push_back(runs[t].statistic[c]);
      nm.push_back(runs[t].normalized[c]);
      stats.add(cfg.checkpoints[c], t, runs[t].statistic[c], runs[t].normalized[c]);
    }
    std::vector<double> sorted = st;
    std::sort(sorted.begin(), sorted.end());
    ks.push_back(ks_statistic(sorted, gumbel_cdf));
    const auto consts = darling_erdos_constants(static_cast<double>(cfg.checkpoints[c]));
    const auto ns = summary_of(nm, cfg.seed, 1, c);
    norm_medians.push_back(ns.median);
    rows.push_back(Json{{"n", cfg.checkpoints[c]},
                        {"alpha", consts.alpha},
                        {"beta", consts.beta},
                        {"ks", ks.back()},
                        {"statistic", summary_json(summary_of(st, cfg.seed, 0, c))},
                        {"normalized", summary_json(ns)}});
    summary.add(cfg.checkpoints[c], consts.alpha, consts.beta, ks.back(), median(st), ns.median, ns.se);
  }
  rep.results["gamma"] = w.gamma;
  rep.results["checkpoints"] = std::move(rows);
  rep.results["ou_identity_checks"] = cross;
  rep.tables.push_back(std::move(summary));
  rep.tables.push_back(std::move(stats));

  if (cfg.checkpoints.size() >= 2)
    rep.assertions.push_back(check("ks-decreases", ks.back() < ks.front(),
                                   "KS " + fmt(ks.front()) + " at n=" + std::to_string(cfg.checkpoints.front()) +
                                       ", " + fmt(ks.back()) + " at n=" + std::to_string(n)));
  bool toward_zero = true;
  std::string trail;
  for (std::size_t c = 0; c < norm_medians.size(); ++c) {
    if (c > 0 && !(std::abs(norm_medians[c]) < std::abs(norm_medians[c - 1]))) toward_zero = false;
    trail += (c ? " -> " : "") + fmt(norm_medians[c]);
  }
  if (norm_medians.size() >= 2)
    rep.assertions.push_back(check("normalized-sum-toward-zero", toward_zero, "medians " + trail));
  rep.assertions.push_back(check("ou-identity-exact", exact,
                                 std::to_string(cross) + " shared-path checks at n=" +
                                     std::to_string(cfg.checkpoints.front())));
}

// ---------------------------------------------------------------- ou-decay

inline std::vector<std::pair<std::string, BlockFunctional>> decay_functionals(const GaussianMeasure& m,
                                                                              const NormSpec& q,
                                                                              const DualWitness& w) {
  Vector e1(m.dim(), 0.0);
  e1[0] = 1.0;
  const double e1_norm = q.dual(e1);
  for (double& v : e1) v /= e1_norm;
  return {
      {"eval-0", BlockFunctional{{{0.0, 1.0, w.f0}}}},
      {"two-point", BlockFunctional{{{0.0, 1.0, w.f0}, {1.0, -1.0, w.f0}}}},
      {"three-point", BlockFunctional{{{0.0, 0.5, w.f0}, {0.5, -1.0, e1}, {1.0, 0.25, w.f0}}}},
  };
}

inline void run_ou_decay(ExperimentReport& rep, std::size_t workers) {
  const auto& cfg = rep.config;
  const auto m = measure_for(cfg);
  const auto q = norm_for(cfg);
  const auto w = extremal_witness(m, q);
  const std::uint64_t k_max = cfg.params.contains("k_max") ? get_u64(cfg.params["k_max"], "params.k_max") : 8;
  require(k_max >= 2, ErrorCode::ConfigError, "params.k_max must be at least 2");
  const auto fns = decay_functionals(m, q, w);
  struct Case {
    std::size_t fn;
    std::uint64_t k;
  };
  std::vector<Case> cases;
  for (std::size_t f = 0; f < fns.size(); ++f)
    for (std::uint64_t k = 2; k <= k_max; ++k) cases.push_back({f, k});
  const auto results = run_trials(cases.size(), workers, [&](std::size_t i) {
    return covariance_decay(m, q, fns[cases[i].fn].second, cases[i].k, cfg.trials, cfg.seed, kDecayTag + i);
  });
  Json rows = Json::array();
  Table table{"decay", {"functional", "k", "norm", "estimate", "se", "bound", "closed_form", "ratio"}, {}};
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& [name, h] = fns[cases[i].fn];
    const auto& r = results[i];
    const double ratio = r.closed_form / r.bound;
    rows.push_back(Json{{"functional", name},
                        {"k", cases[i].k},
                        {"norm", h.norm(q)},
                        {"estimate", r.estimate},
                        {"se", r.standard_error},
                        {"bound", r.bound},
                        {"closed_form", r.closed_form}});
    table.add(name, cases[i].k, h.norm(q), r.estimate, r.standard_error, r.bound, r.closed_form, ratio);
    const std::string tag = name + "-k" + std::to_string(cases[i].k);
    rep.assertions.push_back(check("bound-" + tag, r.estimate - 3.0 * r.standard_error <= r.bound,
                                   fmt(r.estimate) + " - 3*" + fmt(r.standard_error) + " vs bound " + fmt(r.bound)));
    rep.assertions.push_back(
        check("closed-form-" + tag, std::abs(r.estimate - r.closed_form) <= 3.0 * r.standard_error,
              fmt(r.estimate) + " vs " + fmt(r.closed_form) + " (SE " + fmt(r.standard_error) + ")"));
  }
  rep.results["sigma"] = w.gamma;
  rep.results["cases"] = std::move(rows);
  rep.tables.push_back(std::move(table));
}

// ---------------------------------------------------------------- ou-stationarity

inline void run_ou_stationarity(ExperimentReport& rep, std::size_t workers) {
  const auto& cfg = rep.config;
  const auto m = measure_for(cfg);
  const std::vector<double> grid = cfg.params.contains("grid")
                                       ? get_as<std::vector<double>>(cfg.params["grid"], "params.grid")
                                       : std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0};
  const double shift = cfg.params.contains("shift") ? get_as<double>(cfg.params["shift"], "params.shift") : 1.0;
  require(grid.size() >= 2, ErrorCode::ConfigError, "params.grid needs at least two times");
  require(shift > 0.0, ErrorCode::ConfigError, "params.shift must be positive");
  const double dt = cfg.grid_step;
  const auto exact = ou_exact_coefficients(dt);
  // The control uses e^{-dt} in place of e^{-dt/2}.
  const OuCoefficients mutated{std::exp(-dt), exact.noise};
  struct Outcome {
    CovarianceCheck cov;
    StationarityResult stat;
  };
  const auto out = run_trials(4, workers, [&](std::size_t task) {
    const auto coeff = task % 2 == 0 ? exact : mutated;
    Outcome o;
    if (task < 2)
      o.cov = ou_covariance_check(m, grid, dt, cfg.trials, cfg.seed, coeff, kStationarityTag + task);
    else
      o.stat = stationarity_check(m, shift, grid, dt, cfg.trials, cfg.seed, coeff, kStationarityTag + task);
    return o;
  });
  const auto& cov = out[0].cov;
  const auto& cov_mut = out[1].cov;
  const auto& stat = out[2].stat;
  const auto& stat_mut = out[3].stat;
  rep.results["grid"] = grid;
  rep.results["shift"] = shift;
  rep.results["covariance"] = Json{{"max_z", cov.max_z}, {"marginal_max_z", cov.marginal_max_z},
                                   {"max_abs_error", cov.max_abs_error}};
  rep.results["stationarity"] = Json{{"max_discrepancy", stat.max_discrepancy}, {"max_z", stat.max_z}};
  rep.results["mutated_covariance"] = Json{{"max_z", cov_mut.max_z}, {"marginal_max_z", cov_mut.marginal_max_z},
                                           {"max_abs_error", cov_mut.max_abs_error}};
  rep.results["mutated_stationarity"] =
      Json{{"max_discrepancy", stat_mut.max_discrepancy}, {"max_z", stat_mut.max_z}};
  Table t{"checks", {"recursion", "check", "max_z", "max_abs"}, {}};
  t.add("exact", "two-point", cov.max_z, cov.max_abs_error);
  t.add("exact", "shift", stat.max_z, stat.max_discrepancy);
  t.add("mutated", "two-point", cov_mut.max_z, cov_mut.max_abs_error);
  t.add("mutated", "shift", stat_mut.max_z, stat_mut.max_discrepancy);
  rep.tables.push_back(std::move(t));
  rep.assertions.push_back(check("two-point-covariance", cov.max_z <= 4.0, "max " + fmt(cov.max_z) + " SE"));
  rep.assertions.push_back(
      check("marginal-covariance", cov.marginal_max_z <= 4.0, "max " + fmt(cov.marginal_max_z) + " SE"));
  rep.assertions.push_back(check("shift-invariance", stat.max_z <= 6.0, "max " + fmt(stat.max_z) + " SE"));
  rep.assertions.push_back(
      check("mutation-detected", stat_mut.max_z > 6.0, "mutated recursion at " + fmt(stat_mut.max_z) + " SE"));
}

// ---------------------------------------------------------------- path-maxima

inline void run_path_maxima(ExperimentReport& rep, std::size_t workers) {
  const auto& cfg = rep.config;
  const auto m = measure_for(cfg);
  const auto q = norm_for(cfg);
  const double gamma = dual_sigma(m, q);
  const double dt = cfg.grid_step;
  const auto traces = run_trials(cfg.trials, workers, [&](std::size_t t) {
    auto s = derive_stream(cfg.seed, t);
    return ou_sup_trace(m, q, gamma, dt, cfg.checkpoints, s);
  });
  rep.results["gamma"] = gamma;
  rep.results["grid_step"] = dt;
  rep.results["checkpoints"] = checkpoint_rows(cfg, traces, 0);
  rep.tables.push_back(trace_table("traces", traces));

  // Block identity on a short path from the first trial stream.
  const std::uint64_t blocks = std::min<std::uint64_t>(cfg.checkpoints.front(), 16);
  const auto per_unit = static_cast<std::size_t>(std::llround(1.0 / dt));
  bool block_ok = std::abs(1.0 / dt - static_cast<double>(per_unit)) < 1e-9;
  if (block_ok) {
    auto s = derive_stream(cfg.seed, 0);
    const auto path = ou_path(m, dt, static_cast<std::size_t>(blocks) * per_unit, s);
    const auto fam = extract_blocks(path);
    double block_max = 0.0;
    for (const auto& b : fam.blocks) block_max = std::max(block_max, path_sup(b, q));
    block_ok = block_max == path_sup(path, q);
  }
  rep.assertions.push_back(check("block-sup-identity", block_ok,
                                 "sup over [0," + std::to_string(blocks) + "] against the maximum of block sups"));
  if (cfg.checkpoints.size() >= 2) rep.assertions.push_back(abs_shrink_check(cfg, traces));
}

// ---------------------------------------------------------------- spectral-laws

inline void run_spectral_laws(ExperimentReport& rep, std::size_t workers) {
  const auto& cfg = rep.config;
  const std::size_t side = side_from_packed(cfg.measure.dimension);
  require(side > 0, ErrorCode::ConfigError, "spectral-laws needs measure.dimension = m(m+1)/2");
  require(cfg.norm == NormKind::OperatorSym, ErrorCode::ConfigError, "spectral-laws needs norm operator-sym");
  const auto m = measure_for(cfg);
  SpectralOptions opt;
  const auto& p = cfg.params;
  if (p.contains("cloud_resolution"))
    opt.cloud_resolution = static_cast<std::size_t>(get_u64(p["cloud_resolution"], "params.cloud_resolution"));
  if (p.contains("distance_resolution"))
    opt.distance_resolution =
        static_cast<std::size_t>(get_u64(p["distance_resolution"], "params.distance_resolution"));
  if (p.contains("t_steps")) opt.cloud.t_steps = static_cast<std::size_t>(get_u64(p["t_steps"], "params.t_steps"));
  const bool export_cloud = p.contains("export_cloud") && get_as<bool>(p["export_cloud"], "params.export_cloud");
  const auto setup = SpectralSetup::make(m, side, opt);
  const auto trials = run_trials(cfg.trials, workers, [&](std::size_t t) {
    auto s = derive_stream(cfg.seed, t);
    return spectral_trial(setup, cfg.checkpoints, s);
  });
  const auto report = summarize_spectral(setup, trials, cfg.seed);

  Json rows = Json::array();
  Table summary{"summary",
                {"n", "radius_median", "radius_se", "sum_median", "sum_se", "k_distance_median", "k_distance_se",
                 "cluster_distance_median", "cluster_distance_se"},
                {}};
  for (const auto& r : report.rows) {
    rows.push_back(Json{{"n", r.n},
                        {"radius_centered", summary_json(r.radius)},
                        {"sum_centered", summary_json(r.sum)},
                        {"k_distance", summary_json(r.k_distance)},
                        {"cluster_distance", summary_json(r.cluster_distance)}});
    summary.add(r.n, r.radius.median, r.radius.se, r.sum.median, r.sum.se, r.k_distance.median, r.k_distance.se,
                r.cluster_distance.median, r.cluster_distance.se);
  }
  Table per_trial{"trials", {"trial", "n", "radius_centered", "sum_centered", "k_distance", "cluster_distance"}, {}};
  std::vector<MaximaTrace> radius_traces;
  double worst_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < trials.size(); ++t) {
    radius_traces.push_back(trials[t].radius_trace);
    worst_margin = std::max(worst_margin, trials[t].worst_lipschitz_margin);
    for (const auto& r : trials[t].rows)
      per_trial.add(t, r.n, r.radius_centered, r.sum_centered, r.k_distance, r.cluster_distance);
  }
  rep.results["side"] = side;
  rep.results["gamma"] = report.big_gamma;
  rep.results["cloud"] = Json{{"resolution", setup.cloud.resolution},
                              {"t_steps", setup.cloud.t_steps},
                              {"size", report.cloud_size},
                              {"stability", report.cloud_stability},
                              {"slack", report.cloud_slack}};
  rep.results["lipschitz_violations"] = report.lipschitz_violations;
  rep.results["checkpoints"] = std::move(rows);
  rep.tables.push_back(std::move(summary));
  rep.tables.push_back(std::move(per_trial));
  rep.tables.push_back(trace_table("radius-traces", radius_traces));
  if (export_cloud) {
    Table cloud{"cloud", {}, {}};
    for (std::size_t i = 0; i < side; ++i) cloud.columns.push_back("lambda" + std::to_string(i + 1));
    for (std::size_t p_i = 0; p_i < setup.cloud.size(); ++p_i) {
      std::vector<std::string> row;
      for (double v : setup.cloud.index.point(p_i)) row.push_back(format_number(v));
      cloud.rows.push_back(std::move(row));
    }
    rep.tables.push_back(std::move(cloud));
  }

  rep.assertions.push_back(check("lipschitz-bound", report.lipschitz_violations == 0,
                                 std::to_string(report.lipschitz_violations) + " violations; worst (iv) - 2(iii) = " +
                                     fmt(worst_margin) + ", slack " + fmt(report.cloud_slack)));
  if (report.rows.size() >= 2) {
    const auto& a = report.rows.front();
    const auto& b = report.rows.back();
    rep.assertions.push_back(abs_shrink_check(cfg, radius_traces));
    rep.assertions.push_back(check("k-distance-shrinks", b.k_distance.median < a.k_distance.median,
                                   "median " + fmt(a.k_distance.median) + " at n=" + std::to_string(a.n) + ", " +
                                       fmt(b.k_distance.median) + " at n=" + std::to_string(b.n)));
  }
}

}  // namespace detail

// Runs the configured experiment on `workers` threads. The report does not
// depend on the worker count.
inline ExperimentReport run_experiment(const RunConfig& cfg, std::size_t workers = 1) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport rep;
  rep.config = cfg;
  rep.hash = config_hash(cfg);
  switch (cfg.experiment) {
    case Experiment::MaximaIid: detail::run_maxima_iid(rep, workers); break;
    case Experiment::MaximaStationary: detail::run_maxima_stationary(rep, workers); break;
    case Experiment::VaryingGamma: detail::run_varying_gamma(rep, workers); break;
    case Experiment::DarlingErdos: detail::run_darling_erdos(rep, workers); break;
    case Experiment::OuDecay: detail::run_ou_decay(rep, workers); break;
    case Experiment::OuStationarity: detail::run_ou_stationarity(rep, workers); break;
    case Experiment::PathMaxima: detail::run_path_maxima(rep, workers); break;
    case Experiment::SpectralLaws: detail::run_spectral_laws(rep, workers); break;
    case Experiment::Medians: detail::run_medians(rep, workers); break;
  }
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

// Checks everything that can be checked without running: config shape,
// covariance factorization and norm compatibility.
inline void validate_config(const RunConfig& cfg) {
  const auto m = detail::measure_for(cfg);
  const auto q = detail::norm_for(cfg);
  detail::check_compatible(m, q);
  if (cfg.experiment == Experiment::SpectralLaws) {
    require(side_from_packed(cfg.measure.dimension) > 0, ErrorCode::ConfigError,
            "spectral-laws needs measure.dimension = m(m+1)/2");
    require(cfg.norm == NormKind::OperatorSym, ErrorCode::ConfigError, "spectral-laws needs norm operator-sym");
  }
  if (cfg.experiment == Experiment::MaximaStationary)
    require(cfg.measure.dimension == 1, ErrorCode::ConfigError, "maxima-stationary needs measure.dimension 1");
  if (cfg.experiment == Experiment::DarlingErdos)
    require(cfg.checkpoints.front() >= kMinDarlingErdosLength, ErrorCode::ConfigError,
            "darling-erdos needs checkpoints >= 3");
}

inline std::string report_json_text(const ExperimentReport& rep) { return rep.to_json().dump(2) + "\n"; }

// Writes <experiment>-<hash>-report.json, one CSV per table and a timing
// CSV. Returns the written paths.
inline std::vector<std::filesystem::path> write_report(const ExperimentReport& rep,
                                                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  const auto emit = [&](const std::string& name, const std::string& text) {
    const auto p = dir / name;
    std::ofstream out(p, std::ios::binary);
    require(out.good(), ErrorCode::ConfigError, "cannot write " + p.string());
    out << text;
    written.push_back(p);
  };
  emit(rep.file_stem() + "-report.json", report_json_text(rep));
  for (const auto& t : rep.tables) emit(rep.file_stem() + "-" + t.name + ".csv", t.csv());
  Table timing{"timing", {"wall_seconds"}, {}};
  timing.add(rep.wall_seconds);
  emit(rep.file_stem() + "-timing.csv", timing.csv());
  return written;
}

}  // namespace gauss_extrema
