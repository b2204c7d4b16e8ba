#pragma once

// Command-line pipeline: synth -> train -> predict / match, analyze, gradcheck.
//
// Exit codes: 0 success, 1 input error, 2 numeric fault, 3 I/O error.
// Output files of a command are published together or not at all.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "evload/analysis.hpp"
#include "evload/error.hpp"
#include "evload/ingest.hpp"
#include "evload/io.hpp"
#include "evload/model.hpp"
#include "evload/optim.hpp"
#include "evload/svg.hpp"
#include "evload/synth.hpp"

namespace evload::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kInputError = 1, kNumericFault = 2, kIoError = 3 };

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Numeric: return kNumericFault;
    case ErrorKind::Io: return kIoError;
    default: return kInputError;
  }
}

struct CommandOutcome {
  int exit_code = kOk;
  std::vector<fs::path> written;
};

inline constexpr double kGradCheckTolerance = 1e-4;

inline nlohmann::json read_json(const fs::path& path) {
  const std::string text = io::read_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::Format, "'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Loading a data directory

struct DataDir {
  std::vector<ingest::ChargingSession> sessions;
  std::vector<ingest::ChargerSite> sites;
  std::vector<ingest::ZsjUnit> units;
  std::vector<std::string> rejects;  // "file:line: reason"
  ingest::Registry registry;
};

inline DataDir load_data_dir(const fs::path& dir) {
  DataDir d;
  auto collect = [&](const char* file, const auto& rejects) {
    for (const auto& r : rejects)
      d.rejects.push_back(std::string(file) + ":" + std::to_string(r.line) + ": " + r.reason);
  };
  auto sessions = ingest::parse_sessions(io::read_file(dir / "sessions.csv"));
  auto sites = ingest::parse_sites(io::read_file(dir / "sites.csv"));
  auto units = ingest::parse_zsj(io::read_file(dir / "zsj.csv"));
  collect("sessions.csv", sessions.rejects);
  collect("sites.csv", sites.rejects);
  collect("zsj.csv", units.rejects);
  d.sessions = std::move(sessions.rows);
  d.sites = std::move(sites.rows);
  d.units = std::move(units.rows);
  d.registry = ingest::Registry(d.sites, d.units);
  return d;
}

inline std::string rejects_csv(const std::vector<std::string>& rejects) {
  std::string out = "reject\n";
  for (const auto& r : rejects) out += r + '\n';
  return out;
}

inline std::vector<std::vector<double>> default_archetype_shapes() {
  std::vector<std::vector<double>> out;
  for (const auto& a : synth::default_archetypes())
    out.emplace_back(a.base_shape.begin(), a.base_shape.end());
  return out;
}

// ---------------------------------------------------------------------------
// Commands

struct SynthOptions {
  std::optional<fs::path> config;
  fs::path out;
  std::optional<std::uint64_t> seed;
};

inline CommandOutcome cmd_synth(const SynthOptions& opt, std::ostream& log) {
  synth::ScenarioConfig config =
      opt.config ? synth::scenario_from_json(read_json(*opt.config)) : synth::default_scenario();
  if (opt.seed) config.seed = *opt.seed;
  const auto scenario = synth::generate(config);
  auto files = synth::render(scenario);
  io::OutputStage stage(opt.out);
  stage.add("sessions.csv", std::move(files.sessions_csv));
  stage.add("sites.csv", std::move(files.sites_csv));
  stage.add("zsj.csv", std::move(files.zsj_csv));
  stage.add("ground_truth.json", std::move(files.ground_truth_json));
  CommandOutcome outcome{kOk, stage.commit()};
  log << "synth: " << scenario.truth.size() << " stations, " << scenario.sessions.size()
      << " sessions -> " << opt.out.string() << '\n';
  return outcome;
}

struct TrainOptions {
  fs::path data;
  std::optional<fs::path> config;
  fs::path out;
  std::optional<std::size_t> epochs;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> batch_size;
  std::optional<std::string> bucket;
  bool write_dataset = true;
};

/// Samples are per (charger, day) unless the config or --bucket says otherwise.
inline constexpr const char* kDefaultBucket = "day";
inline constexpr std::size_t kDefaultBatchSize = 16;

inline CommandOutcome cmd_train(const TrainOptions& opt, std::ostream& log) {
  optim::TrainConfig config;
  config.batch_size = kDefaultBatchSize;
  std::string bucket = kDefaultBucket;
  if (opt.config) {
    auto j = read_json(*opt.config);
    if (!j.contains("batch_size") && j.is_object()) j["batch_size"] = kDefaultBatchSize;
    config = optim::train_config_from_json(j);
    if (j.contains("bucket")) bucket = j["bucket"].get<std::string>();
  }
  if (opt.epochs) config.epochs = *opt.epochs;
  if (opt.seed) config.seed = *opt.seed;
  if (opt.batch_size) config.batch_size = *opt.batch_size;
  if (opt.bucket) bucket = *opt.bucket;
  config.validate();
  const auto mode = ingest::parse_bucket_mode(bucket);
  require(mode.has_value(), ErrorKind::Input,
          "unknown bucket '" + bucket + "' (valid: all, daytype, month, day)");

  auto data = load_data_dir(opt.data);
  auto curves = ingest::build_bucketed_curves(data.sessions, data.registry, *mode);
  for (const auto& r : curves.rejects) data.rejects.push_back("sessions.csv:0: " + r.reason);
  auto build = ingest::build_dataset(curves.curves, data.registry);
  require(!build.samples.empty(), ErrorKind::Input, "training dataset is empty");
  for (const auto& w : build.warnings) log << "warning: " << w << '\n';

  const auto result = optim::train(build.samples, config);

  std::string loss_csv = "epoch,mean_mse\n";
  for (std::size_t e = 0; e < result.loss_trace.size(); ++e)
    loss_csv += std::to_string(e + 1) + ',' + format_double(result.loss_trace[e]) + '\n';

  io::OutputStage stage(opt.out);
  stage.add("model.json", model::to_json(result.params).dump() + "\n");
  stage.add("standardization.json", ingest::to_json(build.standardization).dump(2) + "\n");
  stage.add("loss.csv", std::move(loss_csv));
  nlohmann::json run = optim::to_json(config);
  run["bucket"] = bucket;
  run["samples"] = build.samples.size();
  run["rejects"] = data.rejects.size();
  stage.add("train_config.json", run.dump(2) + "\n");
  if (opt.write_dataset) stage.add("dataset.json", ingest::dataset_to_json(build.samples).dump() + "\n");
  if (!data.rejects.empty()) stage.add("rejects.csv", rejects_csv(data.rejects));
  CommandOutcome outcome{kOk, stage.commit()};
  log << "train: " << build.samples.size() << " samples, " << config.epochs
      << " epochs, mse " << format_double(result.loss_trace.front()) << " -> "
      << format_double(result.loss_trace.back()) << '\n';
  return outcome;
}

struct PredictOptions {
  fs::path model;
  std::optional<fs::path> standardization;
  fs::path zsj;
  fs::path out;
};

inline CommandOutcome cmd_predict(const PredictOptions& opt, std::ostream& log) {
  const auto params = model::params_from_json(read_json(opt.model));
  const fs::path st_path =
      opt.standardization.value_or(opt.model.parent_path() / "standardization.json");
  const auto st = ingest::standardization_from_json(read_json(st_path));
  const auto units = ingest::parse_zsj(io::read_file(opt.zsj));
  if (!units.rejects.empty())
    fail(ErrorKind::Input, opt.zsj.filename().string() + ":" +
                               std::to_string(units.rejects.front().line) + ": " +
                               units.rejects.front().reason);
  auto out = nlohmann::json::array();
  for (const auto& u : units.rows) {
    const auto pred = model::forward(params, ingest::features_for(u, st));
    out.push_back({{"zsj_id", u.zsj_id},
                   {"category", name_of(u.category)},
                   {"mixture_weights", pred.mixture_weights},
                   {"shape", pred.shape},
                   {"peak_scale", pred.peak_scale},
                   {"load", pred.load}});
  }
  io::OutputStage stage(opt.out);
  stage.add("predictions.json", out.dump(2) + "\n");
  CommandOutcome outcome{kOk, stage.commit()};
  log << "predict: " << units.rows.size() << " locations\n";
  return outcome;
}

struct AnalyzeOptions {
  fs::path data;
  std::string kind;
  fs::path out;
  std::optional<fs::path> config;  // classifier constants for kind=groups
  std::optional<std::string> window;
  std::vector<std::string> baseline;
  bool per_charger = false;
  std::string group_by = "charger";
  std::string metric = "energy";
  bool svg = false;
};

inline const std::vector<std::string>& analysis_kinds() {
  static const std::vector<std::string> kinds = {"groups",   "seasonality", "weekday",
                                                 "window",   "timeline",    "shares"};
  return kinds;
}

inline analysis::ClassifierConfig classifier_from_json(const nlohmann::json& j) {
  analysis::ClassifierConfig c;
  try {
    if (j.contains("smoothing_width")) c.smoothing_width = j["smoothing_width"].get<int>();
    if (j.contains("peak_threshold")) c.peak_threshold = j["peak_threshold"].get<double>();
    if (j.contains("morning"))
      c.morning = {j["morning"].at(0).get<int>(), j["morning"].at(1).get<int>()};
    if (j.contains("evening"))
      c.evening = {j["evening"].at(0).get<int>(), j["evening"].at(1).get<int>()};
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("classifier config: ") + e.what());
  }
  require(c.smoothing_width >= 1 && c.smoothing_width % 2 == 1, ErrorKind::Input,
          "smoothing_width must be a positive odd number");
  return c;
}

inline CommandOutcome cmd_analyze(const AnalyzeOptions& opt, std::ostream& log) {
  const auto& kinds = analysis_kinds();
  if (std::find(kinds.begin(), kinds.end(), opt.kind) == kinds.end()) {
    std::string valid;
    for (const auto& k : kinds) valid += (valid.empty() ? "" : ", ") + k;
    fail(ErrorKind::Input, "unknown report kind '" + opt.kind + "' (valid: " + valid + ")");
  }
  auto parse_range = [](const std::string& s) {
    auto r = parse_date_range(s);
    require(r.has_value(), ErrorKind::Input, "bad date range '" + s + "' (want YYYY-MM-DD:YYYY-MM-DD)");
    return *r;
  };
  std::optional<DateRange> window;
  std::vector<DateRange> baseline;
  if (opt.kind == "window") {
    require(opt.window.has_value(), ErrorKind::Input, "kind=window needs --window");
    window = parse_range(*opt.window);
    require(!opt.baseline.empty(), ErrorKind::Input, "kind=window needs at least one --baseline");
    for (const auto& b : opt.baseline) baseline.push_back(parse_range(b));
  }
  require(opt.group_by == "charger" || opt.group_by == "category", ErrorKind::Input,
          "--group-by must be charger or category");
  require(opt.metric == "energy" || opt.metric == "instances", ErrorKind::Input,
          "--metric must be energy or instances");

  const auto data = load_data_dir(opt.data);
  analysis::Report report;
  std::vector<svg::Series> chart;
  if (opt.kind == "groups") {
    const auto cfg = opt.config ? classifier_from_json(read_json(*opt.config)) : analysis::ClassifierConfig{};
    const auto groups = analysis::classify_groups(
        data.sessions, data.registry,
        opt.group_by == "charger" ? ingest::GroupBy::Charger : ingest::GroupBy::ZsjCategory,
        opt.metric == "energy" ? ingest::CurveMetric::Energy : ingest::CurveMetric::Instances, cfg);
    report = analysis::groups_report(groups);
    for (const auto& g : groups) chart.push_back({g.group, g.curve.bins});
  } else if (opt.kind == "seasonality") {
    const auto m = analysis::seasonality_matrix(data.sessions, &data.registry);
    report = analysis::seasonality_report(m);
    for (int mo = 0; mo < 12; ++mo)
      if (m.cells[mo][0]) chart.push_back({"month " + std::to_string(mo + 1) + " Mon",
                                           {m.cells[mo][0]->mean.begin(), m.cells[mo][0]->mean.end()}});
  } else if (opt.kind == "weekday") {
    const auto cmp = analysis::weekday_weekend_compare(data.sessions, &data.registry, opt.per_charger);
    report = analysis::weekday_report(cmp);
    for (const auto& c : cmp) {
      chart.push_back({c.group + " weekday", {c.weekday.begin(), c.weekday.end()}});
      chart.push_back({c.group + " weekend", {c.weekend.begin(), c.weekend.end()}});
    }
  } else if (opt.kind == "window") {
    const auto w = analysis::window_compare(data.sessions, *window, baseline);
    report = analysis::window_report(w);
    chart = {{"window", {w.window.begin(), w.window.end()}},
             {"baseline", {w.baseline.begin(), w.baseline.end()}}};
  } else if (opt.kind == "timeline") {
    const auto t = analysis::total_load_timeline(data.sessions);
    report = analysis::timeline_report(t);
    svg::Series s{"total kWh", {}};
    for (const auto& p : t) s.values.push_back(p.total_kwh);
    chart.push_back(s);
  } else {
    const auto d = analysis::share_development(data.sessions, data.registry);
    report = analysis::shares_report(d);
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
      svg::Series s{std::string(kCategoryNames[c]), {}};
      for (const auto& row : d.installed.shares) s.values.push_back(row[c]);
      chart.push_back(s);
    }
  }

  io::OutputStage stage(opt.out);
  stage.add(opt.kind + ".json", report.json.dump(2) + "\n");
  stage.add(opt.kind + ".csv", std::move(report.csv));
  if (opt.svg) stage.add(opt.kind + ".svg", svg::line_chart(opt.kind, chart));
  CommandOutcome outcome{kOk, stage.commit()};
  log << "analyze: " << opt.kind << " -> " << opt.out.string() << '\n';
  return outcome;
}

struct GradCheckOptions {
  std::uint64_t seed = 0;
  long long trials = 100;
  bool inject_fault = false;  // scale analytic gradients by 2
  std::optional<fs::path> out;
};

struct GradCheckSummary {
  double max_relative_error = 0.0;
  std::size_t worst_trial = 0;
  optim::GradCheckResult worst;
};

/// Random (params, features, target) triple at the default architecture.
/// Biases and latent logits are drawn too, so that no path is trivially zero.
inline void random_gradcheck_case(std::uint64_t seed, model::ModelParams& params,
                                  std::vector<double>& features, std::vector<double>& target) {
  Rng rng(seed);
  params = model::initialize(model::ModelShape{}, rng());
  for (auto* bias : {&params.f_hidden.bias, &params.f_output.bias, &params.g_hidden.bias,
                     &params.g_output.bias})
    for (auto& b : *bias) b = 0.5 * rng.normal();
  for (auto& l : params.latent.logits().data) l = rng.normal();
  features.assign(kFeatureDim, 0.0);
  features[static_cast<std::size_t>(rng.uniform_int(0, kCategoryCount - 1))] = 1.0;
  for (std::size_t i = kCategoryCount; i < kFeatureDim; ++i) features[i] = rng.normal();
  target.resize(kHoursPerDay);
  for (auto& t : target) t = rng.uniform(0.0, 0.1);
}

inline GradCheckSummary run_gradcheck(std::uint64_t seed, std::size_t trials, bool inject_fault) {
  GradCheckSummary summary;
  for (std::size_t t = 0; t < trials; ++t) {
    model::ModelParams params;
    std::vector<double> x, target;
    random_gradcheck_case(derive_seed(seed, t), params, x, target);
    const auto r = optim::grad_check(params, model::FeatureVector::from_values(x), target, 1e-5,
                                     inject_fault ? 2.0 : 1.0);
    if (t == 0 || r.max_relative_error > summary.max_relative_error) {
      summary.max_relative_error = r.max_relative_error;
      summary.worst_trial = t;
      summary.worst = r;
    }
  }
  return summary;
}

inline CommandOutcome cmd_gradcheck(const GradCheckOptions& opt, std::ostream& log) {
  require(opt.trials >= 1, ErrorKind::Input, "trials must be ≥ 1");
  const auto s = run_gradcheck(opt.seed, static_cast<std::size_t>(opt.trials), opt.inject_fault);
  const bool pass = s.max_relative_error <= kGradCheckTolerance;
  log << "gradcheck: " << opt.trials << " trials, max relative error "
      << format_double(s.max_relative_error) << (pass ? " (ok)" : " (exceeds 1e-4)") << '\n';
  CommandOutcome outcome;
  if (opt.out) {
    io::OutputStage stage(*opt.out);
    stage.add("gradcheck.json",
              nlohmann::json{{"trials", opt.trials},
                             {"seed", opt.seed},
                             {"inject_fault", opt.inject_fault},
                             {"max_relative_error", s.max_relative_error},
                             {"tolerance", kGradCheckTolerance},
                             {"worst_trial", s.worst_trial},
                             {"pass", pass}}
                      .dump(2) +
                  "\n");
    outcome.written = stage.commit();
  }
  outcome.exit_code = pass ? kOk : kNumericFault;
  return outcome;
}

struct MatchOptions {
  fs::path model;
  std::optional<fs::path> archetypes;
  std::optional<fs::path> out;
};

/// Archetype file: a JSON array of shapes, or {"archetypes": [...]}.
inline std::vector<std::vector<double>> archetypes_from_json(const nlohmann::json& j) {
  const auto& arr = j.is_object() && j.contains("archetypes") ? j["archetypes"] : j;
  require(arr.is_array(), ErrorKind::Format, "archetypes must be a JSON array of shapes");
  try {
    return arr.get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Format, std::string("archetypes: ") + e.what());
  }
}

inline nlohmann::json match_to_json(const model::MatchResult& m) {
  auto pairs = nlohmann::json::array();
  for (std::size_t j = 0; j < m.permutation.size(); ++j)
    pairs.push_back({{"archetype", j}, {"latent", m.permutation[j]}, {"cosine", m.similarities[j]}});
  return {{"permutation", m.permutation},
          {"similarities", m.similarities},
          {"mean_similarity", m.mean_similarity},
          {"pairs", pairs}};
}

inline CommandOutcome cmd_match(const MatchOptions& opt, std::ostream& log) {
  const auto params = model::params_from_json(read_json(opt.model));
  const auto refs =
      opt.archetypes ? archetypes_from_json(read_json(*opt.archetypes)) : default_archetype_shapes();
  const auto m = model::match_latents(params.latent, refs);
  const auto doc = match_to_json(m);
  CommandOutcome outcome;
  if (opt.out) {
    io::OutputStage stage(*opt.out);
    stage.add("match.json", doc.dump(2) + "\n");
    outcome.written = stage.commit();
  }
  log << doc.dump() << '\n';
  return outcome;
}

// ---------------------------------------------------------------------------
// Argument parsing and dispatch

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Latent-profile modeling of public EV charging load curves.\n"
               "Exit codes: 0 success, 1 input error, 2 numeric fault, 3 I/O error.\n"
               "Outputs of a command are written atomically (all files or none)."};
  app.require_subcommand(1);

  SynthOptions synth_opt;
  std::string synth_config;
  std::uint64_t synth_seed = 0;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scenario (CSV + ground truth)");
  synth_cmd->add_option("--config", synth_config, "Scenario config JSON");
  synth_cmd->add_option("--out", synth_opt.out, "Output directory")->required();
  auto* synth_seed_opt = synth_cmd->add_option("--seed", synth_seed, "Random seed");

  TrainOptions train_opt;
  std::string train_config, train_bucket;
  std::size_t train_epochs = 0, train_batch = 0;
  std::uint64_t train_seed = 0;
  auto* train_cmd = app.add_subcommand("train", "Train the latent-profile model on a data directory");
  train_cmd->add_option("--data", train_opt.data, "Directory with sessions.csv, sites.csv, zsj.csv")
      ->required();
  train_cmd->add_option("--config", train_config, "Train config JSON");
  train_cmd->add_option("--out", train_opt.out, "Output directory")->required();
  auto* epochs_opt = train_cmd->add_option("--epochs", train_epochs, "Override epochs");
  auto* train_seed_opt = train_cmd->add_option("--seed", train_seed, "Random seed");
  auto* batch_opt = train_cmd->add_option("--batch-size", train_batch, "Samples per step (0 = full batch)");
  auto* bucket_opt = train_cmd->add_option("--bucket", train_bucket, "all | daytype | month | day");
  train_cmd->add_flag("!--no-dataset", train_opt.write_dataset, "Skip writing dataset.json");

  PredictOptions predict_opt;
  std::string predict_st;
  auto* predict_cmd = app.add_subcommand("predict", "Predict load curves for locations");
  predict_cmd->add_option("--model", predict_opt.model, "model.json")->required();
  predict_cmd->add_option("--standardization", predict_st, "Standardization sidecar");
  predict_cmd->add_option("--zsj", predict_opt.zsj, "Locations in zsj.csv format")->required();
  predict_cmd->add_option("--out", predict_opt.out, "Output directory")->required();

  AnalyzeOptions analyze_opt;
  std::string analyze_config, analyze_window;
  auto* analyze_cmd = app.add_subcommand("analyze", "Demand-pattern reports");
  analyze_cmd->add_option("--data", analyze_opt.data, "Data directory")->required();
  analyze_cmd->add_option("--kind", analyze_opt.kind,
                          "groups | seasonality | weekday | window | timeline | shares")
      ->required();
  analyze_cmd->add_option("--out", analyze_opt.out, "Output directory")->required();
  analyze_cmd->add_option("--config", analyze_config, "Classifier config JSON (kind=groups)");
  analyze_cmd->add_option("--window", analyze_window, "YYYY-MM-DD:YYYY-MM-DD (kind=window)");
  analyze_cmd->add_option("--baseline", analyze_opt.baseline, "Baseline range, repeatable");
  analyze_cmd->add_flag("--per-charger", analyze_opt.per_charger, "Per-charger curves (kind=weekday)");
  analyze_cmd->add_option("--group-by", analyze_opt.group_by, "charger | category (kind=groups)");
  analyze_cmd->add_option("--metric", analyze_opt.metric, "energy | instances (kind=groups)");
  analyze_cmd->add_flag("--svg", analyze_opt.svg, "Also write an SVG line chart");

  GradCheckOptions gc_opt;
  std::string gc_out;
  auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference check of analytic gradients");
  gc_cmd->add_option("--seed", gc_opt.seed, "Random seed");
  gc_cmd->add_option("--trials", gc_opt.trials, "Number of random cases");
  gc_cmd->add_flag("--inject-fault", gc_opt.inject_fault, "Scale analytic gradients by 2");
  gc_cmd->add_option("--out", gc_out, "Optional output directory for gradcheck.json");

  MatchOptions match_opt;
  std::string match_arch, match_out;
  auto* match_cmd = app.add_subcommand("match", "Match latent profiles to reference archetypes");
  match_cmd->add_option("--model", match_opt.model, "model.json")->required();
  match_cmd->add_option("--archetypes", match_arch, "Reference shapes JSON (default: built-in)");
  match_cmd->add_option("--out", match_out, "Optional output directory for match.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  try {
    CommandOutcome outcome;
    if (*synth_cmd) {
      if (!synth_config.empty()) synth_opt.config = synth_config;
      if (*synth_seed_opt) synth_opt.seed = synth_seed;
      outcome = cmd_synth(synth_opt, out);
    } else if (*train_cmd) {
      if (!train_config.empty()) train_opt.config = train_config;
      if (*epochs_opt) train_opt.epochs = train_epochs;
      if (*train_seed_opt) train_opt.seed = train_seed;
      if (*batch_opt) train_opt.batch_size = train_batch;
      if (*bucket_opt) train_opt.bucket = train_bucket;
      outcome = cmd_train(train_opt, out);
    } else if (*predict_cmd) {
      if (!predict_st.empty()) predict_opt.standardization = predict_st;
      outcome = cmd_predict(predict_opt, out);
    } else if (*analyze_cmd) {
      if (!analyze_config.empty()) analyze_opt.config = analyze_config;
      if (!analyze_window.empty()) analyze_opt.window = analyze_window;
      outcome = cmd_analyze(analyze_opt, out);
    } else if (*gc_cmd) {
      if (!gc_out.empty()) gc_opt.out = gc_out;
      outcome = cmd_gradcheck(gc_opt, out);
    } else if (*match_cmd) {
      if (!match_arch.empty()) match_opt.archetypes = match_arch;
      if (!match_out.empty()) match_opt.out = match_out;
      outcome = cmd_match(match_opt, out);
    }
    return outcome.exit_code;
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
}

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  std::vector<const char*> argv = {"evload"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace evload::cli
