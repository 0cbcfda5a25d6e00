// seatrack: operator CLI for AIS track association. Subcommands cover the
// whole loop: generate synthetic data, train, evaluate, stream-associate,
// export tracks for plotting and run the gradient self-check.
//
// Exit codes: 0 success, 1 gradient-check failure, 2 bad arguments or
// configuration, 3 data or I/O failure, 4 training divergence.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "seatrack/ais.hpp"
#include "seatrack/checkpoint.hpp"
#include "seatrack/error.hpp"
#include "seatrack/geojson.hpp"
#include "seatrack/grad_check.hpp"
#include "seatrack/metrics.hpp"
#include "seatrack/model.hpp"
#include "seatrack/pipeline.hpp"
#include "seatrack/synth.hpp"
#include "seatrack/trainer.hpp"
#include "seatrack/util.hpp"

namespace {

using namespace seatrack;

// Every knob a run can turn, with the published defaults. Config files are
// flat `key = value` lines; unknown keys are fatal so a typo cannot silently
// fall back to a default.
struct RunConfig {
  std::string model = "cnn-lstm";
  std::size_t batch_size = 100;
  std::size_t epochs = 100;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::string loss = "categorical_cross_entropy";
  double dropout_rate = 0.5;
  std::size_t conv_filters = 32;
  std::size_t conv_kernel = 5;
  std::size_t conv_stride = 3;
  std::string conv_activation = "relu";
  std::size_t lstm_hidden = 32;
  bool peephole_output_gate = false;
  std::uint64_t seed = 1;
  std::size_t min_obs = 50;
  std::size_t max_vessels = 30;
  int split_train = 70;
  int split_val = 10;
  int split_test = 20;
};

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const unsigned long long n = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw ArgumentError("config: " + key + " wants a non-negative integer, got '" + v + "'");
  }
}

double parse_f64(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ArgumentError("config: " + key + " wants a number, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ArgumentError("config: " + key + " wants true or false, got '" + v + "'");
}

void set_config_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "model") cfg.model = value;
  else if (key == "batch_size") cfg.batch_size = parse_u64(key, value);
  else if (key == "epochs") cfg.epochs = parse_u64(key, value);
  else if (key == "learning_rate") cfg.learning_rate = parse_f64(key, value);
  else if (key == "beta1") cfg.beta1 = parse_f64(key, value);
  else if (key == "beta2") cfg.beta2 = parse_f64(key, value);
  else if (key == "epsilon") cfg.epsilon = parse_f64(key, value);
  else if (key == "loss") cfg.loss = value;
  else if (key == "dropout_rate") cfg.dropout_rate = parse_f64(key, value);
  else if (key == "conv_filters") cfg.conv_filters = parse_u64(key, value);
  else if (key == "conv_kernel") cfg.conv_kernel = parse_u64(key, value);
  else if (key == "conv_stride") cfg.conv_stride = parse_u64(key, value);
  else if (key == "conv_activation") cfg.conv_activation = value;
  else if (key == "lstm_hidden") cfg.lstm_hidden = parse_u64(key, value);
  else if (key == "peephole_output_gate") cfg.peephole_output_gate = parse_bool(key, value);
  else if (key == "seed") cfg.seed = parse_u64(key, value);
  else if (key == "min_obs") cfg.min_obs = parse_u64(key, value);
  else if (key == "max_vessels") cfg.max_vessels = parse_u64(key, value);
  else if (key == "split_train") cfg.split_train = static_cast<int>(parse_u64(key, value));
  else if (key == "split_val") cfg.split_val = static_cast<int>(parse_u64(key, value));
  else if (key == "split_test") cfg.split_test = static_cast<int>(parse_u64(key, value));
  else throw ArgumentError("config: unknown key '" + key + "'");
}

void apply_config_file(const std::filesystem::path& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("config: cannot open '" + path.string() + "'");
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ArgumentError("config: line " + std::to_string(lineno) +
                          " is not 'key = value': '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ArgumentError("config: line " + std::to_string(lineno) + " has an empty key");
    }
    try {
      set_config_key(cfg, key, value);
    } catch (const ArgumentError& e) {
      throw ArgumentError(std::string(e.what()) + " (line " + std::to_string(lineno) + ")");
    }
  }
}

ArchParams arch_from_config(const RunConfig& cfg) {
  ArchParams p;
  p.conv_filters = cfg.conv_filters;
  p.conv_kernel = cfg.conv_kernel;
  p.conv_stride = cfg.conv_stride;
  p.conv_activation = cfg.conv_activation;
  p.lstm_hidden = cfg.lstm_hidden;
  p.dropout_rate = cfg.dropout_rate;
  p.peephole_output_gate = cfg.peephole_output_gate;
  return p;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("short write to '" + path.string() + "'");
}

// ---------------------------------------------------------------- gen ----

struct GenArgs {
  std::string scenario;
  std::string out;
  std::uint64_t seed = 1;
  double gap_prob = 0.0;
  std::size_t gap_min = 5;
  std::size_t gap_max = 50;
};

int cmd_gen(const GenArgs& a) {
  if (a.gap_prob < 0.0 || a.gap_prob > 1.0) {
    throw ArgumentError("gen: --gap-prob must be in [0,1]");
  }
  if (a.gap_min == 0 || a.gap_min > a.gap_max) {
    throw ArgumentError("gen: gap lengths must satisfy 1 <= min <= max");
  }
  const ScenarioConfig sc = scenario_by_name(a.scenario, a.seed);
  std::vector<AisRecord> rows = generate(sc);
  if (a.gap_prob > 0.0) rows = inject_gaps(rows, a.gap_prob, a.gap_min, a.gap_max, a.seed);
  write_csv(rows, a.out);
  std::set<std::string> vessels;
  for (const AisRecord& r : rows) vessels.insert(r.vessel_id);
  std::printf("wrote %zu rows for %zu vessels to %s\n", rows.size(), vessels.size(),
              a.out.c_str());
  return 0;
}

// -------------------------------------------------------------- train ----

struct TrainArgs {
  std::string data;
  std::string out;
  std::string config;
  std::string model;     // optional override
  std::string trainlog;  // defaults to <out>.trainlog.csv
  std::optional<std::uint64_t> seed;
};

int cmd_train(const TrainArgs& a) {
  RunConfig cfg;
  if (!a.config.empty()) apply_config_file(a.config, cfg);
  if (!a.model.empty()) cfg.model = a.model;
  if (a.seed) cfg.seed = *a.seed;

  ParseResult parsed = parse_csv(std::filesystem::path(a.data));
  if (!parsed.rejects.empty()) {
    log_warn("skipped " + std::to_string(parsed.rejects.size()) + " malformed rows in '" +
             a.data + "' (first: line " + std::to_string(parsed.rejects.front().line) + ", " +
             parsed.rejects.front().reason + ")");
  }

  CleanReport report;
  std::vector<AisRecord> rows = clean_and_threshold(parsed.records, cfg.min_obs, &report);
  rows = select_vessels(rows, cfg.max_vessels);
  std::vector<std::string> ids;
  ids.reserve(rows.size());
  for (const AisRecord& r : rows) ids.push_back(r.vessel_id);
  const LabelMap labels = LabelMap::from_vessel_ids(std::move(ids));
  log_info("training on " + std::to_string(rows.size()) + " rows over " +
           std::to_string(labels.size()) + " vessels (dropped " +
           std::to_string(report.rows_missing) + " incomplete rows, " +
           std::to_string(report.dropped_vessels.size()) + " sparse vessels)");

  const Dataset all = make_dataset(rows, labels);
  Splits splits = stratified_split(
      all, SplitRatios{cfg.split_train, cfg.split_val, cfg.split_test}, cfg.seed);
  const ScalerParams scaler = fit_scaler(splits.train.features);
  splits.train.features = apply_scaler(scaler, splits.train.features);
  splits.val.features = apply_scaler(scaler, splits.val.features);
  splits.test.features = apply_scaler(scaler, splits.test.features);

  const ModelSpec spec = model_spec_by_name(cfg.model, labels.size(), arch_from_config(cfg));
  Model model(spec, cfg.seed);
  log_info("model " + spec.name + " with " + std::to_string(model.param_count()) +
           " trainable parameters");

  TrainConfig tc;
  tc.batch_size = cfg.batch_size;
  tc.epochs = cfg.epochs;
  tc.learning_rate = cfg.learning_rate;
  tc.beta1 = cfg.beta1;
  tc.beta2 = cfg.beta2;
  tc.eps = cfg.epsilon;
  tc.seed = cfg.seed;
  tc.loss = cfg.loss;
  const TrainLog tl = fit(model, splits.train, splits.val, tc);

  const std::string logpath = a.trainlog.empty() ? a.out + ".trainlog.csv" : a.trainlog;
  write_text_file(logpath, tl.to_csv());
  const Checkpoint ckpt = make_checkpoint(model, scaler, labels);
  save_checkpoint(ckpt, a.out);

  const EpochStats& last = tl.epochs.back();
  std::printf("final train accuracy %.6f\n", last.train_acc);
  std::printf("final val accuracy %.6f\n", last.val_acc);
  std::printf("checkpoint written to %s\n", a.out.c_str());
  return 0;
}

// --------------------------------------------------------------- eval ----

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  std::string out_dir;
};

int cmd_eval(const EvalArgs& a) {
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  Model model = restore_model(ckpt);

  ParseResult parsed = parse_csv(std::filesystem::path(a.data));
  if (!parsed.rejects.empty()) {
    log_warn("skipped " + std::to_string(parsed.rejects.size()) + " malformed rows in '" +
             a.data + "'");
  }
  std::size_t missing = 0;
  std::size_t unseen = 0;
  std::vector<const AisRecord*> keep;
  std::vector<int> truth;
  for (const AisRecord& r : parsed.records) {
    if (!r.has_features()) {
      ++missing;
      continue;
    }
    const std::optional<int> idx =
        r.vessel_id.empty() ? std::nullopt : ckpt.labels.try_index(r.vessel_id);
    if (!idx) {
      ++unseen;
      continue;
    }
    keep.push_back(&r);
    truth.push_back(*idx);
  }
  if (missing > 0) log_info("skipped " + std::to_string(missing) + " rows with missing fields");
  if (keep.empty()) throw PipelineError("eval: no usable labeled rows in '" + a.data + "'");

  Tensor features({keep.size(), kFeatureCount});
  for (std::size_t i = 0; i < keep.size(); ++i) {
    features.at(i, 0) = static_cast<float>(keep[i]->lat);
    features.at(i, 1) = static_cast<float>(keep[i]->lon);
    features.at(i, 2) = static_cast<float>(keep[i]->speed);
    features.at(i, 3) = static_cast<float>(keep[i]->course);
  }
  const Tensor scaled = to_model_input(apply_scaler(ckpt.scaler, features));

  std::vector<int> predicted(keep.size());
  const std::size_t kBatch = 512;
  for (std::size_t lo = 0; lo < keep.size(); lo += kBatch) {
    const std::size_t hi = std::min(keep.size(), lo + kBatch);
    Tensor x({hi - lo, kFeatureCount, 1});
    std::copy(scaled.flat().begin() + static_cast<std::ptrdiff_t>(lo * kFeatureCount),
              scaled.flat().begin() + static_cast<std::ptrdiff_t>(hi * kFeatureCount),
              x.flat().begin());
    const Prediction p = predict(model, x);
    for (std::size_t i = lo; i < hi; ++i) predicted[i] = p.labels[i - lo];
  }

  const ConfusionMatrix cm = confusion(truth, predicted, ckpt.labels.size());
  const MetricsReport m = metrics(cm);

  std::filesystem::create_directories(a.out_dir);
  const std::filesystem::path dir(a.out_dir);
  write_text_file(dir / "metrics.csv",
                  metrics_csv_header() + "\n" + metrics_csv_row(ckpt.spec.name, m) + "\n");
  write_text_file(dir / "per_class.csv", per_class_csv(m, ckpt.labels));
  write_text_file(dir / "confusion.csv", confusion_csv(cm, ckpt.labels));

  std::cout << metrics_csv_header() << "\n" << metrics_csv_row(ckpt.spec.name, m) << "\n";
  if (unseen > 0) std::cout << "excluded " << unseen << " rows (unseen vessels)\n";
  return 0;
}

// ---------------------------------------------------------- associate ----

struct AssociateArgs {
  std::string checkpoint;
  std::string input = "-";
  std::string out = "-";
  std::optional<double> min_confidence;
};

// Scores rows strictly one at a time so memory stays flat no matter how long
// the stream runs.
int cmd_associate(const AssociateArgs& a) {
  if (a.min_confidence && (*a.min_confidence < 0.0 || *a.min_confidence > 1.0)) {
    throw ArgumentError("associate: --min-confidence must be in [0,1]");
  }
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  Model model = restore_model(ckpt);

  std::ifstream file_in;
  if (a.input != "-") {
    file_in.open(a.input, std::ios::binary);
    if (!file_in) throw IoError("cannot open '" + a.input + "'");
  }
  std::istream& in = a.input == "-" ? std::cin : file_in;

  std::ofstream file_out;
  if (a.out != "-") {
    file_out.open(a.out, std::ios::binary);
    if (!file_out) throw IoError("cannot write '" + a.out + "'");
  }
  std::ostream& out = a.out == "-" ? std::cout : file_out;

  std::string line;
  if (!std::getline(in, line)) throw FormatError("associate: empty input");
  std::string reason;
  if (!parse_csv_header(line, &reason)) throw FormatError("associate: " + reason);
  out << kAssociationCsvHeader << "\n";

  std::size_t lineno = 1;
  std::size_t scored = 0;
  std::size_t skipped = 0;
  Tensor features({1, kFeatureCount});
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    const std::optional<AisRecord> rec = parse_csv_row(line, &reason);
    if (!rec) {
      std::cerr << "warning: line " << lineno << ": " << reason << "\n";
      ++skipped;
      continue;
    }
    if (!rec->has_features()) {
      std::cerr << "warning: line " << lineno << ": missing feature values\n";
      ++skipped;
      continue;
    }
    features.at(0, 0) = static_cast<float>(rec->lat);
    features.at(0, 1) = static_cast<float>(rec->lon);
    features.at(0, 2) = static_cast<float>(rec->speed);
    features.at(0, 3) = static_cast<float>(rec->course);
    const Prediction p =
        predict(model, to_model_input(apply_scaler(ckpt.scaler, features)));
    AssociationOutput row;
    row.object_id = rec->object_id;
    row.confidence = p.confidence[0];
    row.predicted_vid = (a.min_confidence && row.confidence < *a.min_confidence)
                            ? kUnknownVessel
                            : ckpt.labels.name(static_cast<std::size_t>(p.labels[0]));
    row.timestamp = rec->timestamp;
    row.lat = rec->lat;
    row.lon = rec->lon;
    out << to_csv_row(row) << "\n";
    ++scored;
  }
  out.flush();
  if (a.out != "-" && !file_out) throw IoError("short write to '" + a.out + "'");
  log_info("scored " + std::to_string(scored) + " rows, skipped " + std::to_string(skipped));
  if (scored == 0) throw PipelineError("associate: no rows scored");
  return 0;
}

// ------------------------------------------------------- export-tracks ----

struct ExportArgs {
  std::string predictions;
  std::string out;
};

int cmd_export_tracks(const ExportArgs& a) {
  std::ifstream in(a.predictions, std::ios::binary);
  if (!in) throw IoError("cannot open '" + a.predictions + "'");
  std::string line;
  if (!std::getline(in, line)) throw FormatError("export-tracks: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kAssociationCsvHeader) {
    throw FormatError(std::string("export-tracks: expected header '") + kAssociationCsvHeader +
                      "'");
  }
  std::vector<AssociationOutput> rows;
  std::string reason;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    AssociationOutput row;
    if (!parse_association_row(line, &row, &reason)) {
      throw FormatError("export-tracks: line " + std::to_string(lineno) + ": " + reason);
    }
    rows.push_back(std::move(row));
  }
  write_text_file(a.out, tracks_to_geojson(rows));
  log_info("wrote tracks for " + std::to_string(rows.size()) + " rows to '" + a.out + "'");
  return 0;
}

// ---------------------------------------------------------- grad-check ----

int cmd_grad_check(std::uint64_t seed) {
  const double tol = 1e-4;
  bool ok = true;
  for (const auto& [name, report] : standard_grad_checks(seed)) {
    const bool pass = report.passed(tol);
    ok = ok && pass;
    std::printf("%-16s max rel err %.3e  %s\n", name.c_str(), report.max_rel_err,
                pass ? "ok" : "FAIL");
  }
  std::printf("gradient check %s (tolerance %.0e)\n", ok ? "passed" : "FAILED", tol);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seatrack: maritime track association from AIS observations"};
  app.require_subcommand(1);
  app.footer(
      "environment:\n"
      "  SEATRACK_LOG=quiet|warn|info|debug   stderr verbosity (default warn)\n"
      "exit codes:\n"
      "  0 success, 1 gradient-check failure, 2 bad arguments or configuration,\n"
      "  3 data or I/O failure, 4 training divergence");

  GenArgs gen_args;
  CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic AIS scenario CSV");
  gen->add_option("--scenario", gen_args.scenario, "Scenario name (small5, port30)")
      ->required();
  gen->add_option("-o,--out", gen_args.out, "Output CSV path")->required();
  gen->add_option("--seed", gen_args.seed, "Scenario seed")->capture_default_str();
  gen->add_option("--gap-prob", gen_args.gap_prob,
                  "Per-row probability that a reception gap starts")
      ->capture_default_str();
  gen->add_option("--gap-min", gen_args.gap_min, "Minimum gap length in rows")
      ->capture_default_str();
  gen->add_option("--gap-max", gen_args.gap_max, "Maximum gap length in rows")
      ->capture_default_str();

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "Train a model and write a checkpoint");
  train->add_option("--data", train_args.data, "Input AIS CSV")->required();
  train->add_option("-o,--out", train_args.out, "Output checkpoint path")->required();
  train->add_option("--config", train_args.config, "key = value config file");
  train->add_option("--model", train_args.model,
                    "Architecture: cnn-lstm, lstm, cnn or ann (overrides config)");
  std::uint64_t train_seed = 0;
  CLI::Option* train_seed_opt =
      train->add_option("--seed", train_seed, "Run seed (overrides config)");
  train->add_option("--trainlog", train_args.trainlog,
                    "Per-epoch stats CSV (default <out>.trainlog.csv)");

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint on labeled data");
  eval->add_option("--checkpoint", eval_args.checkpoint, "Checkpoint path")->required();
  eval->add_option("--data", eval_args.data, "Labeled AIS CSV")->required();
  eval->add_option("--out-dir", eval_args.out_dir, "Directory for metrics CSVs")->required();

  AssociateArgs assoc_args;
  CLI::App* assoc =
      app.add_subcommand("associate", "Score a stream of observations row by row");
  assoc->add_option("--checkpoint", assoc_args.checkpoint, "Checkpoint path")->required();
  assoc->add_option("--input", assoc_args.input, "Input CSV path or - for stdin")
      ->capture_default_str();
  assoc->add_option("-o,--out", assoc_args.out, "Output CSV path or - for stdout")
      ->capture_default_str();
  double min_conf = 0.0;
  CLI::Option* min_conf_opt = assoc->add_option(
      "--min-confidence", min_conf, "Report 'unknown' below this softmax probability");

  ExportArgs export_args;
  CLI::App* exp =
      app.add_subcommand("export-tracks", "Turn association output into GeoJSON tracks");
  exp->add_option("--predictions", export_args.predictions, "Association CSV")->required();
  exp->add_option("-o,--out", export_args.out, "Output GeoJSON path")->required();

  std::uint64_t gc_seed = 1;
  CLI::App* gc =
      app.add_subcommand("grad-check", "Verify analytic gradients against finite differences");
  gc->add_option("--seed", gc_seed, "Input seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return cmd_gen(gen_args);
    if (train->parsed()) {
      if (train_seed_opt->count() > 0) train_args.seed = train_seed;
      return cmd_train(train_args);
    }
    if (eval->parsed()) return cmd_eval(eval_args);
    if (assoc->parsed()) {
      if (min_conf_opt->count() > 0) assoc_args.min_confidence = min_conf;
      return cmd_associate(assoc_args);
    }
    if (exp->parsed()) return cmd_export_tracks(export_args);
    if (gc->parsed()) return cmd_grad_check(gc_seed);
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
