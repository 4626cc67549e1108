// Command-line front end: dataset generation, training, iteration-sweep
// evaluation, iterative-output visualization and cross-seed report tables.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>

#include "CLI11.hpp"
#include "json.hpp"

#include "iternet/binio.hpp"
#include "iternet/checkpoint.hpp"
#include "iternet/chess.hpp"
#include "iternet/config.hpp"
#include "iternet/errors.hpp"
#include "iternet/evalrun.hpp"
#include "iternet/heatmap.hpp"
#include "iternet/maze.hpp"
#include "iternet/prefix.hpp"
#include "iternet/trainer.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace iternet;

namespace {

constexpr const char* kToolVersion = "1.0.0";

fs::path resolve_out(const std::string& out) {
  fs::path path(out);
  const char* root = std::getenv("ITERNET_OUT_ROOT");
  if (root != nullptr && *root != '\0' && path.is_relative()) path = fs::path(root) / path;
  fs::create_directories(path);
  return path;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::uint64_t file_hash(const std::string& path) { return binio::fnv1a(binio::read_file(path)); }

// every run records its resolved inputs before any compute happens
void write_manifest(const fs::path& out_dir, const std::string& command, const json& detail,
                    const std::map<std::string, std::string>& input_files) {
  json manifest;
  manifest["tool"] = "iternet";
  manifest["version"] = kToolVersion;
  manifest["command"] = command;
  manifest["created"] = timestamp();
  manifest["detail"] = detail;
  json inputs = json::object();
  for (const auto& [name, path] : input_files) {
    inputs[name] = {{"path", path}, {"fnv1a", binio::hex64(file_hash(path))}};
  }
  manifest["inputs"] = inputs;
  binio::write_file((out_dir / "manifest.json").string(), manifest.dump(2) + "\n");
}

struct GenerateArgs {
  std::string task;
  std::string out;
  std::uint64_t seed = 1;
  int bits = 32;
  std::int64_t count = 10000;
  std::vector<int> cells{9};
  std::string csv;
  int rating_split = 1385;
};

int run_generate(const GenerateArgs& args) {
  const fs::path out_dir = resolve_out(args.out);
  json detail = {{"task", args.task}, {"seed", args.seed}};

  if (args.task == "prefix") {
    detail["bits"] = args.bits;
    detail["count"] = args.count;
    write_manifest(out_dir, "generate", detail, {});
    data::Dataset ds = data::gen_prefix_dataset(args.bits, args.count, args.seed);
    const std::string path = (out_dir / "data.ds").string();
    ds.save(path);
    std::cout << "wrote " << ds.size() << " samples to " << path << " (hash " << binio::hex64(ds.content_hash())
              << ")\n";
  } else if (args.task == "maze") {
    detail["cells"] = args.cells;
    detail["count"] = args.count;
    write_manifest(out_dir, "generate", detail, {});
    data::Dataset ds = data::gen_maze_dataset(args.cells, args.count, args.seed);
    const std::string path = (out_dir / "data.ds").string();
    ds.save(path);
    std::cout << "wrote " << ds.size() << " samples to " << path << " (hash " << binio::hex64(ds.content_hash())
              << ")\n";
  } else if (args.task == "chess") {
    if (args.csv.empty()) throw ConfigError("chess generation needs --csv with a Lichess puzzle export");
    detail["csv"] = args.csv;
    detail["rating_split"] = args.rating_split;
    write_manifest(out_dir, "generate", detail, {{"csv", args.csv}});
    const data::LichessLoad load = data::load_lichess_csv(args.csv, args.rating_split);
    const std::string easy_path = (out_dir / "easy.ds").string();
    const std::string hard_path = (out_dir / "hard.ds").string();
    load.easy.save(easy_path);
    load.hard.save(hard_path);
    std::cout << "rows " << load.rows << ", easy " << load.easy.size() << ", hard " << load.hard.size()
              << ", skipped " << load.skipped << "\n";
    for (const auto& [reason, n] : load.skip_reasons) std::cout << "  skipped " << n << ": " << reason << "\n";
  } else {
    throw ConfigError("unknown task '" + args.task + "'");
  }
  return 0;
}

struct TrainArgs {
  std::string profile;
  std::string config_file;
  std::vector<std::string> overrides;
  std::string data;
  std::string out;
};

training::ExperimentConfig resolve_config(const std::string& profile, const std::string& config_file,
                                       const std::vector<std::string>& overrides) {
  training::ExperimentConfig cfg;
  if (!profile.empty() && !config_file.empty()) throw ConfigError("give either --profile or --config, not both");
  if (!profile.empty()) cfg = training::ExperimentConfig::profile(profile);
  else if (!config_file.empty()) cfg = training::ExperimentConfig::from_file(config_file);
  else throw ConfigError("a --profile or --config is required");
  for (const std::string& kv : overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + kv + "' is not key=value");
    cfg.apply_override(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

int run_train(const TrainArgs& args) {
  training::ExperimentConfig cfg = resolve_config(args.profile, args.config_file, args.overrides);
  if (!args.data.empty()) cfg.train_data = args.data;
  if (cfg.train_data.empty()) throw ConfigError("no training data: give --data or set data.train");
  cfg.validate();

  const fs::path out_dir = resolve_out(args.out);
  json detail;
  detail["config"] = cfg.to_text();
  detail["config_hash"] = binio::hex64(cfg.hash());
  detail["model_id"] = cfg.model_id();
  detail["seed"] = cfg.seed;
  write_manifest(out_dir, "train", detail, {{"train_data", cfg.train_data}});

  const data::Dataset dataset = data::Dataset::load(cfg.train_data);
  std::cout << "training " << cfg.model_id() << " on " << dataset.size() << " samples, " << cfg.epochs
            << " epochs\n";

  const auto hook = [&](const std::string& tag, const nets::Net& net, const training::RunLog& log) {
    training::save_checkpoint(net, cfg, log, (out_dir / (tag == "final" ? "model.ckpt" : tag + ".ckpt")).string());
  };
  training::TrainResult result;
  try {
    result = training::train(cfg, dataset, hook);
  } catch (const DivergenceError&) {
    std::cerr << "training diverged; diagnostic checkpoint written to " << (out_dir / "diverged.ckpt") << "\n";
    throw;
  }

  binio::write_file((out_dir / "run.csv").string(), result.log.to_csv());
  std::cout << "final train accuracy " << result.log.final_train_accuracy * 100.0 << "%\n";
  if (!result.log.retained) {
    // the perfect-accuracy gate failed: keep the run log but drop the model
    fs::remove(out_dir / "model.ckpt");
    std::cerr << "model discarded: training accuracy gate not met\n";
    return 0;
  }
  std::cout << "checkpoint " << (out_dir / "model.ckpt") << "\n";
  return 0;
}

struct EvalArgs {
  std::vector<std::string> checkpoints;
  std::string data;
  std::string test_name;
  int m_min = 0;
  int m_max = 0;
  std::vector<int> m_values;
  int workers = 1;
  std::string out;
};

int run_eval(const EvalArgs& args) {
  const fs::path out_dir = resolve_out(args.out);
  std::map<std::string, std::string> inputs{{"test_data", args.data}};
  for (std::size_t i = 0; i < args.checkpoints.size(); ++i) {
    inputs["checkpoint_" + std::to_string(i)] = args.checkpoints[i];
  }
  json detail = {{"m_min", args.m_min}, {"m_max", args.m_max}, {"m", args.m_values}};
  write_manifest(out_dir, "eval", detail, inputs);

  const data::Dataset test = data::Dataset::load(args.data);
  std::vector<eval::SweepRow> all_rows;
  for (const std::string& ckpt_path : args.checkpoints) {
    const training::Checkpoint ckpt = training::load_checkpoint(ckpt_path);
    eval::SweepOptions options;
    options.model_id = ckpt.config.model_id();
    options.seed = ckpt.config.seed;
    options.normalize_inputs = ckpt.config.normalize_inputs;
    options.workers = args.workers;
    options.test_set = args.test_name.empty() ? fs::path(args.data).stem().string() : args.test_name;
    if (!args.m_values.empty()) {
      options.m_values = args.m_values;
    } else if (args.m_min > 0 && args.m_max >= args.m_min) {
      for (int m = args.m_min; m <= args.m_max; ++m) options.m_values.push_back(m);
    } else {
      const int k = ckpt.config.iterations;
      for (int m = k; m <= k + 6; ++m) options.m_values.push_back(m);
    }
    const auto rows = eval::sweep(ckpt.net, test, options);
    all_rows.insert(all_rows.end(), rows.begin(), rows.end());
    for (const auto& row : rows) {
      std::cout << row.model_id << " seed " << row.seed << " m=" << row.m << " acc=" << row.accuracy
                << " best_conf_acc=" << row.best_confidence_accuracy << "\n";
    }
  }
  binio::write_file((out_dir / "report.csv").string(), eval::to_csv(all_rows));
  std::cout << "wrote " << (out_dir / "report.csv") << "\n";
  return 0;
}

struct VisualizeArgs {
  std::string checkpoint;
  std::string data;
  std::int64_t index = 0;
  int iterations = 0;
  std::string out;
};

int run_visualize(const VisualizeArgs& args) {
  const fs::path out_dir = resolve_out(args.out);
  write_manifest(out_dir, "visualize", {{"index", args.index}, {"iterations", args.iterations}},
                 {{"checkpoint", args.checkpoint}, {"data", args.data}});
  const training::Checkpoint ckpt = training::load_checkpoint(args.checkpoint);
  const data::Dataset dataset = data::Dataset::load(args.data);
  if (args.index < 0 || args.index >= dataset.size()) {
    throw DataError("sample index " + std::to_string(args.index) + " out of range (dataset has " +
                    std::to_string(dataset.size()) + ")");
  }
  const int m = args.iterations > 0 ? args.iterations : ckpt.config.iterations;
  Tensor input = dataset.input(args.index);
  Tensor net_input = input.clone();
  if (ckpt.config.normalize_inputs) {
    double* d = net_input.data();
    for (std::int64_t j = 0; j < net_input.size(); ++j) d[j] -= 0.5;
  }
  nets::IterationTrace trace = ckpt.net.forward_iterations(net_input, m);
  eval::select_best_iteration(trace, ckpt.config.task);  // fill confidences
  const auto files = eval::emit_heatmaps(trace, input, dataset.target(args.index), ckpt.config.task,
                                         out_dir.string());
  for (std::size_t i = 0; i < trace.confidence.size(); ++i) {
    std::cout << "iteration " << i + 1 << " confidence " << trace.confidence[i] << "\n";
  }
  std::cout << "wrote " << files.size() << " file(s) under " << out_dir << "\n";
  return 0;
}

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string out;
};

std::string format_cell(const std::vector<double>& values) {
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double stderr_v =
      values.size() > 1 ? std::sqrt(var / static_cast<double>(values.size() - 1)) /
                              std::sqrt(static_cast<double>(values.size()))
                        : 0.0;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f ± %.2f", 100.0 * mean, 100.0 * stderr_v);
  return buf;
}

int run_report(const ReportArgs& args) {
  if (args.inputs.empty()) throw ConfigError("report needs at least one eval csv");
  const fs::path out_dir = resolve_out(args.out);
  std::map<std::string, std::string> input_files;
  for (std::size_t i = 0; i < args.inputs.size(); ++i) input_files["csv_" + std::to_string(i)] = args.inputs[i];
  write_manifest(out_dir, "report", json::object(), input_files);

  std::vector<eval::SweepRow> rows;
  for (const std::string& path : args.inputs) {
    const auto part = eval::parse_sweep_csv(binio::read_file(path));
    rows.insert(rows.end(), part.begin(), part.end());
  }
  if (rows.empty()) throw DataError("no rows in the given eval csvs");

  std::set<std::string> tasks;
  for (const auto& row : rows) tasks.insert(row.model_id.substr(0, row.model_id.find('-')));
  if (tasks.size() != 1) throw DataError("eval csvs mix tasks; report one task at a time");

  // Table layout: one row per variant, one column per train-time effective
  // depth; the cell aggregates the depth-matched budget (m = k) across seeds.
  struct Key {
    std::string variant;
    int depth;
    auto operator<=>(const Key&) const = default;
  };
  std::map<Key, std::vector<double>> cells;
  std::map<std::tuple<std::string, int, int>, std::vector<double>> by_m_acc, by_m_best;
  std::set<int> depths;
  for (const auto& row : rows) {
    // model_id is <task>-<variant>-d<depth>-w<width>
    const std::size_t v0 = row.model_id.find('-') + 1;
    const std::size_t v1 = row.model_id.find('-', v0);
    const std::string variant = row.model_id.substr(v0, v1 - v0);
    const int depth = std::stoi(row.model_id.substr(v1 + 2, row.model_id.find('-', v1 + 1) - v1 - 2));
    depths.insert(depth);
    const int k = (depth - 4) / 4;
    if (row.m == k) cells[{variant, depth}].push_back(row.accuracy);
    by_m_acc[{variant, depth, row.m}].push_back(row.accuracy);
    by_m_best[{variant, depth, row.m}].push_back(row.best_confidence_accuracy);
  }

  std::ostringstream md;
  md << "# " << *tasks.begin() << " accuracy (%) by effective depth, m = k\n\n|variant|";
  for (int d : depths) md << " depth " << d << " |";
  md << "\n|---|";
  for (std::size_t i = 0; i < depths.size(); ++i) md << "---|";
  md << "\n";
  for (const std::string& variant : {"recurrent", "feedforward"}) {
    bool any = false;
    for (int d : depths) any = any || cells.count({variant, d}) > 0;
    if (!any) continue;
    md << "|" << variant << "|";
    for (int d : depths) {
      const auto it = cells.find({variant, d});
      md << (it == cells.end() ? " " : format_cell(it->second)) << "|";
    }
    md << "\n";
  }
  binio::write_file((out_dir / "report.md").string(), md.str());

  std::ostringstream csv;
  csv << "variant,depth,m,n_seeds,mean_accuracy,stderr,mean_best_confidence_accuracy\n";
  csv.precision(10);
  for (const auto& [key, accs] : by_m_acc) {
    const auto& [variant, depth, m] = key;
    double mean = 0.0;
    for (double v : accs) mean += v;
    mean /= static_cast<double>(accs.size());
    double var = 0.0;
    for (double v : accs) var += (v - mean) * (v - mean);
    const double se = accs.size() > 1 ? std::sqrt(var / static_cast<double>(accs.size() - 1)) /
                                            std::sqrt(static_cast<double>(accs.size()))
                                      : 0.0;
    const auto& best = by_m_best[key];
    double best_mean = 0.0;
    for (double v : best) best_mean += v;
    best_mean /= static_cast<double>(best.size());
    csv << variant << "," << depth << "," << m << "," << accs.size() << "," << mean << "," << se << ","
        << best_mean << "\n";
  }
  binio::write_file((out_dir / "report_by_m.csv").string(), csv.str());

  std::cout << md.str() << "\nwrote " << (out_dir / "report.md") << " and " << (out_dir / "report_by_m.csv")
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"iternet: weight-shared recurrent residual networks that extrapolate by iterating longer"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand("generate", "Generate a dataset with oracle labels");
  generate->add_option("--task", gen.task, "prefix | maze | chess")->required();
  generate->add_option("--out", gen.out, "output directory")->required();
  generate->add_option("--seed", gen.seed, "generation seed");
  generate->add_option("--bits", gen.bits, "prefix: string length");
  generate->add_option("--count", gen.count, "prefix/maze: sample count");
  generate->add_option("--cells", gen.cells, "maze: cell sizes to mix")->delimiter(',');
  generate->add_option("--csv", gen.csv, "chess: Lichess puzzle csv");
  generate->add_option("--rating-split", gen.rating_split, "chess: easy/hard rating boundary");

  TrainArgs tr;
  CLI::App* train_cmd = app.add_subcommand("train", "Train a model and write checkpoint + run log");
  train_cmd->add_option("--profile", tr.profile, "built-in config profile");
  train_cmd->add_option("--config", tr.config_file, "config file (key = value lines)");
  train_cmd->add_option("--set", tr.overrides, "dotted-key override, e.g. net.width=32")->take_all();
  train_cmd->add_option("--data", tr.data, "training dataset (overrides data.train)");
  train_cmd->add_option("--out", tr.out, "output directory")->required();

  EvalArgs ev;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Iteration-budget sweep over checkpoints");
  eval_cmd->add_option("--checkpoint", ev.checkpoints, "checkpoint file(s)")->required()->take_all();
  eval_cmd->add_option("--data", ev.data, "test dataset")->required();
  eval_cmd->add_option("--test-name", ev.test_name, "label for the test_set column");
  eval_cmd->add_option("--m-min", ev.m_min, "lowest iteration budget");
  eval_cmd->add_option("--m-max", ev.m_max, "highest iteration budget");
  eval_cmd->add_option("--m", ev.m_values, "explicit iteration budgets")->delimiter(',');
  eval_cmd->add_option("--workers", ev.workers, "evaluation threads");
  eval_cmd->add_option("--out", ev.out, "output directory")->required();

  VisualizeArgs vis;
  CLI::App* vis_cmd = app.add_subcommand("visualize", "Per-iteration heatmap panels for one sample");
  vis_cmd->add_option("--checkpoint", vis.checkpoint, "checkpoint file")->required();
  vis_cmd->add_option("--data", vis.data, "dataset with the sample")->required();
  vis_cmd->add_option("--index", vis.index, "sample index");
  vis_cmd->add_option("--iterations", vis.iterations, "iteration budget (default: train k)");
  vis_cmd->add_option("--out", vis.out, "output directory")->required();

  ReportArgs rep;
  CLI::App* rep_cmd = app.add_subcommand("report", "Aggregate eval csvs into a depth/variant table");
  rep_cmd->add_option("--in", rep.inputs, "eval report.csv file(s)")->required()->take_all();
  rep_cmd->add_option("--out", rep.out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) return run_generate(gen);
    if (*train_cmd) return run_train(tr);
    if (*eval_cmd) return run_eval(ev);
    if (*vis_cmd) return run_visualize(vis);
    if (*rep_cmd) return run_report(rep);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const DivergenceError& e) {
    std::cerr << "divergence: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
