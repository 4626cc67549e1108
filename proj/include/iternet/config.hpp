#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iternet/net.hpp"

namespace iternet::training {

// Everything a training run depends on, serialized as flat `key = value`
// text. Profiles carry the published per-task defaults plus reduced-scale
// variants sized for a workstation.
struct ExperimentConfig {
  int config_version = 1;
  nets::Task task = nets::Task::prefix;

  nets::Variant variant = nets::Variant::recurrent;
  int width = 0;
  int iterations = 0;
  int dilation = 1;
  std::vector<int> head_channels;  // empty = task default
  double init_gain = 2.0;

  std::string optimizer = "adam";  // adam | sgd_momentum
  double lr = 1e-3;
  double weight_decay = 2e-4;
  double momentum = 0.9;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double clip_norm = 0.0;          // 0 disables clipping
  std::string clip_mode = "global";  // global | element

  int warmup_epochs = 0;
  std::vector<int> milestones;
  double drop_factor = 1.0;

  int epochs = 1;
  int batch_size = 1;
  std::uint64_t seed = 1;
  bool normalize_inputs = false;       // subtract 0.5 from every input value
  bool require_perfect_train_acc = false;
  std::string loss_mode = "final";     // final | mean_iterations (experimental)
  int workers = 1;
  int checkpoint_every = 0;            // epochs between checkpoints; 0 = final only

  std::string train_data;
  std::string eval_data;

  static ExperimentConfig profile(const std::string& name);
  static std::vector<std::string> profile_names();
  static ExperimentConfig from_text(const std::string& text);
  static ExperimentConfig from_file(const std::string& path);

  // dotted-key override, e.g. "net.width=32"
  void apply_override(const std::string& key, const std::string& value);

  std::string to_text() const;  // canonical form: fixed key order
  std::uint64_t hash() const;

  nets::NetSpec net_spec() const;
  void validate() const;
  std::string model_id() const;  // <task>-<variant>-d<depth>-w<width>
};

}  // namespace iternet::training
