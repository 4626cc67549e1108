#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>

#include "iternet/binio.hpp"
#include "iternet/checkpoint.hpp"
#include "iternet/config.hpp"
#include "iternet/errors.hpp"
#include "iternet/optim.hpp"
#include "iternet/prefix.hpp"
#include "iternet/rng.hpp"
#include "iternet/schedule.hpp"
#include "iternet/trainer.hpp"

using namespace iternet;
using namespace iternet::training;

namespace {

std::vector<Tensor> one_param(std::vector<double> values) {
  const int n = static_cast<int>(values.size());
  std::vector<Tensor> params;
  params.push_back(Tensor::from({n}, std::move(values)));
  return params;
}

void set_grads(std::vector<Tensor>& params, const std::vector<double>& g) {
  double* grad = params[0].grad();
  for (std::size_t i = 0; i < g.size(); ++i) grad[i] = g[i];
}

}  // namespace

TEST_CASE("adam with zero gradients only applies weight decay") {
  auto params = one_param({1.0, -2.0});
  params[0].grad();
  AdamState state = AdamState::init(params);
  adam_step(params, state, 0.1, 0.5);
  CHECK(params[0][0] == doctest::Approx(1.0 * (1.0 - 0.1 * 0.5)));
  CHECK(params[0][1] == doctest::Approx(-2.0 * (1.0 - 0.1 * 0.5)));
}

TEST_CASE("adam step size approaches lr under a constant gradient") {
  auto params = one_param({0.0});
  AdamState state = AdamState::init(params);
  const double lr = 0.01;
  double previous = params[0][0];
  double step = 0.0;
  for (int i = 0; i < 200; ++i) {
    set_grads(params, {0.37});
    adam_step(params, state, lr, 0.0);
    step = previous - params[0][0];
    previous = params[0][0];
  }
  // with m -> g and v -> g^2 the update magnitude settles at lr
  CHECK(step == doctest::Approx(lr).epsilon(0.01));
}

TEST_CASE("zero learning rate freezes parameters") {
  auto params = one_param({3.0, 4.0});
  AdamState state = AdamState::init(params);
  set_grads(params, {5.0, -5.0});
  adam_step(params, state, 0.0, 0.5);
  CHECK(params[0][0] == 3.0);
  CHECK(params[0][1] == 4.0);
}

TEST_CASE("sgd momentum basics") {
  auto params = one_param({1.0});
  MomentumState state = MomentumState::init(params);
  params[0].grad();
  sgd_momentum_step(params, state, 0.1, 0.9, 0.0);
  CHECK(params[0][0] == 1.0);  // zero velocity, zero gradient, no decay

  // first step equals plain sgd
  set_grads(params, {2.0});
  sgd_momentum_step(params, state, 0.1, 0.9, 0.0);
  CHECK(params[0][0] == doctest::Approx(1.0 - 0.1 * 2.0));

  // second constant-gradient step adds the momentum-compounded delta:
  // total displacement is lr*g*(1 + 1.9)
  set_grads(params, {2.0});
  sgd_momentum_step(params, state, 0.1, 0.9, 0.0);
  CHECK(params[0][0] == doctest::Approx(1.0 - 0.1 * 2.0 * (1.0 + 1.9)));
}

TEST_CASE("gradient clipping rescales only above the threshold") {
  auto params = one_param({0.0, 0.0});
  set_grads(params, {0.3, 0.4});  // norm 0.5
  clip_gradients(params, 1.0);
  CHECK(params[0].grad_vector()[0] == 0.3);
  CHECK(params[0].grad_vector()[1] == 0.4);

  set_grads(params, {2.4, 3.2});  // norm 4
  clip_gradients(params, 1.0);
  CHECK(global_grad_norm(params) == doctest::Approx(1.0).epsilon(1e-12));
  // direction preserved
  CHECK(params[0].grad_vector()[1] / params[0].grad_vector()[0] == doctest::Approx(3.2 / 2.4));

  set_grads(params, {2.4, 3.2});
  clip_gradients_elementwise(params, 1.0);
  CHECK(params[0].grad_vector()[0] == 1.0);
  CHECK(params[0].grad_vector()[1] == 1.0);
}

TEST_CASE("learning rate schedule hits the published breakpoints") {
  ExperimentConfig prefix = ExperimentConfig::profile("paper-prefix");
  CHECK(lr_at(0, prefix) == doctest::Approx(0.001 / 100.0));
  CHECK(lr_at(10, prefix) == doctest::Approx(0.001));  // warmup boundary is exact
  CHECK(lr_at(50, prefix) == doctest::Approx(0.001));
  CHECK(lr_at(100, prefix) == doctest::Approx(0.0005));
  CHECK(lr_at(250, prefix) == doctest::Approx(0.00025));
  CHECK(lr_at(300, prefix) == doctest::Approx(0.000125));
  CHECK(lr_at(499, prefix) == doctest::Approx(0.000125));

  ExperimentConfig maze = ExperimentConfig::profile("paper-maze");
  CHECK(lr_at(180, maze) == doctest::Approx(0.0001));
  CHECK(lr_at(174, maze) == doctest::Approx(0.001));

  ExperimentConfig chess = ExperimentConfig::profile("paper-chess");
  CHECK(lr_at(3, chess) == doctest::Approx(0.1));
  CHECK(lr_at(120, chess) == doctest::Approx(0.001));

  // warmup rises geometrically and is monotone
  for (int e = 0; e < 10; ++e) CHECK(lr_at(e, prefix) < lr_at(e + 1, prefix));
  CHECK_THROWS_AS(lr_at(-1, prefix), ConfigError);
}

TEST_CASE("config text round trip and overrides") {
  ExperimentConfig cfg = ExperimentConfig::profile("prefix-small");
  cfg.train_data = "/tmp/train.ds";
  const ExperimentConfig back = ExperimentConfig::from_text(cfg.to_text());
  CHECK(back.hash() == cfg.hash());
  CHECK(back.milestones == cfg.milestones);

  ExperimentConfig other = cfg;
  other.apply_override("net.width", "48");
  other.apply_override("schedule.milestones", "10,20,30");
  CHECK(other.width == 48);
  CHECK(other.milestones == std::vector<int>{10, 20, 30});
  CHECK(other.hash() != cfg.hash());
  CHECK_THROWS_AS(cfg.apply_override("net.depth", "3"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::from_text("task: prefix\n"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::profile("nonsense"), ConfigError);
}

TEST_CASE("training with zero learning rate leaves parameters fixed") {
  data::Dataset ds = data::gen_prefix_dataset(8, 12, 5);
  ExperimentConfig cfg = ExperimentConfig::profile("prefix-small");
  cfg.width = 8;
  cfg.iterations = 2;
  cfg.head_channels = {4, 2, 2};
  cfg.lr = 0.0;
  cfg.warmup_epochs = 0;
  cfg.milestones = {};
  cfg.epochs = 1;
  cfg.batch_size = 4;

  const nets::Net reference = nets::Net::build(cfg.net_spec(), cfg.seed);
  const TrainResult result = train(cfg, ds);
  const auto before = reference.parameters();
  const auto after = result.net.parameters();
  for (std::size_t i = 0; i < before.size(); ++i) {
    for (std::int64_t j = 0; j < before[i].size(); ++j) CHECK(before[i][j] == after[i][j]);
  }
  REQUIRE(result.log.epochs.size() == 1);
  CHECK(result.log.epochs[0].loss > 0.0);
}

TEST_CASE("a tiny dataset is memorized to full accuracy") {
  data::Dataset ds = data::gen_prefix_dataset(8, 24, 11);
  ExperimentConfig cfg = ExperimentConfig::profile("prefix-small");
  cfg.width = 16;
  cfg.iterations = 3;
  cfg.head_channels = {8, 4, 2};
  cfg.epochs = 200;
  cfg.batch_size = 8;
  cfg.warmup_epochs = 5;
  cfg.milestones = {120, 160};
  cfg.drop_factor = 0.5;
  cfg.require_perfect_train_acc = true;

  const TrainResult result = train(cfg, ds);
  CHECK(result.log.final_train_accuracy == doctest::Approx(1.0));
  CHECK(result.log.retained);
  CHECK(result.log.epochs.front().loss > result.log.epochs.back().loss);
}

TEST_CASE("training is deterministic per seed") {
  data::Dataset ds = data::gen_prefix_dataset(8, 16, 3);
  ExperimentConfig cfg = ExperimentConfig::profile("prefix-small");
  cfg.width = 8;
  cfg.iterations = 2;
  cfg.head_channels = {4, 2, 2};
  cfg.epochs = 3;
  cfg.batch_size = 8;

  const TrainResult a = train(cfg, ds);
  const TrainResult b = train(cfg, ds);
  REQUIRE(a.log.epochs.size() == b.log.epochs.size());
  for (std::size_t i = 0; i < a.log.epochs.size(); ++i) {
    CHECK(a.log.epochs[i].loss == b.log.epochs[i].loss);
    CHECK(a.log.epochs[i].train_accuracy == b.log.epochs[i].train_accuracy);
    CHECK(a.log.epochs[i].lr == b.log.epochs[i].lr);
  }
  CHECK(a.log.final_train_accuracy == b.log.final_train_accuracy);
}

TEST_CASE("oversized learning rates abort with a divergence error") {
  data::Dataset ds = data::gen_prefix_dataset(8, 8, 3);
  ExperimentConfig cfg = ExperimentConfig::profile("prefix-small");
  cfg.width = 8;
  cfg.iterations = 2;
  cfg.head_channels = {4, 2, 2};
  cfg.optimizer = "sgd_momentum";
  cfg.lr = 1e300;
  cfg.clip_norm = 0.0;
  cfg.warmup_epochs = 0;
  cfg.milestones = {};
  cfg.epochs = 3;
  cfg.batch_size = 2;

  bool hook_saw_divergence = false;
  CHECK_THROWS_AS(train(cfg, ds,
                        [&](const std::string& tag, const nets::Net&, const RunLog&) {
                          if (tag == "diverged") hook_saw_divergence = true;
                        }),
                  DivergenceError);
  CHECK(hook_saw_divergence);
}

TEST_CASE("checkpoints restore exactly and refuse tampering") {
  data::Dataset ds = data::gen_prefix_dataset(8, 8, 3);
  ExperimentConfig cfg = ExperimentConfig::profile("prefix-small");
  cfg.width = 8;
  cfg.iterations = 2;
  cfg.head_channels = {4, 2, 2};
  cfg.epochs = 2;
  cfg.batch_size = 4;
  const TrainResult result = train(cfg, ds);

  const std::string path = "/tmp/iternet_test_ckpt.bin";
  save_checkpoint(result.net, cfg, result.log, path);
  const Checkpoint loaded = load_checkpoint(path);
  CHECK(loaded.config.hash() == cfg.hash());
  CHECK(!loaded.run_log_csv.empty());

  Tensor input = ds.input(0);
  double* d = input.data();
  for (std::int64_t j = 0; j < input.size(); ++j) d[j] -= 0.5;
  const Tensor expect = result.net.forward(input);
  const Tensor got = loaded.net.forward(input);
  for (std::int64_t j = 0; j < expect.size(); ++j) CHECK(expect[j] == got[j]);

  std::string bytes = binio::read_file(path);
  bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 0x40);
  binio::write_file(path, bytes);
  CHECK_THROWS_AS(load_checkpoint(path), DataError);

  save_checkpoint(result.net, cfg, result.log, path);
  ExperimentConfig other = cfg;
  other.width = 16;
  CHECK_THROWS_AS(load_checkpoint(path, &other), ConfigError);
  std::remove(path.c_str());
}

TEST_CASE("dataset and config task mismatch is refused") {
  data::Dataset ds = data::gen_prefix_dataset(8, 8, 3);
  ExperimentConfig cfg = ExperimentConfig::profile("maze-small");
  cfg.epochs = 1;
  CHECK_THROWS_AS(train(cfg, ds), DataError);
}
