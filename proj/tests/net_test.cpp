#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>
#include <vector>

#include "iternet/errors.hpp"
#include "iternet/grad_check.hpp"
#include "iternet/net.hpp"
#include "iternet/ops.hpp"
#include "iternet/rng.hpp"

using namespace iternet;
using nets::Net;
using nets::NetSpec;
using nets::Task;
using nets::Variant;

namespace {

Tensor random_input(std::vector<int> shape, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t(std::move(shape));
  for (std::int64_t i = 0; i < t.size(); ++i) t[i] = rng.normal();
  return t;
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
  return a.same_shape(b) &&
         std::memcmp(a.data(), b.data(), static_cast<std::size_t>(a.size()) * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("effective depth arithmetic") {
  NetSpec spec = NetSpec::defaults(Task::prefix, Variant::recurrent, 0, 10);
  CHECK(spec.effective_depth() == 44);
  spec.train_iterations = 20;
  CHECK(spec.effective_depth() == 84);
}

TEST_CASE("recurrent parameter count is independent of iterations") {
  std::int64_t reference = 0;
  for (int k : {1, 5, 30}) {
    Net net = Net::build(NetSpec::defaults(Task::prefix, Variant::recurrent, 16, k), 1);
    if (reference == 0) reference = net.param_count();
    CHECK(net.param_count() == reference);
  }
}

TEST_CASE("feedforward block count follows depth") {
  // effective depth 44 means (44-4)/4 = 10 independent blocks
  Net net = Net::build(NetSpec::defaults(Task::prefix, Variant::feedforward, 8, 10), 1);
  CHECK(net.block_count() == 10);
  CHECK(net.spec().effective_depth() == 44);

  Net one = Net::build(NetSpec::defaults(Task::prefix, Variant::feedforward, 8, 1), 1);
  const std::int64_t per_block = net.param_count() - one.param_count();
  CHECK(per_block % 9 == 0);  // 9 blocks of identical size
  Net two = Net::build(NetSpec::defaults(Task::prefix, Variant::feedforward, 8, 2), 1);
  CHECK(two.param_count() - one.param_count() == per_block / 9);
}

TEST_CASE("toy parameter count by hand") {
  NetSpec spec = NetSpec::defaults(Task::prefix, Variant::recurrent, 2, 3);
  spec.head_channels = {2, 2, 2};
  Net net = Net::build(spec, 1);
  // encoder 2x1x3 = 6, block 4 * (2x2x3) = 48, head 3 * (2x2x3) = 36
  CHECK(net.param_count() == 6 + 48 + 36);
}

TEST_CASE("forward geometry per task") {
  Net maze = Net::build(NetSpec::defaults(Task::maze, Variant::recurrent, 4, 2), 1);
  Tensor maze_logits = maze.forward(random_input({3, 32, 32}, 2));
  CHECK(maze_logits.shape() == std::vector<int>{2, 32, 32});

  Net chess = Net::build(NetSpec::defaults(Task::chess, Variant::recurrent, 4, 2), 1);
  Tensor chess_logits = chess.forward(random_input({12, 8, 8}, 3));
  CHECK(chess_logits.shape() == std::vector<int>{2, 8, 8});

  CHECK_THROWS_AS(maze.forward(random_input({12, 8, 8}, 3)), ConfigError);
}

TEST_CASE("forward equals the last entry of forward_iterations at m = k") {
  Net net = Net::build(NetSpec::defaults(Task::prefix, Variant::recurrent, 8, 4), 7);
  Tensor input = random_input({1, 12}, 9);
  Tensor direct = net.forward(input);
  nets::IterationTrace trace = net.forward_iterations(input, 4);
  REQUIRE(trace.logits.size() == 4);
  CHECK(bitwise_equal(direct, trace.logits.back()));
}

TEST_CASE("trace length matches the iteration budget") {
  Net net = Net::build(NetSpec::defaults(Task::prefix, Variant::recurrent, 8, 10), 7);
  Tensor input = random_input({1, 40}, 9);
  CHECK(net.forward_iterations(input, 11).logits.size() == 11);
  CHECK(net.forward_iterations(input, 1).logits.size() == 1);
  CHECK_THROWS_AS(net.forward_iterations(input, 0), ConfigError);
}

TEST_CASE("feedforward nets only run at their own depth") {
  Net net = Net::build(NetSpec::defaults(Task::prefix, Variant::feedforward, 8, 3), 7);
  Tensor input = random_input({1, 10}, 9);
  CHECK(net.forward_iterations(input, 3).logits.size() == 3);
  CHECK_THROWS_AS(net.forward_iterations(input, 4), ConfigError);
}

TEST_CASE("mutating the shared block moves every iteration's output") {
  Net net = Net::build(NetSpec::defaults(Task::prefix, Variant::recurrent, 8, 3), 7);
  Tensor input = random_input({1, 10}, 9);
  nets::IterationTrace before = net.forward_iterations(input, 3);
  net.parameters()[1][0] += 0.5;  // first kernel of the shared block
  nets::IterationTrace after = net.forward_iterations(input, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK_FALSE(bitwise_equal(before.logits[i], after.logits[i]));
  }
}

TEST_CASE("mutating one feedforward block only moves downstream outputs") {
  Net net = Net::build(NetSpec::defaults(Task::prefix, Variant::feedforward, 8, 3), 7);
  Tensor input = random_input({1, 10}, 9);
  nets::IterationTrace before = net.forward_iterations(input, 3);
  // parameters() order: encoder, block0 x4, block1 x4, block2 x4, head x3
  net.parameters()[5][0] += 0.5;  // first kernel of block1
  nets::IterationTrace after = net.forward_iterations(input, 3);
  CHECK(bitwise_equal(before.logits[0], after.logits[0]));
  CHECK_FALSE(bitwise_equal(before.logits[1], after.logits[1]));
  CHECK_FALSE(bitwise_equal(before.logits[2], after.logits[2]));
}

TEST_CASE("build and forward are deterministic per seed") {
  const NetSpec spec = NetSpec::defaults(Task::maze, Variant::recurrent, 4, 2);
  Net a = Net::build(spec, 12345);
  Net b = Net::build(spec, 12345);
  Tensor input = random_input({3, 16, 16}, 2);
  CHECK(bitwise_equal(a.forward(input), b.forward(input)));

  Net c = Net::build(spec, 54321);
  CHECK_FALSE(bitwise_equal(a.forward(input), c.forward(input)));
}

TEST_CASE("depth counts the executed conv layers") {
  // per pass: 4k+4 convs, 4k+3 relus and 2k adds, so the tape census is
  // 10k+7 recorded ops; a drift in either count breaks the sum
  for (int k : {1, 3, 5}) {
    const NetSpec spec = NetSpec::defaults(Task::prefix, Variant::recurrent, 4, k);
    Net net = Net::build(spec, 3);
    Tensor input = random_input({1, 8}, 4);
    Tape tape;
    Tensor out = net.forward(input);
    CHECK(spec.effective_depth() == 4 * k + 4);
    CHECK(tape.recorded_ops() == static_cast<std::size_t>(10 * k + 7));
  }
}

TEST_CASE("receptive field bound is tight enough and respected") {
  for (int dilation : {1, 2}) {
    for (int k : {2, 4}) {
      NetSpec spec = NetSpec::defaults(Task::prefix, Variant::recurrent, 6, k, dilation);
      spec.head_channels = {4, 4, 2};
      Net net = Net::build(spec, 99);
      const int radius = nets::receptive_field_radius(spec, k);
      const int length = 2 * radius + 9;
      const int p = length / 2;

      Tensor input = random_input({1, length}, 17);
      Tensor base = net.forward(input);

      Tensor outside = input.clone();
      outside[p + radius + 1] += 1.0;
      Tensor shifted = net.forward(outside);
      const std::int64_t positions = base.size() / 2;
      CHECK(shifted[p] == base[p]);
      CHECK(shifted[positions + p] == base[positions + p]);

      // a uniformly dilated stack only reaches offsets that are multiples of
      // the dilation, so probe the widest reachable position
      Tensor inside = input.clone();
      inside[p + radius - dilation] += 1.0;
      Tensor moved = net.forward(inside);
      CHECK(moved[p] != base[p]);
    }
  }
}

TEST_CASE("full toy nets pass the gradient check") {
  Tensor prefix_input = random_input({1, 6}, 5);
  std::vector<std::uint8_t> prefix_target{1, 0, 1, 1, 0, 0};
  NetSpec prefix_spec = NetSpec::defaults(Task::prefix, Variant::recurrent, 4, 2);
  prefix_spec.head_channels = {4, 2, 2};
  Net prefix_net = Net::build(prefix_spec, 8);
  const double prefix_err = grad_check(
      [&]() { return per_position_cross_entropy(prefix_net.forward(prefix_input), prefix_target); },
      prefix_net.parameters());
  CHECK(prefix_err <= 1e-4);

  Tensor maze_input = random_input({3, 6, 6}, 6);
  std::vector<std::uint8_t> maze_target(36, 0);
  maze_target[7] = 1;
  maze_target[8] = 1;
  NetSpec maze_spec = NetSpec::defaults(Task::maze, Variant::feedforward, 3, 2);
  maze_spec.head_channels = {3, 2, 2};
  Net maze_net = Net::build(maze_spec, 8);
  const double maze_err = grad_check(
      [&]() { return per_position_cross_entropy(maze_net.forward(maze_input), maze_target); },
      maze_net.parameters());
  CHECK(maze_err <= 1e-4);
}

TEST_CASE("invalid specs are rejected") {
  NetSpec spec = NetSpec::defaults(Task::prefix, Variant::recurrent, 8, 2);
  spec.width = 0;
  CHECK_THROWS_AS(Net::build(spec, 1), ConfigError);
  spec = NetSpec::defaults(Task::prefix, Variant::recurrent, 8, 2);
  spec.head_channels = {8, 4};
  CHECK_THROWS_AS(Net::build(spec, 1), ConfigError);
  spec = NetSpec::defaults(Task::prefix, Variant::recurrent, 8, 0);
  spec.train_iterations = -1;
  CHECK_THROWS_AS(Net::build(spec, 1), ConfigError);
}
