#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <deque>
#include <set>
#include <unordered_set>

#include "iternet/errors.hpp"
#include "iternet/maze.hpp"
#include "iternet/prefix.hpp"
#include "iternet/rng.hpp"

using namespace iternet;
using namespace iternet::data;

namespace {

// quadratic re-summation oracle, independent of the running-xor path
std::vector<std::uint8_t> naive_prefix_oracle(std::span<const std::uint8_t> bits) {
  std::vector<std::uint8_t> out(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    int total = 0;
    for (std::size_t j = 0; j <= i; ++j) total += bits[j];
    out[i] = static_cast<std::uint8_t>(total % 2);
  }
  return out;
}

// shortest pixel path on the rendered image, ignoring the cell-level solver
std::vector<int> image_bfs_path(const MazeImage& img) {
  const int canvas = kMazeCanvas;
  const double* red = img.image.data();
  const double* green = red + canvas * canvas;
  const double* blue = green + canvas * canvas;
  int start = -1, goal = -1;
  std::vector<std::uint8_t> open(static_cast<std::size_t>(canvas * canvas), 0);
  for (int p = 0; p < canvas * canvas; ++p) {
    const bool r = red[p] > 0.5, g = green[p] > 0.5, b = blue[p] > 0.5;
    if (r || g || b) open[static_cast<std::size_t>(p)] = 1;
    if (r && !g && !b) start = p;
    if (g && !r && !b) goal = p;
  }
  REQUIRE(start >= 0);
  REQUIRE(goal >= 0);
  std::vector<int> parent(static_cast<std::size_t>(canvas * canvas), -2);
  parent[static_cast<std::size_t>(start)] = -1;
  std::deque<int> frontier{start};
  while (!frontier.empty()) {
    const int p = frontier.front();
    frontier.pop_front();
    if (p == goal) break;
    const int y = p / canvas, x = p % canvas;
    const auto visit = [&](int ny, int nx) {
      if (ny < 0 || nx < 0 || ny >= canvas || nx >= canvas) return;
      const int q = ny * canvas + nx;
      if (open[static_cast<std::size_t>(q)] && parent[static_cast<std::size_t>(q)] == -2) {
        parent[static_cast<std::size_t>(q)] = p;
        frontier.push_back(q);
      }
    };
    visit(y - 1, x);
    visit(y + 1, x);
    visit(y, x - 1);
    visit(y, x + 1);
  }
  REQUIRE(parent[static_cast<std::size_t>(goal)] != -2);
  std::vector<int> path;
  for (int p = goal; p != -1; p = parent[static_cast<std::size_t>(p)]) path.push_back(p);
  return path;
}

}  // namespace

TEST_CASE("prefix target worked example") {
  const std::vector<std::uint8_t> input{1, 0, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 1, 0, 1, 1, 0, 1};
  const std::vector<std::uint8_t> expected{1, 1, 1, 0, 0, 1, 1, 0, 0, 1, 1, 0, 1, 1, 0, 1, 1, 0};
  CHECK(prefix_target(input) == expected);
}

TEST_CASE("prefix target edge patterns") {
  CHECK(prefix_target(std::vector<std::uint8_t>(6, 0)) == std::vector<std::uint8_t>(6, 0));
  CHECK(prefix_target(std::vector<std::uint8_t>{1, 1, 1, 1}) == std::vector<std::uint8_t>{1, 0, 1, 0});
}

TEST_CASE("prefix target equals the quadratic oracle") {
  Rng rng(12);
  for (int n : {8, 16, 32, 64}) {
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<std::uint8_t> bits(static_cast<std::size_t>(n));
      for (auto& b : bits) b = static_cast<std::uint8_t>(rng.below(2));
      CHECK(prefix_target(bits) == naive_prefix_oracle(bits));
    }
  }
}

TEST_CASE("prefix dataset draws distinct strings") {
  Dataset ds = gen_prefix_dataset(4, 16, 99);
  CHECK(ds.size() == 16);
  std::set<std::vector<float>> unique;
  for (std::int64_t i = 0; i < 16; ++i) {
    std::vector<float> row(ds.inputs.begin() + i * 4, ds.inputs.begin() + (i + 1) * 4);
    unique.insert(row);
  }
  CHECK(unique.size() == 16);  // the whole 4-bit space, each string once
}

TEST_CASE("prefix dataset rejects impossible draws") {
  CHECK_THROWS_AS(gen_prefix_dataset(3, 9, 1), DataError);
  CHECK_THROWS_AS(gen_prefix_dataset(0, 1, 1), DataError);
}

TEST_CASE("prefix dataset is deterministic per seed") {
  Dataset a = gen_prefix_dataset(16, 200, 7);
  Dataset b = gen_prefix_dataset(16, 200, 7);
  Dataset c = gen_prefix_dataset(16, 200, 8);
  CHECK(a.serialize() == b.serialize());
  CHECK(a.serialize() != c.serialize());
  CHECK(a.content_hash() == b.content_hash());
}

TEST_CASE("maze carving yields a spanning tree") {
  for (int n : {2, 5, 9, 13}) {
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
      const Maze maze = gen_maze(n, seed);
      CHECK(maze.removed_walls() == n * n - 1);
      const auto path = solve_maze_bfs(maze);  // throws if disconnected
      CHECK(path.front() == std::make_pair(maze.start_r, maze.start_c));
      CHECK(path.back() == std::make_pair(maze.goal_r, maze.goal_c));
    }
  }
  CHECK_THROWS_AS(gen_maze(1, 5), ConfigError);
}

TEST_CASE("2x2 mazes come from the four spanning trees") {
  // the 2x2 grid graph is a 4-cycle; its spanning trees drop exactly one of
  // the four edges
  std::set<std::array<bool, 4>> seen;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Maze maze = gen_maze(2, seed);
    const std::array<bool, 4> edges{maze.passage_right(0, 0), maze.passage_right(1, 0),
                                    maze.passage_down(0, 0), maze.passage_down(0, 1)};
    CHECK(maze.removed_walls() == 3);
    int open = 0;
    for (bool e : edges) open += e ? 1 : 0;
    CHECK(open == 3);
    seen.insert(edges);
  }
  CHECK(seen.size() == 4);  // all four spanning trees occur
}

TEST_CASE("bfs path on an enumerated 2x2 maze") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Maze maze = gen_maze(2, seed);
    maze.start_r = 0;
    maze.start_c = 0;
    maze.goal_r = 0;
    maze.goal_c = 1;
    const auto path = solve_maze_bfs(maze);
    if (maze.passage_right(0, 0)) {
      CHECK(path.size() == 2);  // adjacent with an open wall
    } else {
      CHECK(path.size() == 4);  // forced the long way around the cycle
    }
  }
}

TEST_CASE("rendering geometry and colors") {
  const Maze maze9 = gen_maze(9, 4);
  const MazeImage img9 = render_maze(maze9);
  CHECK(img9.extent == 19);
  const Maze maze13 = gen_maze(13, 4);
  CHECK(render_maze(maze13).extent == 27);
  CHECK_THROWS_AS(render_maze(gen_maze(16, 1)), ConfigError);

  const int canvas = kMazeCanvas;
  const double* red = img9.image.data();
  const double* green = red + canvas * canvas;
  const double* blue = green + canvas * canvas;
  int start_pixels = 0, goal_pixels = 0;
  for (int p = 0; p < canvas * canvas; ++p) {
    const bool r = red[p] > 0.5, g = green[p] > 0.5, b = blue[p] > 0.5;
    if (r && !g) ++start_pixels;
    if (g && !r) ++goal_pixels;
    const int y = p / canvas, x = p % canvas;
    if (y >= img9.extent || x >= img9.extent) {
      CHECK((!r && !g && !b));  // padding stays wall-colored
    }
    if (!r && !g && !b) CHECK(img9.mask[static_cast<std::size_t>(p)] == 0);  // walls are never on the path
  }
  CHECK(start_pixels == 1);
  CHECK(goal_pixels == 1);
}

TEST_CASE("mask equals the image-level shortest path") {
  for (std::uint64_t seed = 10; seed < 40; ++seed) {
    const int n = 5 + static_cast<int>(seed % 5);
    const MazeImage img = render_maze(gen_maze(n, seed));
    const std::vector<int> path = image_bfs_path(img);
    std::vector<std::uint8_t> oracle_mask(img.mask.size(), 0);
    for (int p : path) oracle_mask[static_cast<std::size_t>(p)] = 1;
    CHECK(oracle_mask == img.mask);
  }
}

TEST_CASE("duplicate rate at nine cells stays under half a percent") {
  std::unordered_set<std::uint64_t> seen;
  const int trials = 50000;
  int duplicates = 0;
  for (int i = 0; i < trials; ++i) {
    if (!seen.insert(maze_hash(gen_maze(9, 0xabc000ull + static_cast<std::uint64_t>(i)))).second) ++duplicates;
  }
  CHECK(duplicates <= trials / 200);
}

TEST_CASE("maze dataset container round trip") {
  Dataset ds = gen_maze_dataset({5, 7, 9}, 12, 3);
  CHECK(ds.size() == 12);
  CHECK(ds.input_shape == std::vector<int>{3, kMazeCanvas, kMazeCanvas});
  const std::string bytes = ds.serialize();
  const Dataset back = Dataset::deserialize(std::span<const char>(bytes.data(), bytes.size()));
  CHECK(back.serialize() == bytes);
  CHECK(back.task == nets::Task::maze);
  CHECK(back.size() == 12);

  const std::string path = "/tmp/iternet_test_maze.ds";
  ds.save(path);
  const Dataset loaded = Dataset::load(path);
  CHECK(loaded.serialize() == bytes);
  CHECK(loaded.params["cell_sizes"] == std::vector<int>{5, 7, 9});
}

TEST_CASE("dataset rejects malformed appends and containers") {
  Dataset ds = gen_prefix_dataset(8, 4, 1);
  CHECK_THROWS_AS(ds.append(Tensor({1, 9}), std::vector<std::uint8_t>(9, 0)), DataError);
  std::string bytes = ds.serialize();
  bytes[0] = 'X';
  CHECK_THROWS_AS(Dataset::deserialize(std::span<const char>(bytes.data(), bytes.size())), DataError);
  bytes = ds.serialize();
  bytes.pop_back();
  CHECK_THROWS_AS(Dataset::deserialize(std::span<const char>(bytes.data(), bytes.size())), DataError);
}
