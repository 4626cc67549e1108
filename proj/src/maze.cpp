#include "iternet/maze.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <stdexcept>

#include "iternet/binio.hpp"
#include "iternet/errors.hpp"
#include "iternet/rng.hpp"

namespace iternet::data {

int Maze::removed_walls() const {
  int open = 0;
  for (std::uint8_t v : open_right) open += v;
  for (std::uint8_t v : open_down) open += v;
  return open;
}

Maze gen_maze(int n_cells, std::uint64_t seed) {
  if (n_cells < 2) throw ConfigError("maze: need at least 2x2 cells");
  Maze maze;
  maze.n = n_cells;
  maze.open_right.assign(static_cast<std::size_t>(n_cells) * n_cells, 0);
  maze.open_down.assign(static_cast<std::size_t>(n_cells) * n_cells, 0);

  Rng rng(seed);
  const int total = n_cells * n_cells;
  std::vector<std::uint8_t> visited(static_cast<std::size_t>(total), 0);
  std::vector<int> stack;
  stack.reserve(static_cast<std::size_t>(total));
  const int origin = static_cast<int>(rng.below(static_cast<std::uint64_t>(total)));
  stack.push_back(origin);
  visited[static_cast<std::size_t>(origin)] = 1;

  while (!stack.empty()) {
    const int cell = stack.back();
    const int r = cell / n_cells;
    const int c = cell % n_cells;

    std::array<int, 4> neighbors{};
    int n_unvisited = 0;
    if (r > 0 && !visited[static_cast<std::size_t>(cell - n_cells)]) neighbors[n_unvisited++] = cell - n_cells;
    if (r + 1 < n_cells && !visited[static_cast<std::size_t>(cell + n_cells)]) neighbors[n_unvisited++] = cell + n_cells;
    if (c > 0 && !visited[static_cast<std::size_t>(cell - 1)]) neighbors[n_unvisited++] = cell - 1;
    if (c + 1 < n_cells && !visited[static_cast<std::size_t>(cell + 1)]) neighbors[n_unvisited++] = cell + 1;

    if (n_unvisited == 0) {
      stack.pop_back();
      continue;
    }
    const int next = neighbors[rng.below(static_cast<std::uint64_t>(n_unvisited))];
    if (next == cell - n_cells) maze.open_down[static_cast<std::size_t>(next)] = 1;
    else if (next == cell + n_cells) maze.open_down[static_cast<std::size_t>(cell)] = 1;
    else if (next == cell - 1) maze.open_right[static_cast<std::size_t>(next)] = 1;
    else maze.open_right[static_cast<std::size_t>(cell)] = 1;
    visited[static_cast<std::size_t>(next)] = 1;
    stack.push_back(next);
  }

  const int start = static_cast<int>(rng.below(static_cast<std::uint64_t>(total)));
  int goal = start;
  while (goal == start) goal = static_cast<int>(rng.below(static_cast<std::uint64_t>(total)));
  maze.start_r = start / n_cells;
  maze.start_c = start % n_cells;
  maze.goal_r = goal / n_cells;
  maze.goal_c = goal % n_cells;
  return maze;
}

std::vector<std::pair<int, int>> solve_maze_bfs(const Maze& maze) {
  const int n = maze.n;
  const int total = n * n;
  const int start = maze.start_r * n + maze.start_c;
  const int goal = maze.goal_r * n + maze.goal_c;
  std::vector<int> parent(static_cast<std::size_t>(total), -2);
  parent[static_cast<std::size_t>(start)] = -1;
  std::deque<int> frontier{start};
  while (!frontier.empty() && parent[static_cast<std::size_t>(goal)] == -2) {
    const int cell = frontier.front();
    frontier.pop_front();
    const int r = cell / n;
    const int c = cell % n;
    const auto visit = [&](int next) {
      if (parent[static_cast<std::size_t>(next)] == -2) {
        parent[static_cast<std::size_t>(next)] = cell;
        frontier.push_back(next);
      }
    };
    if (c + 1 < n && maze.passage_right(r, c)) visit(cell + 1);
    if (c > 0 && maze.passage_right(r, c - 1)) visit(cell - 1);
    if (r + 1 < n && maze.passage_down(r, c)) visit(cell + n);
    if (r > 0 && maze.passage_down(r - 1, c)) visit(cell - n);
  }
  if (parent[static_cast<std::size_t>(goal)] == -2) {
    throw std::logic_error("maze invariant violated: goal unreachable from start");
  }
  std::vector<std::pair<int, int>> path;
  for (int cell = goal; cell != -1; cell = parent[static_cast<std::size_t>(cell)]) {
    path.emplace_back(cell / n, cell % n);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

MazeImage render_maze(const Maze& maze) {
  const int extent = 2 * maze.n + 1;
  if (extent > kMazeCanvas) {
    throw ConfigError("maze with " + std::to_string(maze.n) + " cells per side does not fit the " +
                      std::to_string(kMazeCanvas) + "-pixel canvas");
  }
  MazeImage img;
  img.extent = extent;
  img.image = Tensor({3, kMazeCanvas, kMazeCanvas});
  img.mask.assign(static_cast<std::size_t>(kMazeCanvas) * kMazeCanvas, 0);

  double* red = img.image.data();
  double* green = red + kMazeCanvas * kMazeCanvas;
  double* blue = green + kMazeCanvas * kMazeCanvas;
  const auto paint = [&](int y, int x, double r, double g, double b) {
    const std::size_t i = static_cast<std::size_t>(y * kMazeCanvas + x);
    red[i] = r;
    green[i] = g;
    blue[i] = b;
  };

  const int n = maze.n;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      paint(2 * r + 1, 2 * c + 1, 1.0, 1.0, 1.0);
      if (c + 1 < n && maze.passage_right(r, c)) paint(2 * r + 1, 2 * c + 2, 1.0, 1.0, 1.0);
      if (r + 1 < n && maze.passage_down(r, c)) paint(2 * r + 2, 2 * c + 1, 1.0, 1.0, 1.0);
    }
  }
  paint(2 * maze.start_r + 1, 2 * maze.start_c + 1, 1.0, 0.0, 0.0);
  paint(2 * maze.goal_r + 1, 2 * maze.goal_c + 1, 0.0, 1.0, 0.0);

  const auto path = solve_maze_bfs(maze);
  for (std::size_t i = 0; i < path.size(); ++i) {
    const auto [r, c] = path[i];
    img.mask[static_cast<std::size_t>((2 * r + 1) * kMazeCanvas + (2 * c + 1))] = 1;
    if (i + 1 < path.size()) {
      const auto [nr, nc] = path[i + 1];
      img.mask[static_cast<std::size_t>((r + nr + 1) * kMazeCanvas + (c + nc + 1))] = 1;
    }
  }
  return img;
}

std::uint64_t maze_hash(const Maze& maze) {
  std::string bytes;
  binio::put_u32(bytes, static_cast<std::uint32_t>(maze.n));
  bytes.append(reinterpret_cast<const char*>(maze.open_right.data()), maze.open_right.size());
  bytes.append(reinterpret_cast<const char*>(maze.open_down.data()), maze.open_down.size());
  binio::put_u32(bytes, static_cast<std::uint32_t>(maze.start_r * maze.n + maze.start_c));
  binio::put_u32(bytes, static_cast<std::uint32_t>(maze.goal_r * maze.n + maze.goal_c));
  return binio::fnv1a(bytes);
}

Dataset gen_maze_dataset(const std::vector<int>& cell_sizes, std::int64_t count, std::uint64_t seed) {
  if (cell_sizes.empty()) throw ConfigError("maze dataset: need at least one cell size");
  if (count < 1) throw DataError("maze dataset: count must be positive");
  for (int s : cell_sizes) {
    if (s < 2 || 2 * s + 1 > kMazeCanvas) throw ConfigError("maze dataset: invalid cell size " + std::to_string(s));
  }
  Dataset ds;
  ds.task = nets::Task::maze;
  ds.input_shape = {3, kMazeCanvas, kMazeCanvas};
  ds.target_shape = {kMazeCanvas, kMazeCanvas};
  ds.params = {{"task", "maze"}, {"cell_sizes", cell_sizes}, {"count", count}, {"seed", seed}};
  for (std::int64_t i = 0; i < count; ++i) {
    Rng pick = Rng::child(seed, static_cast<std::uint64_t>(i));
    const int size = cell_sizes[pick.below(cell_sizes.size())];
    const Maze maze = gen_maze(size, pick.next_u64());
    const MazeImage img = render_maze(maze);
    ds.append(img.image, img.mask);
  }
  return ds;
}

}  // namespace iternet::data
