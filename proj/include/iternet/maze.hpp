#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "iternet/dataset.hpp"

namespace iternet::data {

// Perfect maze on an n x n cell grid: the passage graph is a spanning tree,
// so any two cells are joined by exactly one simple path.
struct Maze {
  int n = 0;
  std::vector<std::uint8_t> open_right;  // n*n, passage between (r,c) and (r,c+1)
  std::vector<std::uint8_t> open_down;   // n*n, passage between (r,c) and (r+1,c)
  int start_r = 0, start_c = 0;
  int goal_r = 0, goal_c = 0;

  bool passage_right(int r, int c) const { return open_right[static_cast<std::size_t>(r * n + c)] != 0; }
  bool passage_down(int r, int c) const { return open_down[static_cast<std::size_t>(r * n + c)] != 0; }
  int removed_walls() const;
};

// Canvas every maze image is padded to.
inline constexpr int kMazeCanvas = 32;

// Rendered maze: 3 x 32 x 32 image (walls black, corridors white, start red,
// goal green) plus the 32 x 32 shortest-path pixel mask.
struct MazeImage {
  int extent = 0;  // active region is extent x extent, top-left aligned
  Tensor image;
  std::vector<std::uint8_t> mask;
};

// Depth-first carving over a fully walled grid; start and goal are then
// drawn uniformly among distinct cells. Deterministic per seed.
Maze gen_maze(int n_cells, std::uint64_t seed);

// The unique start-to-goal cell path, found breadth-first.
std::vector<std::pair<int, int>> solve_maze_bfs(const Maze& maze);

// Odd-grid rendering: cell (r, c) sits at pixel (2r+1, 2c+1), wall and
// passage pixels in between, one-pixel outer wall ring, zero-padded
// bottom/right to the 32 x 32 canvas. Requires 2n+1 <= 32.
MazeImage render_maze(const Maze& maze);

// Identity of the generated instance (walls + endpoints), for duplicate
// accounting.
std::uint64_t maze_hash(const Maze& maze);

// `count` rendered mazes with sizes drawn uniformly from `cell_sizes`.
Dataset gen_maze_dataset(const std::vector<int>& cell_sizes, std::int64_t count, std::uint64_t seed);

}  // namespace iternet::data
