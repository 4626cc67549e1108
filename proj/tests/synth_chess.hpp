#pragma once

// Deterministic generator of Lichess-schema puzzle rows for codec tests.
// Positions come from a mechanical random walk over the standard starting
// position (no live puzzle database ships with the repository); every row
// carries a playable setup move and a 4-character solution move, with an
// optional fraction of promotion solutions to exercise the skip path.

#include <array>
#include <cctype>
#include <cstdint>
#include <string>
#include <vector>

#include "iternet/rng.hpp"

namespace synth_chess {

struct Row {
  std::string fen;
  std::string moves;  // "<setup> <solution>"
  int rating = 0;
};

namespace detail {

struct WalkBoard {
  std::array<char, 64> squares{};
  bool white_to_move = true;
};

inline WalkBoard initial_board() {
  WalkBoard b;
  const char* back = "rnbqkbnr";
  for (int c = 0; c < 8; ++c) {
    b.squares[static_cast<std::size_t>(c)] = back[c];
    b.squares[static_cast<std::size_t>(8 + c)] = 'p';
    b.squares[static_cast<std::size_t>(48 + c)] = 'P';
    b.squares[static_cast<std::size_t>(56 + c)] = static_cast<char>(std::toupper(back[c]));
  }
  return b;
}

inline bool is_white(char piece) { return std::isupper(static_cast<unsigned char>(piece)) != 0; }

inline std::string square_name(int sq) {
  std::string s;
  s.push_back(static_cast<char>('a' + sq % 8));
  s.push_back(static_cast<char>('1' + (7 - sq / 8)));
  return s;
}

// a random piece move for `side`: destination empty or an enemy non-king
// square; pawns only step one row forward onto an empty square, never onto
// the last rank (promotions are injected separately)
inline bool random_move(const WalkBoard& b, bool side_white, iternet::Rng& rng, int* from, int* to) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    const int f = static_cast<int>(rng.below(64));
    const char piece = b.squares[static_cast<std::size_t>(f)];
    if (piece == 0 || is_white(piece) != side_white) continue;
    int t = -1;
    if (piece == 'P' || piece == 'p') {
      t = f + (piece == 'P' ? -8 : 8);
      if (t < 8 || t >= 56 || b.squares[static_cast<std::size_t>(t)] != 0) continue;
    } else {
      t = static_cast<int>(rng.below(64));
      const char captured = b.squares[static_cast<std::size_t>(t)];
      if (t == f) continue;
      if (captured != 0 && (is_white(captured) == side_white || captured == 'K' || captured == 'k')) continue;
    }
    *from = f;
    *to = t;
    return true;
  }
  return false;
}

inline void apply(WalkBoard& b, int from, int to) {
  b.squares[static_cast<std::size_t>(to)] = b.squares[static_cast<std::size_t>(from)];
  b.squares[static_cast<std::size_t>(from)] = 0;
  b.white_to_move = !b.white_to_move;
}

inline std::string to_fen(const WalkBoard& b) {
  std::string fen;
  for (int row = 0; row < 8; ++row) {
    int empty_run = 0;
    for (int col = 0; col < 8; ++col) {
      const char piece = b.squares[static_cast<std::size_t>(row * 8 + col)];
      if (piece == 0) {
        ++empty_run;
      } else {
        if (empty_run > 0) fen.push_back(static_cast<char>('0' + empty_run));
        empty_run = 0;
        fen.push_back(piece);
      }
    }
    if (empty_run > 0) fen.push_back(static_cast<char>('0' + empty_run));
    if (row < 7) fen.push_back('/');
  }
  fen += b.white_to_move ? " w" : " b";
  fen += " - - 0 1";
  return fen;
}

}  // namespace detail

inline std::vector<Row> rows(int count, std::uint64_t seed, double promotion_fraction = 0.0) {
  std::vector<Row> out;
  out.reserve(static_cast<std::size_t>(count));
  iternet::Rng rng(seed);
  while (static_cast<int>(out.size()) < count) {
    detail::WalkBoard board = detail::initial_board();
    board.white_to_move = rng.below(2) == 0;
    const int walk = 6 + static_cast<int>(rng.below(30));
    bool mover = board.white_to_move;
    for (int i = 0; i < walk; ++i) {
      int f = 0, t = 0;
      if (detail::random_move(board, mover, rng, &f, &t)) detail::apply(board, f, t);
      mover = !mover;
    }
    board.white_to_move = mover;

    // solution first (by the side answering the setup move), then a setup
    // move that leaves the solution's origin piece in place
    int sol_from = 0, sol_to = 0;
    if (!detail::random_move(board, !board.white_to_move, rng, &sol_from, &sol_to)) continue;
    int setup_from = 0, setup_to = 0;
    bool setup_ok = false;
    for (int attempt = 0; attempt < 50 && !setup_ok; ++attempt) {
      if (!detail::random_move(board, board.white_to_move, rng, &setup_from, &setup_to)) break;
      setup_ok = setup_from != sol_from && setup_to != sol_from;
      // the setup move must also not free the solution destination rule:
      // destination may be anything, so only the origin constraints matter
    }
    if (!setup_ok) continue;

    Row row;
    row.fen = detail::to_fen(board);
    std::string solution = detail::square_name(sol_from) + detail::square_name(sol_to);
    if (promotion_fraction > 0.0 && rng.uniform() < promotion_fraction) solution += "q";
    row.moves = detail::square_name(setup_from) + detail::square_name(setup_to) + " " + solution;
    row.rating = 600 + static_cast<int>(rng.below(2200));
    out.push_back(row);
  }
  return out;
}

inline std::string csv(const std::vector<Row>& rows) {
  std::string out =
      "PuzzleId,FEN,Moves,Rating,RatingDeviation,Popularity,NbPlays,Themes,GameUrl,OpeningTags\n";
  int id = 0;
  for (const Row& r : rows) {
    out += "S" + std::to_string(id++) + "," + r.fen + "," + r.moves + "," + std::to_string(r.rating) +
           ",75,90,1000,middlegame,https://example.test/" + std::to_string(id) + ",\n";
  }
  return out;
}

}  // namespace synth_chess
