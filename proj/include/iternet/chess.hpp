#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "iternet/dataset.hpp"

namespace iternet::data {

// Piece placement as one letter per square (0 = empty), row 0 = rank 8.
struct Board {
  std::array<char, 64> squares{};
  bool white_to_move = true;
};

// Plane layout of the 12 x 8 x 8 encoding: white P N B R Q K then black
// p n b r q k, one {0,1} plane each.
inline constexpr const char* kPieceOrder = "PNBRQKpnbrqk";

// Parses the placement and side-to-move fields of a FEN record. Malformed
// placement (wrong rank count, rank not summing to 8 files, unknown piece
// letter) raises DataError naming the offending rank.
Board parse_fen(const std::string& fen);

std::array<std::uint8_t, 12 * 64> board_planes(const Board& board);

// Inverse of board_planes, producing the FEN placement field.
std::string planes_to_fen_placement(std::span<const std::uint8_t> planes);

// Origin/destination mask of a 4-character UCI move. Promotion suffixes are
// not representable here and raise DataError, as do off-board squares and
// null moves like "a1a1".
std::array<std::uint8_t, 64> encode_move(const std::string& uci);

// Mechanical application of a UCI move: moves the piece, replaces captures,
// moves the rook on a castling king-step, removes the captured pawn on an
// en-passant-shaped pawn move, and promotes on a 5th-character suffix.
// Legality is not checked.
void apply_uci_move(Board& board, const std::string& uci);

struct LichessLoad {
  Dataset easy;  // rating <= split
  Dataset hard;  // rating > split
  std::int64_t rows = 0;
  std::int64_t skipped = 0;
  std::map<std::string, std::int64_t> skip_reasons;
};

// Reads a Lichess puzzle CSV (columns FEN, Moves, Rating). The first move of
// each puzzle is the opponent's setup move: it is applied to the FEN
// position, and the second move becomes the origin/destination target.
// Rows whose solution move is a promotion, or that fail to parse, are
// skipped and counted.
LichessLoad load_lichess_csv(const std::string& path, int rating_split = 1385);

}  // namespace iternet::data
