#include "iternet/chess.hpp"

#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "iternet/errors.hpp"

namespace iternet::data {

namespace {

int piece_channel(char piece) {
  const char* p = std::strchr(kPieceOrder, piece);
  return p == nullptr ? -1 : static_cast<int>(p - kPieceOrder);
}

// "e2" -> square index with rank 8 at row 0; -1 when off-board
int square_index(char file, char rank) {
  if (file < 'a' || file > 'h' || rank < '1' || rank > '8') return -1;
  const int row = 7 - (rank - '1');
  const int col = file - 'a';
  return row * 8 + col;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(s);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

Board parse_fen(const std::string& fen) {
  const std::vector<std::string> fields = split(fen, ' ');
  if (fields.empty() || fields[0].empty()) throw DataError("FEN: empty placement field");

  Board board;
  const std::vector<std::string> ranks = split(fields[0], '/');
  if (ranks.size() != 8) {
    throw DataError("FEN: expected 8 ranks, got " + std::to_string(ranks.size()));
  }
  for (int row = 0; row < 8; ++row) {
    int col = 0;
    for (char ch : ranks[static_cast<std::size_t>(row)]) {
      if (ch >= '1' && ch <= '8') {
        col += ch - '0';
      } else if (piece_channel(ch) >= 0) {
        if (col >= 8) break;
        board.squares[static_cast<std::size_t>(row * 8 + col)] = ch;
        ++col;
      } else {
        throw DataError(std::string("FEN: unknown piece letter '") + ch + "' in rank " + std::to_string(8 - row));
      }
    }
    if (col != 8) {
      throw DataError("FEN: rank " + std::to_string(8 - row) + " covers " + std::to_string(col) +
                      " files instead of 8");
    }
  }
  if (fields.size() > 1) {
    if (fields[1] == "w") board.white_to_move = true;
    else if (fields[1] == "b") board.white_to_move = false;
    else throw DataError("FEN: side to move must be 'w' or 'b', got '" + fields[1] + "'");
  }
  return board;
}

std::array<std::uint8_t, 12 * 64> board_planes(const Board& board) {
  std::array<std::uint8_t, 12 * 64> planes{};
  for (int sq = 0; sq < 64; ++sq) {
    const char piece = board.squares[static_cast<std::size_t>(sq)];
    if (piece == 0) continue;
    const int channel = piece_channel(piece);
    planes[static_cast<std::size_t>(channel * 64 + sq)] = 1;
  }
  return planes;
}

std::string planes_to_fen_placement(std::span<const std::uint8_t> planes) {
  if (planes.size() != 12 * 64) throw DataError("planes_to_fen_placement: need 12x8x8 values");
  std::string out;
  for (int row = 0; row < 8; ++row) {
    int empty_run = 0;
    for (int col = 0; col < 8; ++col) {
      char piece = 0;
      for (int ch = 0; ch < 12; ++ch) {
        if (planes[static_cast<std::size_t>(ch * 64 + row * 8 + col)] != 0) {
          if (piece != 0) throw DataError("planes_to_fen_placement: two pieces on one square");
          piece = kPieceOrder[ch];
        }
      }
      if (piece == 0) {
        ++empty_run;
      } else {
        if (empty_run > 0) out.push_back(static_cast<char>('0' + empty_run));
        empty_run = 0;
        out.push_back(piece);
      }
    }
    if (empty_run > 0) out.push_back(static_cast<char>('0' + empty_run));
    if (row < 7) out.push_back('/');
  }
  return out;
}

std::array<std::uint8_t, 64> encode_move(const std::string& uci) {
  if (uci.size() != 4) {
    throw DataError("move '" + uci + "' is not a 4-character square pair" +
                    (uci.size() == 5 ? " (promotions are not representable)" : ""));
  }
  const int from = square_index(uci[0], uci[1]);
  const int to = square_index(uci[2], uci[3]);
  if (from < 0 || to < 0) throw DataError("move '" + uci + "' names an off-board square");
  if (from == to) throw DataError("move '" + uci + "' has equal origin and destination");
  std::array<std::uint8_t, 64> mask{};
  mask[static_cast<std::size_t>(from)] = 1;
  mask[static_cast<std::size_t>(to)] = 1;
  return mask;
}

void apply_uci_move(Board& board, const std::string& uci) {
  if (uci.size() != 4 && uci.size() != 5) throw DataError("move '" + uci + "' is not UCI formatted");
  const int from = square_index(uci[0], uci[1]);
  const int to = square_index(uci[2], uci[3]);
  if (from < 0 || to < 0) throw DataError("move '" + uci + "' names an off-board square");
  char piece = board.squares[static_cast<std::size_t>(from)];
  if (piece == 0) throw DataError("move '" + uci + "' starts on an empty square");

  const bool is_king = piece == 'K' || piece == 'k';
  const bool is_pawn = piece == 'P' || piece == 'p';
  const int from_col = from % 8;
  const int to_col = to % 8;

  if (is_king && (from_col == 4) && (to_col == 6 || to_col == 2)) {
    // castling: bring the rook across
    const int row = from / 8;
    const int rook_from = row * 8 + (to_col == 6 ? 7 : 0);
    const int rook_to = row * 8 + (to_col == 6 ? 5 : 3);
    board.squares[static_cast<std::size_t>(rook_to)] = board.squares[static_cast<std::size_t>(rook_from)];
    board.squares[static_cast<std::size_t>(rook_from)] = 0;
  } else if (is_pawn && from_col != to_col && board.squares[static_cast<std::size_t>(to)] == 0) {
    // en passant: captured pawn sits beside the origin square
    board.squares[static_cast<std::size_t>((from / 8) * 8 + to_col)] = 0;
  }

  if (uci.size() == 5) {
    const char promo = static_cast<char>(std::tolower(uci[4]));
    if (std::strchr("qrbn", promo) == nullptr) throw DataError("move '" + uci + "' has a bad promotion piece");
    piece = std::isupper(piece) ? static_cast<char>(std::toupper(promo)) : promo;
  }
  board.squares[static_cast<std::size_t>(to)] = piece;
  board.squares[static_cast<std::size_t>(from)] = 0;
  board.white_to_move = !board.white_to_move;
}

LichessLoad load_lichess_csv(const std::string& path, int rating_split) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);

  std::string header;
  if (!std::getline(in, header)) throw DataError(path + ": empty file");
  const std::vector<std::string> columns = split(header, ',');
  int fen_col = -1, moves_col = -1, rating_col = -1;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == "FEN") fen_col = static_cast<int>(i);
    else if (columns[i] == "Moves") moves_col = static_cast<int>(i);
    else if (columns[i] == "Rating") rating_col = static_cast<int>(i);
  }
  if (fen_col < 0 || moves_col < 0 || rating_col < 0) {
    throw DataError(path + ": header must contain FEN, Moves and Rating columns");
  }

  LichessLoad result;
  for (data::Dataset* ds : {&result.easy, &result.hard}) {
    ds->task = nets::Task::chess;
    ds->input_shape = {12, 8, 8};
    ds->target_shape = {8, 8};
  }

  const auto skip = [&result](const std::string& reason) {
    ++result.skipped;
    ++result.skip_reasons[reason];
  };

  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++result.rows;
    const std::vector<std::string> fields = split(line, ',');
    if (static_cast<int>(fields.size()) <= std::max({fen_col, moves_col, rating_col})) {
      skip("short row");
      continue;
    }
    int rating = 0;
    try {
      rating = std::stoi(fields[static_cast<std::size_t>(rating_col)]);
    } catch (const std::exception&) {
      skip("bad rating");
      continue;
    }
    const std::vector<std::string> moves = split(fields[static_cast<std::size_t>(moves_col)], ' ');
    if (moves.size() < 2) {
      skip("missing solution move");
      continue;
    }
    if (moves[1].size() == 5) {
      skip("promotion");
      continue;
    }
    try {
      Board board = parse_fen(fields[static_cast<std::size_t>(fen_col)]);
      apply_uci_move(board, moves[0]);  // opponent setup move
      const std::array<std::uint8_t, 64> target = encode_move(moves[1]);
      const int origin = [&moves] {
        const int row = 7 - (moves[1][1] - '1');
        return row * 8 + (moves[1][0] - 'a');
      }();
      if (board.squares[static_cast<std::size_t>(origin)] == 0) {
        skip("solution starts on empty square");
        continue;
      }
      const std::array<std::uint8_t, 12 * 64> planes = board_planes(board);
      Tensor input({12, 8, 8});
      for (int i = 0; i < 12 * 64; ++i) input[i] = static_cast<double>(planes[static_cast<std::size_t>(i)]);
      Dataset& bucket = rating <= rating_split ? result.easy : result.hard;
      bucket.append(input, std::span<const std::uint8_t>(target.data(), target.size()));
    } catch (const DataError&) {
      skip("parse failure");
      continue;
    }
  }

  const nlohmann::json common = {{"task", "chess"}, {"source", path}, {"rating_split", rating_split},
                                 {"rows", result.rows}, {"skipped", result.skipped}};
  result.easy.params = common;
  result.easy.params["split"] = "easy";
  result.hard.params = common;
  result.hard.params["split"] = "hard";
  return result;
}

}  // namespace iternet::data
