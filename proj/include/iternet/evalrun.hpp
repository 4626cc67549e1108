#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "iternet/dataset.hpp"
#include "iternet/net.hpp"

namespace iternet::eval {

// Mean per-position classification confidence of a [2 x P...] logit tensor.
// For prefix and maze outputs this is the mean over positions of the larger
// softmax probability; for chess it is the mean of the two largest class-1
// probabilities, matching the top-2 decision rule.
double confidence(const Tensor& logits, nets::Task task);

// Fills trace.confidence and returns the 1-based index of the most confident
// iteration (earliest on ties) together with its logits.
std::pair<int, Tensor> select_best_iteration(nets::IterationTrace& trace, nets::Task task);

// Prefix/maze: per-position 2-class argmax must equal the target everywhere.
// Chess: the two highest class-1 squares must equal the target pair as a set.
bool exact_match(const Tensor& logits, std::span<const std::uint8_t> target, nets::Task task);

struct SweepRow {
  std::string model_id;
  std::uint64_t seed = 0;
  std::string test_set;
  int m = 0;
  std::int64_t n_samples = 0;
  double accuracy = 0.0;
  double stderr_over_seeds = 0.0;  // 0 in single-seed rows; report aggregates across seeds
  double best_confidence_accuracy = 0.0;
  double wall_seconds = 0.0;
};

std::string sweep_csv_header();
std::string to_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> parse_sweep_csv(const std::string& text);

struct SweepOptions {
  std::vector<int> m_values;       // ignored for feedforward nets (fixed depth)
  bool normalize_inputs = false;   // must match how the model was trained
  std::string model_id = "model";
  std::uint64_t seed = 0;
  std::string test_set = "test";
  int workers = 1;
};

// Evaluates one model over the requested iteration budgets. Each sample is
// traced once at max(m); the per-m row reports exact-match accuracy of
// iteration m's output plus the accuracy of confidence-selected outputs
// among iterations 1..m.
std::vector<SweepRow> sweep(const nets::Net& net, const data::Dataset& test, const SweepOptions& options);

}  // namespace iternet::eval
