#pragma once

#include <functional>
#include <string>
#include <vector>

#include "iternet/config.hpp"
#include "iternet/dataset.hpp"
#include "iternet/net.hpp"

namespace iternet::training {

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  double train_accuracy = 0.0;  // exact-match over the epoch's training forwards
  double lr = 0.0;
  double seconds = 0.0;
};

struct RunLog {
  std::vector<EpochStats> epochs;
  double final_train_accuracy = 0.0;  // clean full-train pass after the last epoch
  bool retained = true;               // false when a perfect-train-accuracy gate failed
  bool diverged = false;

  std::string to_csv() const;  // epoch,loss,train_acc,lr,seconds
};

// tag is "epoch_<n>", "final" or "diverged"
using CheckpointHook = std::function<void(const std::string& tag, const nets::Net& net, const RunLog& log)>;

struct TrainResult {
  nets::Net net;
  RunLog log;
};

// Seeded-shuffle mini-batch training with the mean per-position
// cross-entropy of the final iteration as the loss. Per-sample gradients are
// summed (optionally across worker threads in fixed chunk order) and
// averaged over the batch before the optimizer step. A non-finite batch loss
// aborts with DivergenceError after invoking the hook.
TrainResult train(const ExperimentConfig& config, const data::Dataset& dataset,
                  const CheckpointHook& hook = {});

}  // namespace iternet::training
