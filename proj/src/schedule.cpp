#include "iternet/schedule.hpp"

#include <cmath>

#include "iternet/errors.hpp"

namespace iternet::training {

double lr_at(int epoch, const ExperimentConfig& config) {
  if (epoch < 0) throw ConfigError("lr_at: epoch must be non-negative");
  const int warmup = config.warmup_epochs;
  if (warmup > 0 && epoch < warmup) {
    const double progress = static_cast<double>(warmup - epoch) / static_cast<double>(warmup);
    return config.lr * std::pow(0.01, progress);
  }
  double lr = config.lr;
  for (int milestone : config.milestones) {
    if (epoch >= milestone) lr *= config.drop_factor;
  }
  return lr;
}

}  // namespace iternet::training
