#pragma once

#include "iternet/config.hpp"

namespace iternet::training {

// Learning rate for a given epoch: geometric warmup from lr/100 up to lr
// over warmup_epochs, then piecewise constant with a drop_factor multiplier
// applied at each milestone already reached. Continuous at the warmup
// boundary.
double lr_at(int epoch, const ExperimentConfig& config);

}  // namespace iternet::training
