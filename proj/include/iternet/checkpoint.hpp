#pragma once

#include <string>

#include "iternet/config.hpp"
#include "iternet/net.hpp"
#include "iternet/trainer.hpp"

namespace iternet::training {

struct Checkpoint {
  nets::Net net;
  ExperimentConfig config;
  std::string run_log_csv;
};

// Binary container: magic, version, config hash, canonical config text, run
// log, parameter blobs (float64), and a trailing checksum over everything
// before it. Round-trips parameters bit-exactly.
void save_checkpoint(const nets::Net& net, const ExperimentConfig& config, const RunLog& log,
                     const std::string& path);

// Verifies the checksum and the stored config hash, rebuilds the net from
// the stored config and restores its parameters. When `expected` is given,
// a checkpoint trained under any other config is refused.
Checkpoint load_checkpoint(const std::string& path, const ExperimentConfig* expected = nullptr);

}  // namespace iternet::training
