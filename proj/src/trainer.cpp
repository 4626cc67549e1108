#include "iternet/trainer.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "iternet/errors.hpp"
#include "iternet/evalrun.hpp"
#include "iternet/ops.hpp"
#include "iternet/optim.hpp"
#include "iternet/rng.hpp"
#include "iternet/schedule.hpp"

namespace iternet::training {

std::string RunLog::to_csv() const {
  std::ostringstream os;
  os << "epoch,loss,train_acc,lr,seconds\n";
  os.precision(10);
  for (const EpochStats& e : epochs) {
    os << e.epoch << "," << e.loss << "," << e.train_accuracy << "," << e.lr << "," << e.seconds << "\n";
  }
  return os.str();
}

namespace {

struct SampleOutcome {
  double loss = 0.0;
  bool correct = false;
};

Tensor normalized_input(const data::Dataset& dataset, std::int64_t index, bool normalize) {
  Tensor x = dataset.input(index);
  if (normalize) {
    double* d = x.data();
    for (std::int64_t j = 0; j < x.size(); ++j) d[j] -= 0.5;
  }
  return x;
}

// forward + backward for one sample; gradients accumulate into net's params
SampleOutcome train_sample(const nets::Net& net, const data::Dataset& dataset, std::int64_t index,
                           const ExperimentConfig& config) {
  Tensor x = normalized_input(dataset, index, config.normalize_inputs);
  const auto target = dataset.target(index);
  Tape tape;
  SampleOutcome out;
  Tensor loss;
  if (config.loss_mode == "final") {
    Tensor logits = net.forward(x);
    loss = per_position_cross_entropy(logits, target);
    out.correct = eval::exact_match(logits, target, config.task);
  } else {
    nets::IterationTrace trace = net.forward_iterations(x, config.iterations);
    Tensor total;
    for (const Tensor& logits : trace.logits) {
      Tensor ce = per_position_cross_entropy(logits, target);
      total = total.defined() ? add(total, ce) : ce;
    }
    loss = mul(total, Tensor::scalar(1.0 / static_cast<double>(trace.logits.size())));
    out.correct = eval::exact_match(trace.logits.back(), target, config.task);
  }
  backward(loss);
  out.loss = loss.item();
  return out;
}

double exact_match_fraction(const nets::Net& net, const data::Dataset& dataset, const ExperimentConfig& config,
                            int workers) {
  const std::int64_t n = dataset.size();
  std::vector<std::int64_t> correct(static_cast<std::size_t>(std::max(1, workers)), 0);
  const auto run_chunk = [&](int w, std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i) {
      Tensor x = normalized_input(dataset, i, config.normalize_inputs);
      Tensor logits = net.forward(x);
      if (eval::exact_match(logits, dataset.target(i), config.task)) ++correct[static_cast<std::size_t>(w)];
    }
  };
  if (workers <= 1) {
    run_chunk(0, 0, n);
  } else {
    std::vector<std::thread> pool;
    const std::int64_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const std::int64_t lo = w * chunk;
      const std::int64_t hi = std::min<std::int64_t>(n, lo + chunk);
      if (lo < hi) pool.emplace_back(run_chunk, w, lo, hi);
    }
    for (std::thread& t : pool) t.join();
  }
  std::int64_t total = 0;
  for (std::int64_t c : correct) total += c;
  return n == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(n);
}

}  // namespace

TrainResult train(const ExperimentConfig& config, const data::Dataset& dataset, const CheckpointHook& hook) {
  config.validate();
  if (dataset.task != config.task) {
    throw DataError(std::string("dataset is for task ") + nets::to_string(dataset.task) + ", config expects " +
                    nets::to_string(config.task));
  }
  const std::int64_t n = dataset.size();
  if (n == 0) throw DataError("training dataset is empty");

  TrainResult result;
  result.net = nets::Net::build(config.net_spec(), config.seed);
  std::vector<Tensor> params = result.net.parameters();

  AdamState adam;
  MomentumState momentum;
  if (config.optimizer == "adam") adam = AdamState::init(params);
  else momentum = MomentumState::init(params);

  const int workers = std::max(1, std::min<int>(config.workers, static_cast<int>(n)));
  std::vector<nets::Net> worker_nets;
  std::vector<std::vector<Tensor>> worker_params;
  for (int w = 1; w < workers; ++w) {
    worker_nets.push_back(result.net.clone());
    worker_params.push_back(worker_nets.back().parameters());
  }

  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const double lr = lr_at(epoch, config);

    Rng shuffle_rng = Rng::child(config.seed, 0x50fffu ^ static_cast<std::uint64_t>(epoch));
    for (std::int64_t i = n - 1; i > 0; --i) {
      const std::int64_t j = static_cast<std::int64_t>(shuffle_rng.below(static_cast<std::uint64_t>(i + 1)));
      std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }

    double epoch_loss = 0.0;
    std::int64_t epoch_correct = 0;

    for (std::int64_t batch_start = 0; batch_start < n; batch_start += config.batch_size) {
      const std::int64_t batch_end = std::min<std::int64_t>(n, batch_start + config.batch_size);
      const std::int64_t batch_n = batch_end - batch_start;
      zero_gradients(params);

      double batch_loss = 0.0;
      std::int64_t batch_correct = 0;
      if (workers == 1) {
        for (std::int64_t i = batch_start; i < batch_end; ++i) {
          const SampleOutcome out = train_sample(result.net, dataset, order[static_cast<std::size_t>(i)], config);
          batch_loss += out.loss;
          batch_correct += out.correct ? 1 : 0;
        }
      } else {
        for (auto& wp : worker_params) zero_gradients(wp);
        for (std::size_t w = 0; w < worker_nets.size(); ++w) worker_nets[w].copy_values_from(result.net);
        std::vector<double> losses(static_cast<std::size_t>(workers), 0.0);
        std::vector<std::int64_t> corrects(static_cast<std::size_t>(workers), 0);
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
        const std::int64_t chunk = (batch_n + workers - 1) / workers;
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
          const std::int64_t lo = batch_start + w * chunk;
          const std::int64_t hi = std::min(batch_end, lo + chunk);
          if (lo >= hi) continue;
          const nets::Net& wnet = w == 0 ? result.net : worker_nets[static_cast<std::size_t>(w - 1)];
          pool.emplace_back([&, w, lo, hi, &wnet = wnet]() {
            try {
              for (std::int64_t i = lo; i < hi; ++i) {
                const SampleOutcome out = train_sample(wnet, dataset, order[static_cast<std::size_t>(i)], config);
                losses[static_cast<std::size_t>(w)] += out.loss;
                corrects[static_cast<std::size_t>(w)] += out.correct ? 1 : 0;
              }
            } catch (...) {
              errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
          });
        }
        for (std::thread& t : pool) t.join();
        for (const std::exception_ptr& e : errors) {
          if (e) std::rethrow_exception(e);
        }
        // fixed reduction order keeps runs with equal worker counts identical
        for (std::size_t w = 0; w < worker_params.size(); ++w) {
          for (std::size_t pi = 0; pi < params.size(); ++pi) {
            const std::vector<double>& src = worker_params[w][pi].grad_vector();
            if (src.empty()) continue;
            double* dst = params[pi].grad();
            for (std::size_t i = 0; i < src.size(); ++i) dst[i] += src[i];
          }
        }
        for (int w = 0; w < workers; ++w) {
          batch_loss += losses[static_cast<std::size_t>(w)];
          batch_correct += corrects[static_cast<std::size_t>(w)];
        }
      }

      if (!std::isfinite(batch_loss)) {
        result.log.diverged = true;
        if (hook) hook("diverged", result.net, result.log);
        throw DivergenceError("non-finite loss in epoch " + std::to_string(epoch));
      }

      const double inv = 1.0 / static_cast<double>(batch_n);
      for (Tensor& p : params) {
        double* g = p.grad();
        for (std::int64_t i = 0; i < p.size(); ++i) g[i] *= inv;
      }
      if (config.clip_norm > 0.0) {
        if (config.clip_mode == "global") clip_gradients(params, config.clip_norm);
        else clip_gradients_elementwise(params, config.clip_norm);
      }
      if (config.optimizer == "adam") {
        adam_step(params, adam, lr, config.weight_decay, config.adam_beta1, config.adam_beta2, config.adam_eps);
      } else {
        sgd_momentum_step(params, momentum, lr, config.momentum, config.weight_decay);
      }

      epoch_loss += batch_loss;
      epoch_correct += batch_correct;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.loss = epoch_loss / static_cast<double>(n);
    stats.train_accuracy = static_cast<double>(epoch_correct) / static_cast<double>(n);
    stats.lr = lr;
    stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.log.epochs.push_back(stats);

    if (hook && config.checkpoint_every > 0 && (epoch + 1) % config.checkpoint_every == 0 &&
        epoch + 1 < config.epochs) {
      hook("epoch_" + std::to_string(epoch), result.net, result.log);
    }
  }

  result.log.final_train_accuracy = exact_match_fraction(result.net, dataset, config, workers);
  result.log.retained = !config.require_perfect_train_acc || result.log.final_train_accuracy >= 1.0;
  if (hook) hook("final", result.net, result.log);
  return result;
}

}  // namespace iternet::training
