#include "iternet/evalrun.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>

#include "iternet/errors.hpp"

namespace iternet::eval {

namespace {

// class-1 softmax probability, saturating instead of overflowing
double prob_one(double z0, double z1) {
  const double d = z0 - z1;
  if (d > 700.0) return 0.0;
  if (d < -700.0) return 1.0;
  return 1.0 / (1.0 + std::exp(d));
}

// indices of the two largest class-1 probabilities, first-seen on ties
std::pair<int, int> top2_squares(const Tensor& logits, std::vector<double>* probs_out = nullptr) {
  const std::int64_t positions = logits.size() / 2;
  const double* z = logits.data();
  int best = -1, second = -1;
  double best_v = -1.0, second_v = -1.0;
  for (std::int64_t p = 0; p < positions; ++p) {
    const double v = prob_one(z[p], z[positions + p]);
    if (probs_out) (*probs_out)[static_cast<std::size_t>(p)] = v;
    if (v > best_v) {
      second = best;
      second_v = best_v;
      best = static_cast<int>(p);
      best_v = v;
    } else if (v > second_v) {
      second = static_cast<int>(p);
      second_v = v;
    }
  }
  return {best, second};
}

}  // namespace

double confidence(const Tensor& logits, nets::Task task) {
  if (logits.shape().empty() || logits.shape()[0] != 2) {
    throw ConfigError("confidence: logits must have a leading 2-class axis");
  }
  const std::int64_t positions = logits.size() / 2;
  const double* z = logits.data();
  if (task == nets::Task::chess) {
    std::vector<double> probs(static_cast<std::size_t>(positions));
    top2_squares(logits, &probs);
    std::vector<double> sorted = probs;
    std::nth_element(sorted.begin(), sorted.begin() + 1, sorted.end(), std::greater<double>());
    return 0.5 * (sorted[0] + sorted[1]);
  }
  double total = 0.0;
  for (std::int64_t p = 0; p < positions; ++p) {
    const double p1 = prob_one(z[p], z[positions + p]);
    total += std::max(p1, 1.0 - p1);
  }
  return total / static_cast<double>(positions);
}

std::pair<int, Tensor> select_best_iteration(nets::IterationTrace& trace, nets::Task task) {
  if (trace.logits.empty()) throw ConfigError("select_best_iteration: empty trace");
  trace.confidence.resize(trace.logits.size());
  int best = 0;
  for (std::size_t i = 0; i < trace.logits.size(); ++i) {
    trace.confidence[i] = confidence(trace.logits[i], task);
    if (trace.confidence[i] > trace.confidence[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return {best + 1, trace.logits[static_cast<std::size_t>(best)]};
}

bool exact_match(const Tensor& logits, std::span<const std::uint8_t> target, nets::Task task) {
  const std::int64_t positions = logits.size() / 2;
  if (static_cast<std::int64_t>(target.size()) != positions) {
    throw ConfigError("exact_match: logits cover " + std::to_string(positions) + " positions but target has " +
                      std::to_string(target.size()));
  }
  const double* z = logits.data();
  if (task == nets::Task::chess) {
    const auto [a, b] = top2_squares(logits);
    int t0 = -1, t1 = -1;
    for (std::int64_t p = 0; p < positions; ++p) {
      if (target[static_cast<std::size_t>(p)] != 0) {
        if (t0 < 0) t0 = static_cast<int>(p);
        else t1 = static_cast<int>(p);
      }
    }
    return (a == t0 && b == t1) || (a == t1 && b == t0);
  }
  for (std::int64_t p = 0; p < positions; ++p) {
    const std::uint8_t pred = z[positions + p] > z[p] ? 1 : 0;
    if (pred != target[static_cast<std::size_t>(p)]) return false;
  }
  return true;
}

std::string sweep_csv_header() {
  return "model_id,seed,test_set,m,n_samples,accuracy,stderr,best_confidence_accuracy,wall_seconds";
}

std::string to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << sweep_csv_header() << "\n";
  os.precision(10);
  for (const SweepRow& r : rows) {
    os << r.model_id << "," << r.seed << "," << r.test_set << "," << r.m << "," << r.n_samples << ","
       << r.accuracy << "," << r.stderr_over_seeds << "," << r.best_confidence_accuracy << ","
       << r.wall_seconds << "\n";
  }
  return os.str();
}

std::vector<SweepRow> parse_sweep_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty sweep csv");
  if (line != sweep_csv_header()) throw DataError("sweep csv header mismatch: " + line);
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    SweepRow r;
    try {
      std::getline(ls, r.model_id, ',');
      std::getline(ls, field, ',');
      r.seed = std::stoull(field);
      std::getline(ls, r.test_set, ',');
      std::getline(ls, field, ',');
      r.m = std::stoi(field);
      std::getline(ls, field, ',');
      r.n_samples = std::stoll(field);
      std::getline(ls, field, ',');
      r.accuracy = std::stod(field);
      std::getline(ls, field, ',');
      r.stderr_over_seeds = std::stod(field);
      std::getline(ls, field, ',');
      r.best_confidence_accuracy = std::stod(field);
      std::getline(ls, field, ',');
      r.wall_seconds = std::stod(field);
    } catch (const std::exception&) {
      throw DataError("bad sweep csv row: " + line);
    }
    rows.push_back(r);
  }
  return rows;
}

std::vector<SweepRow> sweep(const nets::Net& net, const data::Dataset& test, const SweepOptions& options) {
  if (test.task != net.spec().task) throw DataError("sweep: dataset task does not match model task");
  const auto t0 = std::chrono::steady_clock::now();
  const nets::Task task = net.spec().task;
  const std::int64_t n = test.size();
  if (n == 0) throw DataError("sweep: empty test set");

  std::vector<int> m_values = options.m_values;
  if (net.spec().variant == nets::Variant::feedforward) {
    m_values = {net.block_count()};
  } else {
    if (m_values.empty()) m_values = {net.spec().train_iterations};
    for (int m : m_values) {
      if (m < 1) throw ConfigError("sweep: iteration budgets must be at least 1");
    }
    std::sort(m_values.begin(), m_values.end());
    m_values.erase(std::unique(m_values.begin(), m_values.end()), m_values.end());
  }
  const int m_max = m_values.back();

  // per sample and iteration: was iteration i's output an exact match, and
  // how confident was it
  std::vector<std::uint8_t> hit(static_cast<std::size_t>(n) * m_max);
  std::vector<double> conf(static_cast<std::size_t>(n) * m_max);

  const int workers = std::max(1, std::min<int>(options.workers, static_cast<int>(n)));
  const auto run_chunk = [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t i = lo; i < hi; ++i) {
      Tensor x = test.input(i);
      if (options.normalize_inputs) {
        double* d = x.data();
        for (std::int64_t j = 0; j < x.size(); ++j) d[j] -= 0.5;
      }
      nets::IterationTrace trace = net.forward_iterations(x, m_max);
      const auto target = test.target(i);
      for (int it = 0; it < m_max; ++it) {
        const Tensor& logits = trace.logits[static_cast<std::size_t>(it)];
        hit[static_cast<std::size_t>(i * m_max + it)] = exact_match(logits, target, task) ? 1 : 0;
        conf[static_cast<std::size_t>(i * m_max + it)] = confidence(logits, task);
      }
    }
  };
  if (workers == 1) {
    run_chunk(0, n);
  } else {
    std::vector<std::thread> pool;
    const std::int64_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const std::int64_t lo = w * chunk;
      const std::int64_t hi = std::min<std::int64_t>(n, lo + chunk);
      if (lo < hi) pool.emplace_back(run_chunk, lo, hi);
    }
    for (std::thread& t : pool) t.join();
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::vector<SweepRow> rows;
  for (int m : m_values) {
    SweepRow row;
    row.model_id = options.model_id;
    row.seed = options.seed;
    row.test_set = options.test_set;
    row.m = m;
    row.n_samples = n;
    std::int64_t fixed = 0, selected = 0;
    for (std::int64_t i = 0; i < n; ++i) {
      fixed += hit[static_cast<std::size_t>(i * m_max + (m - 1))];
      int best = 0;
      for (int it = 1; it < m; ++it) {
        if (conf[static_cast<std::size_t>(i * m_max + it)] > conf[static_cast<std::size_t>(i * m_max + best)]) {
          best = it;
        }
      }
      selected += hit[static_cast<std::size_t>(i * m_max + best)];
    }
    row.accuracy = static_cast<double>(fixed) / static_cast<double>(n);
    row.best_confidence_accuracy = static_cast<double>(selected) / static_cast<double>(n);
    row.wall_seconds = wall;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace iternet::eval
