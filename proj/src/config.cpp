#include "iternet/config.hpp"

#include <algorithm>
#include <charconv>
#include <cctype>
#include <sstream>

#include "iternet/binio.hpp"
#include "iternet/errors.hpp"

namespace iternet::training {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::istringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(std::stoi(item));
  }
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::ostringstream os;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ",";
    os << v[i];
  }
  return os.str();
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("expected a boolean, got '" + s + "'");
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);  // shortest round-trip form
  return std::string(buf, res.ptr);
}

}  // namespace

ExperimentConfig ExperimentConfig::profile(const std::string& name) {
  ExperimentConfig c;
  if (name == "paper-prefix") {
    c.task = nets::Task::prefix;
    c.width = 120;
    c.iterations = 10;
    c.optimizer = "adam";
    c.lr = 1e-3;
    c.clip_norm = 1.0;
    c.warmup_epochs = 10;
    c.milestones = {100, 200, 300};
    c.drop_factor = 0.5;
    c.epochs = 500;
    c.batch_size = 150;
    c.normalize_inputs = true;
    c.require_perfect_train_acc = true;
  } else if (name == "paper-maze") {
    c.task = nets::Task::maze;
    c.width = 128;
    c.iterations = 20;
    c.optimizer = "sgd_momentum";
    c.lr = 1e-3;
    c.warmup_epochs = 5;
    c.milestones = {175};
    c.drop_factor = 0.1;
    c.epochs = 200;
    c.batch_size = 50;
  } else if (name == "paper-chess") {
    c.task = nets::Task::chess;
    c.width = 512;
    c.iterations = 20;
    c.optimizer = "sgd_momentum";
    c.lr = 0.1;
    c.warmup_epochs = 3;
    c.milestones = {100, 110};
    c.drop_factor = 0.1;
    c.epochs = 140;
    c.batch_size = 300;
  } else if (name == "prefix-small") {
    c.task = nets::Task::prefix;
    c.width = 32;
    c.iterations = 6;
    c.optimizer = "adam";
    c.lr = 1e-3;
    c.clip_norm = 1.0;
    c.warmup_epochs = 10;
    c.milestones = {60, 90};
    c.drop_factor = 0.5;
    c.epochs = 120;
    c.batch_size = 150;
    c.normalize_inputs = true;
  } else if (name == "maze-small") {
    c.task = nets::Task::maze;
    c.width = 32;
    c.iterations = 6;
    c.optimizer = "sgd_momentum";
    c.lr = 1e-2;
    c.warmup_epochs = 5;
    c.milestones = {45};
    c.drop_factor = 0.1;
    c.epochs = 60;
    c.batch_size = 50;
  } else if (name == "chess-smoke") {
    c.task = nets::Task::chess;
    c.width = 64;
    c.iterations = 4;
    c.optimizer = "sgd_momentum";
    c.lr = 0.1;
    c.warmup_epochs = 3;
    c.milestones = {100, 110};
    c.drop_factor = 0.1;
    c.epochs = 2;
    c.batch_size = 300;
  } else {
    throw ConfigError("unknown profile '" + name + "'");
  }
  return c;
}

std::vector<std::string> ExperimentConfig::profile_names() {
  return {"paper-prefix", "paper-maze", "paper-chess", "prefix-small", "maze-small", "chess-smoke"};
}

void ExperimentConfig::apply_override(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "config.version") config_version = std::stoi(v);
  else if (key == "task") task = nets::task_from_string(v);
  else if (key == "net.variant") variant = nets::variant_from_string(v);
  else if (key == "net.width") width = std::stoi(v);
  else if (key == "net.iterations") iterations = std::stoi(v);
  else if (key == "net.dilation") dilation = std::stoi(v);
  else if (key == "net.head") head_channels = parse_int_list(v);
  else if (key == "net.init_gain") init_gain = std::stod(v);
  else if (key == "optim.name") optimizer = v;
  else if (key == "optim.lr") lr = std::stod(v);
  else if (key == "optim.weight_decay") weight_decay = std::stod(v);
  else if (key == "optim.momentum") momentum = std::stod(v);
  else if (key == "optim.adam_beta1") adam_beta1 = std::stod(v);
  else if (key == "optim.adam_beta2") adam_beta2 = std::stod(v);
  else if (key == "optim.adam_eps") adam_eps = std::stod(v);
  else if (key == "optim.clip_norm") clip_norm = std::stod(v);
  else if (key == "optim.clip_mode") clip_mode = v;
  else if (key == "schedule.warmup_epochs") warmup_epochs = std::stoi(v);
  else if (key == "schedule.milestones") milestones = parse_int_list(v);
  else if (key == "schedule.drop_factor") drop_factor = std::stod(v);
  else if (key == "train.epochs") epochs = std::stoi(v);
  else if (key == "train.batch_size") batch_size = std::stoi(v);
  else if (key == "train.seed") seed = std::stoull(v);
  else if (key == "train.normalize_inputs") normalize_inputs = parse_bool(v);
  else if (key == "train.require_perfect_train_acc") require_perfect_train_acc = parse_bool(v);
  else if (key == "train.loss_mode") loss_mode = v;
  else if (key == "train.workers") workers = std::stoi(v);
  else if (key == "train.checkpoint_every") checkpoint_every = std::stoi(v);
  else if (key == "data.train") train_data = v;
  else if (key == "data.eval") eval_data = v;
  else throw ConfigError("unknown config key '" + key + "'");
}

ExperimentConfig ExperimentConfig::from_text(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      c.apply_override(trim(stripped.substr(0, eq)), trim(stripped.substr(eq + 1)));
    } catch (const std::invalid_argument&) {
      throw ConfigError("config line " + std::to_string(line_no) + ": bad value");
    }
  }
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  return from_text(binio::read_file(path));
}

std::string ExperimentConfig::to_text() const {
  std::ostringstream os;
  os << "config.version = " << config_version << "\n";
  os << "task = " << nets::to_string(task) << "\n";
  os << "net.variant = " << nets::to_string(variant) << "\n";
  os << "net.width = " << width << "\n";
  os << "net.iterations = " << iterations << "\n";
  os << "net.dilation = " << dilation << "\n";
  os << "net.head = " << join_ints(head_channels.empty() ? net_spec().head_channels : head_channels) << "\n";
  os << "net.init_gain = " << format_double(init_gain) << "\n";
  os << "optim.name = " << optimizer << "\n";
  os << "optim.lr = " << format_double(lr) << "\n";
  os << "optim.weight_decay = " << format_double(weight_decay) << "\n";
  os << "optim.momentum = " << format_double(momentum) << "\n";
  os << "optim.adam_beta1 = " << format_double(adam_beta1) << "\n";
  os << "optim.adam_beta2 = " << format_double(adam_beta2) << "\n";
  os << "optim.adam_eps = " << format_double(adam_eps) << "\n";
  os << "optim.clip_norm = " << format_double(clip_norm) << "\n";
  os << "optim.clip_mode = " << clip_mode << "\n";
  os << "schedule.warmup_epochs = " << warmup_epochs << "\n";
  os << "schedule.milestones = " << join_ints(milestones) << "\n";
  os << "schedule.drop_factor = " << format_double(drop_factor) << "\n";
  os << "train.epochs = " << epochs << "\n";
  os << "train.batch_size = " << batch_size << "\n";
  os << "train.seed = " << seed << "\n";
  os << "train.normalize_inputs = " << (normalize_inputs ? "true" : "false") << "\n";
  os << "train.require_perfect_train_acc = " << (require_perfect_train_acc ? "true" : "false") << "\n";
  os << "train.loss_mode = " << loss_mode << "\n";
  os << "train.workers = " << workers << "\n";
  os << "train.checkpoint_every = " << checkpoint_every << "\n";
  os << "data.train = " << train_data << "\n";
  os << "data.eval = " << eval_data << "\n";
  return os.str();
}

std::uint64_t ExperimentConfig::hash() const { return binio::fnv1a(to_text()); }

nets::NetSpec ExperimentConfig::net_spec() const {
  nets::NetSpec spec = nets::NetSpec::defaults(task, variant, width, iterations, dilation);
  if (!head_channels.empty()) spec.head_channels = head_channels;
  spec.init_gain = init_gain;
  return spec;
}

void ExperimentConfig::validate() const {
  net_spec().validate();
  if (optimizer != "adam" && optimizer != "sgd_momentum") {
    throw ConfigError("optimizer must be adam or sgd_momentum, got '" + optimizer + "'");
  }
  if (clip_mode != "global" && clip_mode != "element") {
    throw ConfigError("clip mode must be global or element, got '" + clip_mode + "'");
  }
  if (loss_mode != "final" && loss_mode != "mean_iterations") {
    throw ConfigError("loss mode must be final or mean_iterations, got '" + loss_mode + "'");
  }
  if (lr < 0.0 || weight_decay < 0.0 || clip_norm < 0.0) throw ConfigError("negative optimizer constants");
  if (epochs < 1 || batch_size < 1) throw ConfigError("epochs and batch size must be positive");
  if (warmup_epochs < 0 || drop_factor <= 0.0) throw ConfigError("bad schedule constants");
  if (!std::is_sorted(milestones.begin(), milestones.end())) throw ConfigError("milestones must be sorted");
  if (workers < 1) throw ConfigError("workers must be at least 1");
}

std::string ExperimentConfig::model_id() const {
  const nets::NetSpec spec = net_spec();
  return std::string(nets::to_string(task)) + "-" + nets::to_string(variant) + "-d" +
         std::to_string(spec.effective_depth()) + "-w" + std::to_string(spec.width);
}

}  // namespace iternet::training
