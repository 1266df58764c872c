#include "ngs/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace ngs {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct Line {
  int number;
  std::string key;
  std::string value;
  bool section = false;
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> out;
  int number = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view raw = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++number;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    raw = trim(raw);
    if (raw.empty()) continue;
    if (raw.front() == '[') {
      if (raw.back() != ']') throw std::invalid_argument("line " + std::to_string(number) + ": unterminated section");
      out.push_back({number, std::string(trim(raw.substr(1, raw.size() - 2))), {}, true});
      continue;
    }
    const auto eq = raw.find('=');
    if (eq == std::string_view::npos) throw std::invalid_argument("line " + std::to_string(number) + ": expected key = value");
    out.push_back({number, std::string(trim(raw.substr(0, eq))), std::string(trim(raw.substr(eq + 1))), false});
  }
  return out;
}

[[noreturn]] void bad(const Line& l, const std::string& what) {
  throw std::invalid_argument("line " + std::to_string(l.number) + " (" + l.key + "): " + what);
}

template <class T>
T number(const Line& l) {
  T v{};
  const char* end = l.value.data() + l.value.size();
  auto [ptr, ec] = std::from_chars(l.value.data(), end, v);
  if (ec != std::errc() || ptr != end) bad(l, "not a number: '" + l.value + "'");
  return v;
}

bool boolean(const Line& l) {
  if (l.value == "true" || l.value == "1") return true;
  if (l.value == "false" || l.value == "0") return false;
  bad(l, "expected true or false");
}

template <class Fn>
auto wrapped(const Line& l, Fn&& fn) {
  try {
    return fn();
  } catch (const std::invalid_argument& e) {
    bad(l, e.what());
  }
}

// Returns false for an unknown key.
bool apply_train_key(TrainConfig& c, const Line& l) {
  const std::string& k = l.key;
  if (k == "method") c.method = wrapped(l, [&] { return parse_method(l.value); });
  else if (k == "batch_size") c.batch_size = number<int>(l);
  else if (k == "iterations") c.iterations = number<int>(l);
  else if (k == "learning_rate") c.learning_rate = number<double>(l);
  else if (k == "steps") c.mbs.steps = number<int>(l);
  else if (k == "lambda") c.mbs.lambda = number<double>(l);
  else if (k == "beta") c.mbs.beta = number<double>(l);
  else if (k == "baseline_decay") c.baseline_decay = number<double>(l);
  else if (k == "data_fraction") c.data_fraction = number<double>(l);
  else if (k == "pretrain_size") c.pretrain_size = number<int>(l);
  else if (k == "pretrain_steps") c.pretrain_steps = number<int>(l);
  else if (k == "mapo_clip") c.mapo_clip = number<double>(l);
  else if (k == "arch") c.model.arch = wrapped(l, [&] { return parse_architecture(l.value); });
  else if (k == "input_dim") c.model.input_dim = number<int>(l);
  else if (k == "hidden") c.model.hidden = number<int>(l);
  else if (k == "init_scale") c.init_scale = number<double>(l);
  else if (k == "seed") c.seed = number<std::uint64_t>(l);
  else if (k == "eval_every") c.eval_every = number<int>(l);
  else if (k == "checkpoint_every") c.checkpoint_every = number<int>(l);
  else if (k == "record_time") c.record_time = boolean(l);
  else if (k == "execution") {
    if (l.value == "serial") c.execution = Execution::Serial;
    else if (l.value == "parallel") c.execution = Execution::Parallel;
    else bad(l, "expected serial or parallel");
  } else return false;
  return true;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::vector<LengthCount> parse_mix(const Line& l) {
  std::vector<LengthCount> mix;
  std::stringstream ss(l.value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string_view t = trim(item);
    if (t.empty()) continue;
    int parts[3];
    std::size_t pos = 0;
    for (int p = 0; p < 3; ++p) {
      const auto colon = p < 2 ? t.find(':', pos) : t.size();
      if (colon == std::string_view::npos) bad(l, "expected len:train:test");
      const std::string_view field = trim(t.substr(pos, colon - pos));
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), parts[p]);
      if (ec != std::errc() || ptr != field.data() + field.size()) bad(l, "expected len:train:test");
      pos = colon + 1;
    }
    mix.push_back({parts[0], parts[1], parts[2]});
  }
  if (mix.empty()) bad(l, "empty mix");
  return mix;
}

}  // namespace

TrainConfig parse_train_config(std::string_view text) {
  TrainConfig c;
  for (const Line& l : split_lines(text)) {
    if (l.section) throw std::invalid_argument("line " + std::to_string(l.number) + ": sections belong in plan files");
    if (!apply_train_key(c, l)) bad(l, "unknown key");
  }
  c.validate();
  return c;
}

std::string to_text(const TrainConfig& c) {
  std::ostringstream os;
  os << "method = " << to_string(c.method) << '\n'
     << "batch_size = " << c.batch_size << '\n'
     << "iterations = " << c.iterations << '\n'
     << "learning_rate = " << format_double(c.learning_rate) << '\n'
     << "steps = " << c.mbs.steps << '\n'
     << "lambda = " << format_double(c.mbs.lambda) << '\n'
     << "beta = " << format_double(c.mbs.beta) << '\n'
     << "baseline_decay = " << format_double(c.baseline_decay) << '\n'
     << "data_fraction = " << format_double(c.data_fraction) << '\n'
     << "pretrain_size = " << c.pretrain_size << '\n'
     << "pretrain_steps = " << c.pretrain_steps << '\n'
     << "mapo_clip = " << format_double(c.mapo_clip) << '\n'
     << "arch = " << to_string(c.model.arch) << '\n'
     << "input_dim = " << c.model.input_dim << '\n'
     << "hidden = " << c.model.hidden << '\n'
     << "init_scale = " << format_double(c.init_scale) << '\n'
     << "seed = " << c.seed << '\n'
     << "eval_every = " << c.eval_every << '\n'
     << "checkpoint_every = " << c.checkpoint_every << '\n'
     << "record_time = " << (c.record_time ? "true" : "false") << '\n'
     << "execution = " << (c.execution == Execution::Serial ? "serial" : "parallel") << '\n';
  return os.str();
}

DatasetSpec parse_dataset_spec(std::string_view text) {
  DatasetSpec s;
  for (const Line& l : split_lines(text)) {
    if (l.section) throw std::invalid_argument("line " + std::to_string(l.number) + ": unexpected section");
    if (l.key == "mix") s.mix = parse_mix(l);
    else if (l.key == "feature_dim") s.feature_dim = number<int>(l);
    else if (l.key == "noise") s.noise = number<double>(l);
    else if (l.key == "pool_size") s.pool_size = number<int>(l);
    else if (l.key == "seed") s.seed = number<std::uint64_t>(l);
    else if (l.key == "scale") s.scale = number<double>(l);
    else bad(l, "unknown key");
  }
  s.validate();
  return s;
}

std::string to_text(const DatasetSpec& s) {
  std::ostringstream os;
  os << "mix = ";
  for (std::size_t i = 0; i < s.mix.size(); ++i) {
    os << (i ? ", " : "") << s.mix[i].length << ':' << s.mix[i].train << ':' << s.mix[i].test;
  }
  os << '\n'
     << "feature_dim = " << s.feature_dim << '\n'
     << "noise = " << format_double(s.noise) << '\n'
     << "pool_size = " << s.pool_size << '\n'
     << "seed = " << s.seed << '\n'
     << "scale = " << format_double(s.scale) << '\n';
  return os.str();
}

ExperimentPlan parse_plan(std::string_view text, const std::filesystem::path& base) {
  const auto resolve = [&](const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
  };
  ExperimentPlan plan;
  std::filesystem::path global_data;
  struct Pending {
    RunSpec run;
    bool own_eval = false;
  };
  std::vector<Pending> runs;
  for (const Line& l : split_lines(text)) {
    if (l.section) {
      std::istringstream head(l.key);
      std::string word, name;
      head >> word >> name;
      if (word != "run" || name.empty()) {
        throw std::invalid_argument("line " + std::to_string(l.number) + ": expected [run NAME]");
      }
      runs.push_back({RunSpec{name, TrainConfig{}, {}}, false});
      continue;
    }
    if (runs.empty()) {
      if (l.key == "data") global_data = resolve(l.value);
      else if (l.key == "out") plan.out = resolve(l.value);
      else if (l.key == "eval_every") plan.eval_every = number<int>(l);
      else bad(l, "unknown global key");
      continue;
    }
    Pending& p = runs.back();
    if (l.key == "data") {
      p.run.data = resolve(l.value);
    } else {
      if (!apply_train_key(p.run.config, l)) bad(l, "unknown key");
      if (l.key == "eval_every") p.own_eval = true;
    }
  }
  if (plan.out.empty()) throw std::invalid_argument("plan needs an `out` directory");
  for (Pending& p : runs) {
    if (p.run.data.empty()) p.run.data = global_data;
    if (!p.own_eval) p.run.config.eval_every = plan.eval_every;
    try {
      p.run.config.validate();
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("run " + p.run.name + ": " + e.what());
    }
    plan.runs.push_back(std::move(p.run));
  }
  return plan;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace ngs
