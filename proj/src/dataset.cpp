#include "ngs/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "ngs/reasoning.hpp"

namespace ngs {

using nlohmann::json;

void DatasetSpec::validate() const {
  for (const LengthCount& lc : mix) {
    if (lc.length < 1 || lc.length % 2 == 0) throw std::invalid_argument("dataset: lengths must be odd and positive");
    if (lc.train < 0 || lc.test < 0) throw std::invalid_argument("dataset: counts must be >= 0");
  }
  if (!(noise >= 0.0)) throw std::invalid_argument("dataset: noise must be >= 0");
  if (feature_dim < kNumSymbols) throw std::invalid_argument("dataset: feature_dim must be >= 14");
  if (pool_size < 1) throw std::invalid_argument("dataset: pool_size must be >= 1");
  if (!(scale > 0.0)) throw std::invalid_argument("dataset: scale must be > 0");
}

std::vector<LengthCount> DatasetSpec::scaled_mix() const {
  std::vector<LengthCount> out;
  for (const LengthCount& lc : mix) {
    out.push_back({lc.length, static_cast<int>(std::lround(lc.train * scale)),
                   static_cast<int>(std::lround(lc.test * scale))});
  }
  return out;
}

FormulaSampler::FormulaSampler(const Grammar& g) : grammar_(g), cnf_(binarize(g)) {
  for (int length = 1; length <= 5; length += 2) enumerated_[length] = enumerate_language(grammar_, length);
}

SymbolString FormulaSampler::sample(int length, Rng& rng) const {
  if (length < 1 || length % 2 == 0) throw std::invalid_argument("sample_formula: length must be odd");
  for (;;) {
    SymbolString z;
    if (const auto it = enumerated_.find(length); it != enumerated_.end()) {
      std::uniform_int_distribution<std::size_t> pick(0, it->second.size() - 1);
      z = it->second[pick(rng)];
    } else {
      std::uniform_int_distribution<int> digit(0, kNumDigits - 1);
      std::uniform_int_distribution<int> op(0, kNumOperators - 1);
      for (int i = 0; i < length; ++i) {
        z.push_back(i % 2 == 0 ? digit_symbol(digit(rng)) : kOperators[static_cast<std::size_t>(op(rng))]);
      }
    }
    if (execute(cnf_, z)) return z;
  }
}

SymbolString sample_formula(const Grammar& g, int length, Rng& rng) {
  return FormulaSampler(g).sample(length, rng);
}

std::pair<SymbolPool, SymbolPool> build_symbol_pools(const DatasetSpec& spec, Rng& rng) {
  spec.validate();
  std::normal_distribution<double> noise(0.0, 1.0);
  auto make_pool = [&]() {
    SymbolPool pool;
    pool.dim = spec.feature_dim;
    pool.instances.resize(kNumSymbols);
    for (int c = 0; c < kNumSymbols; ++c) {
      auto& per_class = pool.instances[static_cast<std::size_t>(c)];
      per_class.resize(static_cast<std::size_t>(spec.pool_size));
      for (auto& v : per_class) {
        v.assign(static_cast<std::size_t>(spec.feature_dim), 0.0);
        v[static_cast<std::size_t>(c)] = 1.0;
        for (double& x : v) x += spec.noise * noise(rng);
      }
    }
    return pool;
  };
  SymbolPool train = make_pool();
  SymbolPool test = make_pool();
  return {std::move(train), std::move(test)};
}

namespace {

enum Stream : std::uint64_t { kPools = 1, kFormula = 2, kShuffle = 3 };

std::vector<Example> generate_split(const DatasetSpec& spec, const FormulaSampler& sampler,
                                    const SymbolPool& pool, bool train) {
  std::vector<Example> out;
  const std::uint64_t split = train ? 0 : 1;
  const auto mix = spec.scaled_mix();
  for (std::size_t k = 0; k < mix.size(); ++k) {
    const int count = train ? mix[k].train : mix[k].test;
    for (int i = 0; i < count; ++i) {
      Rng rng = stream_rng(spec.seed, {kFormula, split, k, static_cast<std::uint64_t>(i)});
      SymbolString z = sampler.sample(mix[k].length, rng);
      std::uniform_int_distribution<std::size_t> pick(0, static_cast<std::size_t>(spec.pool_size) - 1);
      FeatureSeq x(spec.feature_dim);
      for (Symbol s : z) x.push_back(pool.instance(s, pick(rng)));
      const Value y = *execute(sampler.cnf(), z);
      out.emplace_back(std::move(x), y, std::move(z));
    }
  }
  Rng shuffle = stream_rng(spec.seed, {kShuffle, split});
  std::shuffle(out.begin(), out.end(), shuffle);
  return out;
}

}  // namespace

Dataset generate_dataset(const DatasetSpec& spec) {
  spec.validate();
  Dataset data;
  data.spec = spec;
  Rng pool_rng = stream_rng(spec.seed, {kPools});
  const auto [train_pool, test_pool] = build_symbol_pools(spec, pool_rng);
  const FormulaSampler sampler(load_arithmetic_grammar());
  data.train = generate_split(spec, sampler, train_pool, true);
  data.test = generate_split(spec, sampler, test_pool, false);
  for (int c = 0; c < kNumSymbols; ++c) {
    for (const auto& v : train_pool.instances[static_cast<std::size_t>(c)]) {
      data.symbols.push_back({v, static_cast<Symbol>(c)});
    }
  }
  Rng shuffle = stream_rng(spec.seed, {kShuffle, 2});
  std::shuffle(data.symbols.begin(), data.symbols.end(), shuffle);
  return data;
}

namespace {

json spec_to_json(const DatasetSpec& spec) {
  json mix = json::array();
  for (const LengthCount& lc : spec.mix) mix.push_back({{"length", lc.length}, {"train", lc.train}, {"test", lc.test}});
  return {{"mix", mix},         {"feature_dim", spec.feature_dim}, {"noise", spec.noise},
          {"pool_size", spec.pool_size}, {"seed", spec.seed},    {"scale", spec.scale}};
}

DatasetSpec spec_from_json(const json& j) {
  DatasetSpec spec;
  spec.mix.clear();
  for (const json& m : j.at("mix")) spec.mix.push_back({m.at("length"), m.at("train"), m.at("test")});
  spec.feature_dim = j.at("feature_dim");
  spec.noise = j.at("noise");
  spec.pool_size = j.at("pool_size");
  spec.seed = j.at("seed");
  spec.scale = j.at("scale");
  return spec;
}

std::vector<int> ids(const SymbolString& z) {
  std::vector<int> out;
  for (Symbol s : z) out.push_back(id(s));
  return out;
}

void write_split(const std::vector<Example>& split, const std::filesystem::path& path, TruthAccess key) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  for (const Example& e : split) {
    json x = json::array();
    for (int i = 0; i < e.length(); ++i) {
      const auto row = e.features().row(i);
      x.push_back(std::vector<double>(row.begin(), row.end()));
    }
    json rec = {{"len", e.length()}, {"y", e.answer().to_string()}, {"z", ids(e.hidden_truth(key))},
                {"z_hidden", true}, {"x", x}};
    os << rec.dump() << '\n';
  }
}

std::vector<Example> read_split(const std::filesystem::path& path, int dim) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::vector<Example> out;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json rec = json::parse(line);
      FeatureSeq x(dim);
      for (const json& row : rec.at("x")) x.push_back(row.get<std::vector<double>>());
      SymbolString z;
      for (const json& s : rec.at("z")) z.push_back(symbol_from_id(s.get<int>()));
      if (x.length() != rec.at("len").get<int>() || static_cast<int>(z.size()) != x.length()) {
        throw std::runtime_error("length fields disagree");
      }
      out.emplace_back(std::move(x), Value::parse(rec.at("y").get<std::string>()), std::move(z));
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

void write_dataset(const Dataset& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const TruthAccess key;
  write_split(data.train, dir / "train.jsonl", key);
  write_split(data.test, dir / "test.jsonl", key);
  {
    std::ofstream os(dir / "symbols.jsonl");
    if (!os) throw std::runtime_error("cannot write symbols.jsonl");
    for (const LabeledSymbol& s : data.symbols) os << json{{"label", id(s.label)}, {"x", s.features}}.dump() << '\n';
  }
  std::ofstream manifest(dir / "manifest.json");
  if (!manifest) throw std::runtime_error("cannot write manifest.json");
  manifest << json{{"format", "ngs-dataset-1"},
                   {"spec", spec_to_json(data.spec)},
                   {"train", data.train.size()},
                   {"test", data.test.size()},
                   {"symbols", data.symbols.size()}}
                  .dump(2)
           << '\n';
}

Dataset read_dataset(const std::filesystem::path& dir) {
  std::ifstream manifest_in(dir / "manifest.json");
  if (!manifest_in) throw std::runtime_error("missing " + (dir / "manifest.json").string());
  const json manifest = json::parse(manifest_in);
  Dataset data;
  data.spec = spec_from_json(manifest.at("spec"));
  data.train = read_split(dir / "train.jsonl", data.spec.feature_dim);
  data.test = read_split(dir / "test.jsonl", data.spec.feature_dim);
  if (std::ifstream sym(dir / "symbols.jsonl"); sym) {
    std::string line;
    while (std::getline(sym, line)) {
      if (line.empty()) continue;
      const json rec = json::parse(line);
      data.symbols.push_back({rec.at("x").get<std::vector<double>>(), symbol_from_id(rec.at("label").get<int>())});
    }
  }
  if (data.train.size() != manifest.at("train").get<std::size_t>() ||
      data.test.size() != manifest.at("test").get<std::size_t>()) {
    throw std::runtime_error("dataset: record counts disagree with manifest");
  }
  return data;
}

}  // namespace ngs
