#include "swn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "swn/error.hpp"

namespace swn {

Dataset::Dataset(std::vector<Sample> samples, int class_count)
    : samples_(std::move(samples)), class_count_(class_count) {
  if (!samples_.empty()) {
    channel_count_ = samples_.front().channel_count();
    length_ = samples_.front().length();
  }
  validate();
}

Dataset::Dataset(std::vector<Sample> samples, int class_count, std::size_t channel_count,
                 std::size_t length)
    : samples_(std::move(samples)),
      class_count_(class_count),
      channel_count_(channel_count),
      length_(length) {
  validate();
}

void Dataset::validate() const {
  if (class_count_ < 1) throw DomainError("class count must be positive");
  std::set<std::string> ids;
  for (const auto& s : samples_) {
    if (s.channels.empty()) throw ShapeError("sample '" + s.id + "' has no channels");
    if (s.channel_count() != channel_count_) {
      throw ShapeError("sample '" + s.id + "' has " + std::to_string(s.channel_count()) +
                       " channels, expected " + std::to_string(channel_count_));
    }
    for (const auto& ch : s.channels) {
      if (ch.size() != length_ || ch.empty()) {
        throw ShapeError("sample '" + s.id + "' has a channel of length " +
                         std::to_string(ch.size()) + ", expected " + std::to_string(length_));
      }
    }
    if (s.label < 0 || s.label >= class_count_) {
      throw DomainError("sample '" + s.id + "' label " + std::to_string(s.label) +
                        " outside [0, " + std::to_string(class_count_) + ")");
    }
    if (!ids.insert(s.id).second) throw DomainError("duplicate sample id '" + s.id + "'");
  }
}

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_) out.push_back(s.label);
  return out;
}

std::vector<std::size_t> Dataset::class_histogram() const {
  std::vector<std::size_t> h(static_cast<std::size_t>(class_count_), 0);
  for (const auto& s : samples_) ++h[static_cast<std::size_t>(s.label)];
  return h;
}

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
  std::vector<Sample> picked;
  picked.reserve(indices.size());
  for (auto i : indices) picked.push_back(samples_.at(i));
  return Dataset(std::move(picked), class_count_, channel_count_, length_);
}

Series class_motif(int label, std::size_t motif_length) {
  const double len = static_cast<double>(motif_length);
  Series m(motif_length);
  for (std::size_t t = 0; t < motif_length; ++t) {
    const double x = static_cast<double>(t) / len;  // [0, 1)
    switch (label) {
      case 0:
        m[t] = std::sin(2.0 * std::numbers::pi * x);
        break;
      case 1:
        m[t] = 1.0;
        break;
      case 2:
        // frequency sweeps linearly from 1 to 4 cycles per window
        m[t] = std::sin(2.0 * std::numbers::pi * (x + 1.5 * x * x));
        break;
      default:
        m[t] = std::sin(2.0 * std::numbers::pi * static_cast<double>(label) * x);
        break;
    }
  }
  return m;
}

namespace {

Sample parse_sample(const json& rec, std::size_t line_no) {
  auto fail = [&](const std::string& why) {
    return ParseError("line " + std::to_string(line_no) + ": " + why);
  };
  if (!rec.is_object()) throw fail("record is not a JSON object");
  if (!rec.contains("id") || !rec["id"].is_string()) throw fail("missing string field 'id'");
  if (!rec.contains("label") || !rec["label"].is_number_integer()) {
    throw fail("missing integer field 'label'");
  }
  if (!rec.contains("channels") || !rec["channels"].is_array()) {
    throw fail("missing array field 'channels'");
  }
  Sample s;
  s.id = rec["id"].get<std::string>();
  s.label = rec["label"].get<int>();
  if (s.label < 0) throw fail("negative label");
  for (const auto& ch : rec["channels"]) {
    if (!ch.is_array()) throw fail("channel is not an array");
    Series values;
    values.reserve(ch.size());
    for (const auto& v : ch) {
      if (!v.is_number()) throw fail("non-numeric channel value");
      values.push_back(v.get<double>());
    }
    s.channels.push_back(std::move(values));
  }
  if (s.channels.empty()) throw fail("sample has no channels");
  const auto n = s.channels.front().size();
  for (const auto& ch : s.channels) {
    if (ch.size() != n) {
      throw ShapeError("line " + std::to_string(line_no) + ": ragged channel lengths " +
                       std::to_string(n) + " and " + std::to_string(ch.size()));
    }
  }
  return s;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset " + path.string());
  std::vector<Sample> samples;
  std::string line;
  std::size_t line_no = 0;
  int max_label = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (rec.is_object() && rec.contains("header")) continue;
    samples.push_back(parse_sample(rec, line_no));
    max_label = std::max(max_label, samples.back().label);
  }
  if (samples.empty()) throw ParseError("no samples in " + path.string());
  return Dataset(std::move(samples), max_label + 1);
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path, const json& meta) {
  std::ostringstream out;
  if (!meta.is_null()) out << json{{"header", meta}}.dump() << '\n';
  for (const auto& s : ds.samples()) {
    json rec{{"id", s.id}, {"label", s.label}, {"channels", s.channels}};
    out << rec.dump() << '\n';
  }
  write_text_file(path, out.str());
}

Dataset generate_synthetic(const SynthConfig& cfg) {
  if (cfg.class_count < 1) throw ConfigError("class_count must be >= 1");
  if (cfg.channel_count < 1) throw ConfigError("channel_count must be >= 1");
  if (cfg.length < 1) throw ConfigError("length must be >= 1");
  if (cfg.samples_per_class < 1) throw ConfigError("samples_per_class must be >= 1");
  if (cfg.motif_length < 1 || cfg.motif_length > cfg.length) {
    throw ConfigError("motif_length must lie in [1, length]");
  }
  if (!(cfg.noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be >= 0");

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> place(0, cfg.length - cfg.motif_length);

  std::vector<Sample> samples;
  samples.reserve(static_cast<std::size_t>(cfg.class_count) * cfg.samples_per_class);
  std::size_t serial = 0;
  for (int k = 0; k < cfg.class_count; ++k) {
    const Series motif = class_motif(k, cfg.motif_length);
    for (std::size_t i = 0; i < cfg.samples_per_class; ++i) {
      Sample s;
      char id[32];
      std::snprintf(id, sizeof id, "syn-%06zu", serial++);
      s.id = id;
      s.label = k;
      for (std::size_t c = 0; c < cfg.channel_count; ++c) {
        Series ch(cfg.length, 0.0);
        if (cfg.noise_sigma > 0.0) {
          for (auto& v : ch) v = cfg.noise_sigma * gauss(rng);
        }
        const std::size_t at = place(rng);
        for (std::size_t t = 0; t < motif.size(); ++t) ch[at + t] += motif[t];
        s.channels.push_back(std::move(ch));
      }
      samples.push_back(std::move(s));
    }
  }
  return Dataset(std::move(samples), cfg.class_count);
}

void znormalize_inplace(Series& channel) {
  if (channel.empty()) return;
  const double n = static_cast<double>(channel.size());
  double mean = 0.0;
  for (double v : channel) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : channel) var += (v - mean) * (v - mean);
  var /= n;
  const double sd = std::sqrt(var);
  // Tolerates round-off on channels that are constant up to representation.
  if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
    std::fill(channel.begin(), channel.end(), 0.0);
    return;
  }
  for (auto& v : channel) v = (v - mean) / sd;
}

Dataset znormalize(const Dataset& ds) {
  std::vector<Sample> out = ds.samples();
  for (auto& s : out) {
    for (auto& ch : s.channels) znormalize_inplace(ch);
  }
  return Dataset(std::move(out), ds.class_count(), ds.channel_count(), ds.length());
}

namespace {

std::vector<std::vector<std::size_t>> indices_by_class(const Dataset& ds) {
  std::vector<std::vector<std::size_t>> by(static_cast<std::size_t>(ds.class_count()));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    by[static_cast<std::size_t>(ds[i].label)].push_back(i);
  }
  return by;
}

}  // namespace

std::pair<Dataset, Dataset> split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test_fraction must lie in (0, 1)");
  }
  if (ds.size() < 2) throw ConfigError("split needs at least 2 samples");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> train_idx, test_idx;
  for (auto& members : indices_by_class(ds)) {
    if (members.empty()) continue;
    std::shuffle(members.begin(), members.end(), rng);
    const auto nc = members.size();
    auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(nc)));
    if (nc >= 2) n_test = std::clamp<std::size_t>(n_test, 1, nc - 1);
    test_idx.insert(test_idx.end(), members.begin(), members.begin() + static_cast<long>(n_test));
    train_idx.insert(train_idx.end(), members.begin() + static_cast<long>(n_test), members.end());
  }
  if (train_idx.empty() || test_idx.empty()) {
    throw ConfigError("test_fraction " + std::to_string(test_fraction) +
                      " leaves an empty split");
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {ds.subset(train_idx), ds.subset(test_idx)};
}

Dataset subsample_labels(const Dataset& ds, std::size_t per_class, std::uint64_t seed) {
  if (per_class < 1) throw ConfigError("per_class must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> keep;
  for (auto& members : indices_by_class(ds)) {
    std::shuffle(members.begin(), members.end(), rng);
    const auto take = std::min(per_class, members.size());
    keep.insert(keep.end(), members.begin(), members.begin() + static_cast<long>(take));
  }
  std::sort(keep.begin(), keep.end());
  return ds.subset(keep);
}

}  // namespace swn
