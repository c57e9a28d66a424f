#include "swn/run_config.hpp"

#include <charconv>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "swn/error.hpp"

namespace swn {

namespace {

using Inputs = std::vector<std::string>;
using Setter = std::function<void(RunConfig&, const std::string& key, const Inputs&)>;

[[noreturn]] void bad_value(const std::string& key, const std::string& expected,
                            const Inputs& in) {
  std::string got;
  for (std::size_t i = 0; i < in.size(); ++i) got += (i ? "," : "") + in[i];
  throw ConfigError("key '" + key + "' expects " + expected + ", got '" + got + "'");
}

std::uint64_t to_uint(const std::string& key, const std::string& text, const Inputs& in) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end) bad_value(key, "a non-negative integer", in);
  return v;
}

const std::string& single(const std::string& key, const Inputs& in, const char* what) {
  if (in.size() != 1) bad_value(key, what, in);
  return in.front();
}

Setter uint_key(std::function<void(RunConfig&, std::uint64_t)> set) {
  return [set](RunConfig& c, const std::string& key, const Inputs& in) {
    set(c, to_uint(key, single(key, in, "a non-negative integer"), in));
  };
}

Setter real_key(std::function<void(RunConfig&, double)> set) {
  return [set](RunConfig& c, const std::string& key, const Inputs& in) {
    const auto& text = single(key, in, "a number");
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (text.empty() || ec != std::errc() || ptr != end) bad_value(key, "a number", in);
    set(c, v);
  };
}

Setter list_key(std::function<void(RunConfig&, std::vector<std::size_t>)> set) {
  return [set](RunConfig& c, const std::string& key, const Inputs& in) {
    if (in.empty()) bad_value(key, "a list of non-negative integers", in);
    std::vector<std::size_t> out;
    for (const auto& s : in) out.push_back(to_uint(key, s, in));
    set(c, std::move(out));
  };
}

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"seed", uint_key([](RunConfig& c, std::uint64_t v) {
         c.synth.seed = v;
         c.vocab.seed = v;
         c.model.seed = v;
       })},
      {"synth_seed", uint_key([](RunConfig& c, std::uint64_t v) { c.synth.seed = v; })},
      {"classes", uint_key([](RunConfig& c, std::uint64_t v) {
         c.synth.class_count = static_cast<int>(v);
       })},
      {"channels", uint_key([](RunConfig& c, std::uint64_t v) { c.synth.channel_count = v; })},
      {"length", uint_key([](RunConfig& c, std::uint64_t v) { c.synth.length = v; })},
      {"per_class", uint_key([](RunConfig& c, std::uint64_t v) { c.synth.samples_per_class = v; })},
      {"sigma", real_key([](RunConfig& c, double v) { c.synth.noise_sigma = v; })},
      {"motif", uint_key([](RunConfig& c, std::uint64_t v) { c.synth.motif_length = v; })},
      {"test_fraction", real_key([](RunConfig& c, double v) { c.test_fraction = v; })},
      {"scales", list_key([](RunConfig& c, std::vector<std::size_t> v) {
         c.vocab.scales = v;
         c.model.scales = std::move(v);
       })},
      {"words", uint_key([](RunConfig& c, std::uint64_t v) {
         c.vocab.words_per_block = v;
         c.words_given = true;
       })},
      {"top_k", uint_key([](RunConfig& c, std::uint64_t v) { c.vocab.top_k = v; })},
      {"per_class_samples",
       uint_key([](RunConfig& c, std::uint64_t v) { c.vocab.samples_per_class = v; })},
      {"stride", uint_key([](RunConfig& c, std::uint64_t v) { c.vocab.stride = v; })},
      {"kmeans_max_iter", uint_key([](RunConfig& c, std::uint64_t v) { c.vocab.max_iter = v; })},
      {"kmeans_tol", real_key([](RunConfig& c, double v) { c.vocab.tol = v; })},
      {"embed_dim", uint_key([](RunConfig& c, std::uint64_t v) { c.model.embed_dim = v; })},
      {"layer_depth", uint_key([](RunConfig& c, std::uint64_t v) { c.model.layer_depth = v; })},
      {"kernel_size", uint_key([](RunConfig& c, std::uint64_t v) { c.model.kernel_size = v; })},
      {"out_channels", uint_key([](RunConfig& c, std::uint64_t v) { c.model.out_channels = v; })},
      {"dilations", list_key([](RunConfig& c, std::vector<std::size_t> v) {
         c.model.dilations = std::move(v);
       })},
      {"sfi_out_channels",
       uint_key([](RunConfig& c, std::uint64_t v) { c.model.sfi_out_channels = v; })},
      {"sfi_kernel", uint_key([](RunConfig& c, std::uint64_t v) { c.model.sfi_kernel = v; })},
      {"lambda", real_key([](RunConfig& c, double v) { c.model.lambda = v; })},
      {"tau", real_key([](RunConfig& c, double v) { c.model.tau = v; })},
      {"batch_size", uint_key([](RunConfig& c, std::uint64_t v) { c.model.batch_size = v; })},
      {"epochs", uint_key([](RunConfig& c, std::uint64_t v) { c.model.epochs = v; })},
      {"learning_rate", real_key([](RunConfig& c, double v) { c.model.learning_rate = v; })},
  };
  return table;
}

}  // namespace

json RunConfig::to_json() const {
  return {{"seed", model.seed},
          {"synth_seed", synth.seed},
          {"classes", synth.class_count},
          {"channels", synth.channel_count},
          {"length", synth.length},
          {"per_class", synth.samples_per_class},
          {"sigma", synth.noise_sigma},
          {"motif", synth.motif_length},
          {"test_fraction", test_fraction},
          {"scales", model.scales},
          {"words", vocab.words_per_block},
          {"top_k", vocab.top_k},
          {"per_class_samples", vocab.samples_per_class},
          {"stride", vocab.stride},
          {"kmeans_max_iter", vocab.max_iter},
          {"kmeans_tol", vocab.tol},
          {"embed_dim", model.embed_dim},
          {"layer_depth", model.layer_depth},
          {"kernel_size", model.kernel_size},
          {"out_channels", model.out_channels},
          {"dilations", model.dilations},
          {"sfi_out_channels", model.sfi_out_channels},
          {"sfi_kernel", model.sfi_kernel},
          {"lambda", model.lambda},
          {"tau", model.tau},
          {"batch_size", model.batch_size},
          {"epochs", model.epochs},
          {"learning_rate", model.learning_rate}};
}

const std::vector<std::string>& run_config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

void apply_run_config(RunConfig& cfg, std::string_view text, const std::string& origin) {
  std::vector<CLI::ConfigItem> items;
  try {
    std::istringstream in{std::string(text)};
    items = CLI::ConfigTOML().from_config(in);
  } catch (const CLI::Error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  std::map<std::string, const Setter*> lookup;
  for (const auto& [name, set] : setters()) lookup.emplace(name, &set);
  std::set<std::string> seen;
  for (const auto& item : items) {
    if (!item.parents.empty() || item.name == "++" || item.name == "--") {
      throw ConfigError(origin + ": sections are not supported; use flat key = value lines");
    }
    const auto it = lookup.find(item.name);
    if (it == lookup.end()) throw ConfigError(origin + ": unknown key '" + item.name + "'");
    if (!seen.insert(item.name).second) {
      throw ConfigError(origin + ": key '" + item.name + "' given twice");
    }
    try {
      (*it->second)(cfg, item.name, item.inputs);
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ": " + e.what());
    }
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw ConfigError("config file " + path.string() + " not found");
  }
  RunConfig cfg;
  apply_run_config(cfg, read_text_file(path), path.string());
  return cfg;
}

}  // namespace swn
