#include "swn/experiment.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <optional>

#include "swn/discretize.hpp"
#include "swn/error.hpp"

namespace swn {

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::full: return "full";
    case Variant::no_cclm: return "no_cclm";
    case Variant::no_sd: return "no_sd";
  }
  return "full";
}

Variant parse_variant(const std::string& name) {
  if (name == "full") return Variant::full;
  if (name == "no_cclm") return Variant::no_cclm;
  if (name == "no_sd") return Variant::no_sd;
  throw ConfigError("unknown variant '" + name + "' (expected full, no_cclm or no_sd)");
}

PipelineConfig PipelineConfig::reseeded(std::uint64_t seed) const {
  PipelineConfig out = *this;
  out.vocab.seed = seed;
  out.model.seed = seed;
  return out;
}

namespace {

bool covers(const Vocabulary& vocab, const std::vector<std::size_t>& scales,
            std::size_t words_per_block) {
  if (vocab.words_per_block() != words_per_block) return false;
  return std::all_of(scales.begin(), scales.end(),
                     [&](std::size_t l) { return vocab.has_scale(l); });
}

std::size_t parse_count(const std::string& param, const std::string& text) {
  std::size_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || v == 0) {
    throw ConfigError("sweep " + param + ": '" + text + "' is not a positive integer");
  }
  return v;
}

double parse_real(const std::string& param, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError("sweep " + param + ": '" + text + "' is not a number");
}

}  // namespace

VariantResult run_variant(const Dataset& train, const Dataset& test, Variant variant,
                          const PipelineConfig& cfg, const VocabularyFit* prebuilt) {
  if (train.channel_count() != test.channel_count() || train.class_count() != test.class_count()) {
    throw CompatibilityError("train and test sets differ in channels or classes");
  }
  VariantResult res;
  res.variant = variant;
  ModelConfig mcfg = cfg.model;
  if (mcfg.scales.empty()) throw ConfigError("at least one scale is required");

  if (variant == Variant::no_sd) {
    mcfg.lambda = 0.0;
    const ModelDims dims{train.channel_count(), 1, train.class_count(), InputMode::raw};
    auto trained = swn::train(examples_from_dataset(train), mcfg, dims);
    res.metrics = evaluate(trained.model, examples_from_dataset(test));
    res.history = std::move(trained.history);
    return res;
  }

  if (variant == Variant::no_cclm) {
    mcfg.scales = {mcfg.scales.front()};
    mcfg.lambda = 0.0;
  }

  std::optional<Vocabulary> built;
  const Vocabulary* vocab = nullptr;
  if (prebuilt && covers(prebuilt->vocabulary, mcfg.scales, cfg.vocab.words_per_block)) {
    vocab = &prebuilt->vocabulary;
  } else {
    VocabConfig vcfg = cfg.vocab;
    vcfg.scales = mcfg.scales;
    built = build_vocabulary(train, vcfg).vocabulary;
    vocab = &*built;
  }

  const auto train_corpus = mst(train, *vocab, mcfg.scales);
  const auto test_corpus = mst(test, *vocab, mcfg.scales);
  const ModelDims dims{train.channel_count(), vocab->words_per_block(), train.class_count(),
                       InputMode::tokens};
  auto trained = swn::train(examples_from_corpus(train_corpus), mcfg, dims);
  res.metrics = evaluate(trained.model, examples_from_corpus(test_corpus));
  res.history = std::move(trained.history);
  res.vocab_fingerprint = vocab->fingerprint();
  return res;
}

std::vector<SweepRow> run_sweep(const Dataset& train, const Dataset& test,
                                const std::string& param, const std::vector<std::string>& values,
                                const PipelineConfig& cfg) {
  static constexpr std::array<std::size_t, 5> kScaleLadder{5, 10, 25, 50, 100};
  if (param != "lambda" && param != "scale_count" && param != "words" && param != "word_length") {
    throw ConfigError("unknown sweep param '" + param +
                      "' (expected lambda, scale_count, words or word_length)");
  }
  if (values.empty()) throw ConfigError("sweep needs at least one value");

  // Parse everything first so a bad value fails before any training.
  std::vector<std::pair<PipelineConfig, Variant>> runs;
  for (const auto& text : values) {
    PipelineConfig run = cfg;
    Variant variant = Variant::full;
    if (param == "lambda") {
      run.model.lambda = parse_real(param, text);
    } else if (param == "scale_count") {
      const std::size_t count = parse_count(param, text);
      if (count > kScaleLadder.size()) {
        throw ConfigError("sweep scale_count: at most " + std::to_string(kScaleLadder.size()));
      }
      run.model.scales.assign(kScaleLadder.begin(), kScaleLadder.begin() + static_cast<long>(count));
      if (count == 1) run.model.lambda = 0.0;
    } else if (param == "words") {
      run.vocab.words_per_block = parse_count(param, text);
      variant = Variant::no_cclm;
    } else {
      run.model.scales = {parse_count(param, text)};
      variant = Variant::no_cclm;
    }
    run.model.validate();
    runs.emplace_back(std::move(run), variant);
  }

  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto r = run_variant(train, test, runs[i].second, runs[i].first);
    rows.push_back({param, values[i], r.metrics.acc, r.metrics.maf1});
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "param,value,acc,maf1\n";
  char buf[64];
  for (const auto& r : rows) {
    out += r.param + "," + r.value + ",";
    std::snprintf(buf, sizeof buf, "%.6f,%.6f\n", r.acc, r.maf1);
    out += buf;
  }
  return out;
}

}  // namespace swn
