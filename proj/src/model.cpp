#include "swn/model.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <set>

#include "swn/error.hpp"

namespace swn {

// -------------------------------------------------------------- ModelConfig

void ModelConfig::validate() const {
  auto fail = [](const std::string& why) { throw ConfigError("model config: " + why); };
  if (scales.empty()) fail("at least one scale is required");
  if (embed_dim < 1 || layer_depth < 1 || kernel_size < 1 || out_channels < 1) {
    fail("embed_dim, layer_depth, kernel_size and out_channels must be >= 1");
  }
  if (dilations.size() != layer_depth) fail("need one dilation per encoder layer");
  for (auto d : dilations) {
    if (d < 1) fail("dilations must be >= 1");
  }
  if (sfi_out_channels < 1 || sfi_kernel < 1) fail("SFI channels and kernel must be >= 1");
  if (!(lambda >= 0.0)) fail("lambda must be >= 0");
  if (!(tau > 0.0)) fail("tau must be positive");
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (lambda > 0.0 && batch_size < 2) fail("contrastive training needs batch_size >= 2");
  if (epochs < 1) fail("epochs must be >= 1");
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
}

json ModelConfig::to_json() const {
  return {{"scales", scales},
          {"embed_dim", embed_dim},
          {"layer_depth", layer_depth},
          {"kernel_size", kernel_size},
          {"out_channels", out_channels},
          {"dilations", dilations},
          {"sfi_out_channels", sfi_out_channels},
          {"sfi_kernel", sfi_kernel},
          {"lambda", lambda},
          {"tau", tau},
          {"batch_size", batch_size},
          {"epochs", epochs},
          {"learning_rate", learning_rate},
          {"seed", seed}};
}

ModelConfig ModelConfig::from_json(const json& j) {
  ModelConfig c;
  c.scales = j.at("scales").get<std::vector<std::size_t>>();
  c.embed_dim = j.at("embed_dim").get<std::size_t>();
  c.layer_depth = j.at("layer_depth").get<std::size_t>();
  c.kernel_size = j.at("kernel_size").get<std::size_t>();
  c.out_channels = j.at("out_channels").get<std::size_t>();
  c.dilations = j.at("dilations").get<std::vector<std::size_t>>();
  c.sfi_out_channels = j.at("sfi_out_channels").get<std::size_t>();
  c.sfi_kernel = j.at("sfi_kernel").get<std::size_t>();
  c.lambda = j.at("lambda").get<double>();
  c.tau = j.at("tau").get<double>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

json ModelDims::to_json() const {
  return {{"channel_count", channel_count},
          {"words_per_block", words_per_block},
          {"class_count", class_count},
          {"input", mode == InputMode::tokens ? "tokens" : "raw"}};
}

ModelDims ModelDims::from_json(const json& j) {
  ModelDims d;
  d.channel_count = j.at("channel_count").get<std::size_t>();
  d.words_per_block = j.at("words_per_block").get<std::size_t>();
  d.class_count = j.at("class_count").get<int>();
  const auto mode = j.at("input").get<std::string>();
  if (mode == "tokens") {
    d.mode = InputMode::tokens;
  } else if (mode == "raw") {
    d.mode = InputMode::raw;
  } else {
    throw ParseError("unknown model input mode '" + mode + "'");
  }
  return d;
}

std::vector<Example> examples_from_corpus(const MultiScaleCorpus& corpus) {
  std::vector<Example> out;
  out.reserve(corpus.samples.size());
  for (const auto& s : corpus.samples) out.push_back({s.id, s.label, s.sentences, {}});
  return out;
}

std::vector<Example> examples_from_dataset(const Dataset& ds) {
  std::vector<Example> out;
  out.reserve(ds.size());
  for (const auto& s : ds.samples()) out.push_back({s.id, s.label, {}, s.channels});
  return out;
}

// ------------------------------------------------------------- ShapeWordNet

namespace {

std::string enc_name(std::size_t u, const std::string& rest) {
  return "enc" + std::to_string(u) + "." + rest;
}

}  // namespace

ShapeWordNet::ShapeWordNet(ModelConfig cfg, ModelDims dims)
    : cfg_(std::move(cfg)), dims_(dims) {
  cfg_.validate();
  if (dims_.channel_count < 1) throw ConfigError("model needs at least one channel");
  if (dims_.class_count < 2) throw ConfigError("model needs at least two classes");
  if (dims_.mode == InputMode::tokens && dims_.words_per_block < 1) {
    throw ConfigError("model needs at least one word per block");
  }
  if (cfg_.lambda > 0.0 && view_count() < 2) {
    throw ConfigError("lambda > 0 needs at least two scales");
  }
  init_params();
}

std::size_t ShapeWordNet::view_count() const {
  return dims_.mode == InputMode::tokens ? cfg_.scales.size() : 1;
}

void ShapeWordNet::init_params() {
  std::mt19937_64 rng(cfg_.seed);
  auto uniform = [&](std::vector<std::size_t> shape, double bound) {
    Tensor t(std::move(shape));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& v : t.values) v = dist(rng);
    return t;
  };
  const std::size_t p = cfg_.out_channels;
  const std::size_t k = cfg_.kernel_size;
  for (std::size_t u = 0; u < view_count(); ++u) {
    std::size_t in = dims_.channel_count;
    if (dims_.mode == InputMode::tokens) {
      for (std::size_t v = 0; v < dims_.channel_count; ++v) {
        params_.add(enc_name(u, "embed" + std::to_string(v)),
                    uniform({dims_.words_per_block, cfg_.embed_dim}, 1.0));
      }
      in = dims_.channel_count * cfg_.embed_dim;
    }
    for (std::size_t l = 0; l < cfg_.layer_depth; ++l) {
      const double conv_bound = 1.0 / std::sqrt(static_cast<double>(in * k));
      const double res_bound = 1.0 / std::sqrt(static_cast<double>(in));
      const std::string layer = std::to_string(l);
      params_.add(enc_name(u, "conv" + layer + ".w"), uniform({p, in, k}, conv_bound));
      params_.add(enc_name(u, "conv" + layer + ".b"), uniform({p}, conv_bound));
      params_.add(enc_name(u, "res" + layer + ".w"), uniform({p, in, 1}, res_bound));
      params_.add(enc_name(u, "res" + layer + ".b"), uniform({p}, res_bound));
      in = p;
    }
  }
  const std::size_t h = view_count();
  const double sfi_bound = 1.0 / std::sqrt(static_cast<double>(h * cfg_.sfi_kernel));
  params_.add("sfi.w", uniform({cfg_.sfi_out_channels, h, cfg_.sfi_kernel}, sfi_bound));
  params_.add("sfi.b", uniform({cfg_.sfi_out_channels}, sfi_bound));
  const std::size_t q = feature_size();
  const double head_bound = 1.0 / std::sqrt(static_cast<double>(q));
  const auto classes = static_cast<std::size_t>(dims_.class_count);
  params_.add("head.w", uniform({classes, q}, head_bound));
  params_.add("head.b", uniform({classes}, head_bound));
}

Var ShapeWordNet::encode_sequence(Tape& t, const Example& ex, std::size_t view) const {
  if (view >= view_count()) throw IndexError("encoder index out of range");
  Var x;
  if (dims_.mode == InputMode::tokens) {
    if (ex.sentences.size() != view_count()) {
      throw ShapeError("example '" + ex.id + "' has " + std::to_string(ex.sentences.size()) +
                       " scales, model expects " + std::to_string(view_count()));
    }
    const TokenRows& rows = ex.sentences[view];
    if (rows.size() != dims_.channel_count) {
      throw ShapeError("example '" + ex.id + "' has " + std::to_string(rows.size()) +
                       " token rows, model expects " + std::to_string(dims_.channel_count));
    }
    std::vector<Var> parts;
    parts.reserve(rows.size());
    for (std::size_t v = 0; v < rows.size(); ++v) {
      const Var table = t.param(enc_name(view, "embed" + std::to_string(v)));
      parts.push_back(ops::transpose(t, ops::embed_lookup(t, table, rows[v])));
    }
    x = ops::concat_rows(t, parts);
  } else {
    if (ex.raw.size() != dims_.channel_count) {
      throw ShapeError("example '" + ex.id + "' has " + std::to_string(ex.raw.size()) +
                       " channels, model expects " + std::to_string(dims_.channel_count));
    }
    const std::size_t n = ex.raw.front().size();
    Tensor input({ex.raw.size(), n});
    for (std::size_t c = 0; c < ex.raw.size(); ++c) {
      if (ex.raw[c].size() != n) throw ShapeError("ragged raw channels");
      std::copy(ex.raw[c].begin(), ex.raw[c].end(), input.values.begin() + static_cast<long>(c * n));
    }
    x = t.constant(std::move(input));
  }
  for (std::size_t l = 0; l < cfg_.layer_depth; ++l) {
    const std::string layer = std::to_string(l);
    const Var conv = ops::causal_dilated_conv1d(t, x, t.param(enc_name(view, "conv" + layer + ".w")),
                                                t.param(enc_name(view, "conv" + layer + ".b")),
                                                cfg_.dilations[l]);
    const Var res = ops::causal_dilated_conv1d(t, x, t.param(enc_name(view, "res" + layer + ".w")),
                                               t.param(enc_name(view, "res" + layer + ".b")), 1);
    x = ops::relu(t, ops::add(t, conv, res));
  }
  return x;
}

Var ShapeWordNet::encode(Tape& t, const Example& ex, std::size_t view) const {
  return ops::global_max_pool(t, encode_sequence(t, ex, view));
}

Var ShapeWordNet::integrate(Tape& t, std::span<const Var> reps) const {
  if (reps.size() != view_count()) {
    throw ShapeError("integrate expects " + std::to_string(view_count()) +
                     " representations, got " + std::to_string(reps.size()));
  }
  const Var stacked = ops::stack(t, reps);  // [h x p]
  const Var fused = ops::conv1d_same(t, stacked, t.param("sfi.w"), t.param("sfi.b"));
  return ops::flatten(t, fused);
}

Var ShapeWordNet::classify(Tape& t, Var features) const {
  return ops::linear(t, features, t.param("head.w"), t.param("head.b"));
}

ShapeWordNet::Forward ShapeWordNet::forward(Tape& t, const Example& ex) const {
  Forward f;
  for (std::size_t u = 0; u < view_count(); ++u) f.reps.push_back(encode(t, ex, u));
  f.logits = classify(t, integrate(t, f.reps));
  return f;
}

std::vector<double> ShapeWordNet::logits(const Example& ex) const {
  Tape t(params_);
  t.set_exec(Exec::serial);
  return t.value(forward(t, ex).logits).values;
}

int ShapeWordNet::predict(const Example& ex) const { return argmax(logits(ex)); }

int argmax(std::span<const double> values) {
  if (values.empty()) throw ShapeError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return static_cast<int>(best);
}

// -------------------------------------------------------------------- losses

LossTerms joint_loss(Tape& t, const ShapeWordNet& model, std::span<const Example* const> batch) {
  if (batch.empty()) throw DomainError("empty batch");
  const auto& cfg = model.config();
  const std::size_t h = model.view_count();
  if (cfg.lambda > 0.0 && h < 2) throw ConfigError("lambda > 0 needs at least two scales");
  if (cfg.lambda > 0.0 && batch.size() < 2) {
    throw DomainError("contrastive loss needs at least two samples per batch");
  }

  std::vector<Var> ce_terms;
  std::vector<std::vector<Var>> per_view(h);
  for (const Example* ex : batch) {
    const auto f = model.forward(t, *ex);
    ce_terms.push_back(ops::softmax_cross_entropy(t, f.logits, ex->label));
    for (std::size_t u = 0; u < h; ++u) per_view[u].push_back(f.reps[u]);
  }
  LossTerms terms;
  terms.ce = ops::scale(t, ops::sum(t, ce_terms), 1.0 / static_cast<double>(batch.size()));
  terms.total = terms.ce;
  if (h >= 2 && batch.size() >= 2) {
    std::vector<Var> matrices;
    for (auto& reps : per_view) matrices.push_back(ops::stack(t, reps));
    terms.sc = ops::cross_scale_loss(t, matrices, cfg.tau);
    if (cfg.lambda > 0.0) {
      terms.total = ops::add(t, terms.ce, ops::scale(t, *terms.sc, cfg.lambda));
    }
  }
  return terms;
}

json history_to_json(const std::vector<EpochStats>& history) {
  json out = json::array();
  for (const auto& e : history) {
    out.push_back({{"epoch", e.epoch}, {"loss", e.loss}, {"ce", e.ce}, {"sc", e.sc}});
  }
  return out;
}

// ----------------------------------------------------------------- training

std::vector<std::pair<std::size_t, std::size_t>> batch_ranges(std::size_t count,
                                                              std::size_t batch_size) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t b = 0; b < count; b += batch_size) {
    out.emplace_back(b, std::min(count, b + batch_size));
  }
  if (out.size() >= 2 && out.back().second - out.back().first < 2) {
    out[out.size() - 2].second = out.back().second;
    out.pop_back();
  }
  return out;
}

TrainResult train(const std::vector<Example>& data, const ModelConfig& cfg,
                  const ModelDims& dims) {
  cfg.validate();
  std::set<int> classes;
  for (const auto& ex : data) {
    if (ex.label < 0 || ex.label >= dims.class_count) {
      throw DomainError("example '" + ex.id + "' label outside the model's classes");
    }
    classes.insert(ex.label);
  }
  if (classes.size() < 2) throw DomainError("training needs at least two classes present");

  TrainResult res{ShapeWordNet(cfg, dims), {}};
  ShapeWordNet& model = res.model;
  const AdamConfig adam{cfg.learning_rate};

  std::mt19937_64 rng(cfg.seed ^ 0xd1b54a32d192ed03ULL);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochStats stats;
    stats.epoch = epoch;
    const auto ranges = batch_ranges(order.size(), cfg.batch_size);
    for (const auto& [lo, hi] : ranges) {
      std::vector<const Example*> batch;
      for (std::size_t i = lo; i < hi; ++i) batch.push_back(&data[order[i]]);
      Tape tape(model.params());
      const auto terms = joint_loss(tape, model, batch);
      stats.loss += tape.value(terms.total).item();
      stats.ce += tape.value(terms.ce).item();
      if (terms.sc) stats.sc += tape.value(*terms.sc).item();
      tape.backward(terms.total);
      adam_step(model.params(), adam);
    }
    const auto nb = static_cast<double>(ranges.size());
    stats.loss /= nb;
    stats.ce /= nb;
    stats.sc /= nb;
    res.history.push_back(stats);
  }
  return res;
}

MetricsReport evaluate(const ShapeWordNet& model, const std::vector<Example>& data) {
  if (data.empty()) throw DomainError("cannot evaluate on an empty corpus");
  std::vector<int> truth(data.size()), pred(data.size());
  std::exception_ptr failure;
  std::mutex failure_mu;
  const auto count = static_cast<std::ptrdiff_t>(data.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      truth[k] = data[k].label;
      pred[k] = model.predict(data[k]);
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mu);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return compute_metrics(truth, pred, model.dims().class_count);
}

// --------------------------------------------------------------- checkpoint

void save_model(const ShapeWordNet& model, const std::string& vocab_fingerprint,
                const std::filesystem::path& path, const json& meta) {
  json j = model.params().to_checkpoint();
  j["model_config"] = model.config().to_json();
  j["dims"] = model.dims().to_json();
  j["vocab_fingerprint"] = vocab_fingerprint;
  if (!meta.is_null()) j["meta"] = meta;
  write_text_file(path, j.dump() + "\n");
}

LoadedModel load_model(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError("checkpoint " + path.string() + ": " + e.what());
  }
  try {
    LoadedModel out{ShapeWordNet(ModelConfig::from_json(j.at("model_config")),
                                 ModelDims::from_json(j.at("dims"))),
                    j.value("vocab_fingerprint", std::string())};
    out.model.params().load_checkpoint(j);
    return out;
  } catch (const json::exception& e) {
    throw ParseError("checkpoint " + path.string() + ": " + e.what());
  }
}

}  // namespace swn
