#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "swn/dataset.hpp"
#include "swn/discretize.hpp"
#include "swn/error.hpp"
#include "swn/experiment.hpp"
#include "swn/model.hpp"
#include "swn/run_config.hpp"
#include "swn/vocab.hpp"

namespace {

using swn::json;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

// Options shared by commands that take a config file. Flags given on the
// command line win over file values.
struct Common {
  std::string config_path;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;

  void add(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "flat key = value config file");
    seed_opt = cmd->add_option("--seed", seed, "seed for every random step");
  }

  swn::RunConfig load() const {
    swn::RunConfig cfg;
    if (!config_path.empty()) cfg = swn::load_run_config(config_path);
    if (seed_opt->count()) {
      cfg.synth.seed = seed;
      cfg.vocab.seed = seed;
      cfg.model.seed = seed;
    }
    return cfg;
  }
};

template <class T>
void override_if(CLI::Option* opt, const T& value, T& target) {
  if (opt->count()) target = value;
}

json meta_for(const std::string& command, const swn::RunConfig& cfg, json extra = json::object()) {
  json config = cfg.to_json();
  config["command"] = command;
  for (auto& [k, v] : extra.items()) config[k] = v;
  return swn::artifact_meta(config);
}

swn::Dataset load_normalized(const std::string& path) {
  return swn::znormalize(swn::load_dataset(path));
}

// z-normalize, stratified split, optional per-class label budget on train.
std::pair<swn::Dataset, swn::Dataset> prepare_split(const std::string& path,
                                                    const swn::RunConfig& cfg,
                                                    std::size_t label_per_class) {
  auto [train, test] = swn::split(load_normalized(path), cfg.test_fraction, cfg.model.seed);
  if (label_per_class > 0) train = swn::subsample_labels(train, label_per_class, cfg.model.seed);
  return {std::move(train), std::move(test)};
}

void write_json(const std::string& path, const json& j) {
  swn::write_text_file(path, j.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"swn: shapelet-word discretization and multi-scale time series classification"};
  app.require_subcommand(1);

  // ---------------------------------------------------------------- synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic multivariate dataset");
  Common synth_common;
  synth_common.add(synth);
  std::string synth_out;
  int classes = 3;
  std::size_t channels = 2, length = 500, per_class = 100, motif = 50;
  double sigma = 0.3;
  synth->add_option("--out", synth_out, "dataset JSONL")->required();
  auto* o_classes = synth->add_option("--classes", classes);
  auto* o_channels = synth->add_option("--channels", channels);
  auto* o_length = synth->add_option("--length", length);
  auto* o_per_class = synth->add_option("--per-class", per_class);
  auto* o_sigma = synth->add_option("--sigma", sigma);
  auto* o_motif = synth->add_option("--motif", motif);

  // ------------------------------------------------------------ fit-vocab
  auto* fit = app.add_subcommand("fit-vocab", "select shapelets and cluster them into ShapeWords");
  Common fit_common;
  fit_common.add(fit);
  std::string fit_data, fit_out, fit_report;
  std::vector<std::size_t> fit_scales;
  std::size_t words = 3, top_k = 100, per_class_samples = 10;
  fit->add_option("--data", fit_data, "dataset JSONL")->required();
  fit->add_option("--out", fit_out, "vocabulary JSON")->required();
  auto* o_scales = fit->add_option("--scales", fit_scales)->delimiter(',');
  auto* o_words = fit->add_option("--words", words, "ShapeWords per (variable, scale); default: class count");
  auto* o_top_k = fit->add_option("--top-k", top_k);
  auto* o_pcs = fit->add_option("--per-class-samples", per_class_samples);
  fit->add_option("--report", fit_report, "ShapeWord vs shapelet quality JSON");

  // ----------------------------------------------------------- discretize
  auto* disc = app.add_subcommand("discretize", "turn a dataset into multi-scale ShapeSentences");
  std::string disc_data, disc_vocab, disc_out;
  std::vector<std::size_t> disc_scales;
  disc->add_option("--data", disc_data)->required();
  disc->add_option("--vocab", disc_vocab)->required();
  disc->add_option("--out", disc_out, "corpus JSONL")->required();
  disc->add_option("--scales", disc_scales, "default: every vocabulary scale")->delimiter(',');

  // ---------------------------------------------------------------- train
  auto* tr = app.add_subcommand("train", "train a classifier on a corpus");
  Common train_common;
  train_common.add(tr);
  std::string train_corpus, out_model, out_history;
  double lambda = 0.5, lr = 0.001, tau = 1.0;
  std::size_t epochs = 50, batch = 30;
  tr->add_option("--corpus", train_corpus)->required();
  tr->add_option("--out-model", out_model)->required();
  tr->add_option("--out-history", out_history);
  auto* o_lambda = tr->add_option("--lambda", lambda);
  auto* o_epochs = tr->add_option("--epochs", epochs);
  auto* o_batch = tr->add_option("--batch-size", batch);
  auto* o_lr = tr->add_option("--learning-rate", lr);
  auto* o_tau = tr->add_option("--tau", tau);

  // ------------------------------------------------------------- evaluate
  auto* ev = app.add_subcommand("evaluate", "score a trained model on a corpus");
  std::string eval_corpus, eval_model, eval_report;
  ev->add_option("--corpus", eval_corpus)->required();
  ev->add_option("--model", eval_model)->required();
  ev->add_option("--report", eval_report, "metrics JSON (stdout if omitted)");

  // --------------------------------------------------------------- ablate
  auto* ab = app.add_subcommand("ablate", "train and score full / no_cclm / no_sd on a raw dataset");
  Common ablate_common;
  ablate_common.add(ab);
  std::string ab_data, ab_out;
  std::vector<std::string> ab_variants{"full", "no_cclm", "no_sd"};
  std::size_t ab_labels = 0;
  double ab_test_fraction = 0.2;
  ab->add_option("--data", ab_data, "raw dataset JSONL")->required();
  ab->add_option("--variant", ab_variants, "full, no_cclm, no_sd")->delimiter(',');
  ab->add_option("--label-per-class", ab_labels, "keep this many training labels per class");
  auto* o_ab_tf = ab->add_option("--test-fraction", ab_test_fraction);
  ab->add_option("--out", ab_out, "comparison JSON (stdout if omitted)");

  // ---------------------------------------------------------------- sweep
  auto* sw = app.add_subcommand("sweep", "hyper-parameter sweep, one CSV row per value");
  Common sweep_common;
  sweep_common.add(sw);
  std::string sw_data, sw_param, sw_out;
  std::vector<std::string> sw_values;
  std::size_t sw_labels = 0;
  double sw_test_fraction = 0.2;
  sw->add_option("--data", sw_data, "raw dataset JSONL")->required();
  sw->add_option("--param", sw_param, "lambda, scale_count, words or word_length")->required();
  sw->add_option("--values", sw_values)->required()->delimiter(',');
  sw->add_option("--label-per-class", sw_labels);
  auto* o_sw_tf = sw->add_option("--test-fraction", sw_test_fraction);
  sw->add_option("--out", sw_out, "CSV (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*synth) {
      auto cfg = synth_common.load();
      override_if(o_classes, classes, cfg.synth.class_count);
      override_if(o_channels, channels, cfg.synth.channel_count);
      override_if(o_length, length, cfg.synth.length);
      override_if(o_per_class, per_class, cfg.synth.samples_per_class);
      override_if(o_sigma, sigma, cfg.synth.noise_sigma);
      override_if(o_motif, motif, cfg.synth.motif_length);
      const auto ds = swn::generate_synthetic(cfg.synth);
      swn::save_dataset(ds, synth_out, meta_for("synth", cfg));
    } else if (*fit) {
      auto cfg = fit_common.load();
      override_if(o_scales, fit_scales, cfg.vocab.scales);
      if (o_words->count()) {
        cfg.vocab.words_per_block = words;
        cfg.words_given = true;
      }
      override_if(o_top_k, top_k, cfg.vocab.top_k);
      override_if(o_pcs, per_class_samples, cfg.vocab.samples_per_class);
      cfg.model.scales = cfg.vocab.scales;
      const auto ds = load_normalized(fit_data);
      cfg.default_words(ds.class_count());
      const auto fitted = swn::build_vocabulary(ds, cfg.vocab);
      const json meta = meta_for("fit-vocab", cfg, {{"data", fit_data}});
      swn::save_vocabulary(fitted.vocabulary, fit_out, meta);
      if (!fit_report.empty()) {
        const auto validation =
            swn::subsample_labels(ds, cfg.vocab.samples_per_class, cfg.vocab.seed + 1);
        const json report{{"rows", swn::evaluate_vocabulary(fitted, validation).to_json()},
                          {"meta", meta}};
        write_json(fit_report, report);
      }
    } else if (*disc) {
      const auto vocab = swn::load_vocabulary(disc_vocab);
      const auto scales = disc_scales.empty() ? vocab.scales() : disc_scales;
      const auto ds = load_normalized(disc_data);
      const auto corpus = swn::mst(ds, vocab, scales);
      swn::RunConfig cfg;
      cfg.vocab.scales = scales;
      cfg.model.scales = scales;
      swn::save_corpus(corpus, disc_out,
                       meta_for("discretize", cfg,
                                {{"data", disc_data}, {"vocab", disc_vocab},
                                 {"vocab_fingerprint", vocab.fingerprint()}}));
    } else if (*tr) {
      auto cfg = train_common.load();
      override_if(o_lambda, lambda, cfg.model.lambda);
      override_if(o_epochs, epochs, cfg.model.epochs);
      override_if(o_batch, batch, cfg.model.batch_size);
      override_if(o_lr, lr, cfg.model.learning_rate);
      override_if(o_tau, tau, cfg.model.tau);
      const auto corpus = swn::load_corpus(train_corpus);
      cfg.model.scales = corpus.scales;
      cfg.vocab.scales = corpus.scales;
      const swn::ModelDims dims{corpus.channel_count, corpus.words_per_block, corpus.class_count,
                                swn::InputMode::tokens};
      const auto result = swn::train(swn::examples_from_corpus(corpus), cfg.model, dims);
      const json meta = meta_for("train", cfg, {{"corpus", train_corpus}});
      swn::save_model(result.model, corpus.vocab_fingerprint, out_model, meta);
      if (!out_history.empty()) write_json(out_history, swn::history_to_json(result.history));
    } else if (*ev) {
      const auto corpus = swn::load_corpus(eval_corpus);
      const auto loaded = swn::load_model(eval_model);
      const auto& model = loaded.model;
      if (loaded.vocab_fingerprint != corpus.vocab_fingerprint) {
        throw swn::CompatibilityError("corpus was built with vocabulary " +
                                      corpus.vocab_fingerprint + ", model expects " +
                                      loaded.vocab_fingerprint);
      }
      const swn::ModelDims want{corpus.channel_count, corpus.words_per_block, corpus.class_count,
                                swn::InputMode::tokens};
      if (!(want == model.dims()) || corpus.scales != model.config().scales) {
        throw swn::CompatibilityError("corpus shape does not match the model");
      }
      json report = swn::evaluate(model, swn::examples_from_corpus(corpus)).to_json();
      report["meta"] = swn::artifact_meta(
          {{"command", "evaluate"}, {"corpus", eval_corpus}, {"model", eval_model}});
      if (eval_report.empty()) {
        std::cout << report.dump(2) << "\n";
      } else {
        write_json(eval_report, report);
      }
    } else if (*ab) {
      auto cfg = ablate_common.load();
      override_if(o_ab_tf, ab_test_fraction, cfg.test_fraction);
      std::vector<swn::Variant> variants;
      for (const auto& v : ab_variants) variants.push_back(swn::parse_variant(v));
      const auto [train, test] = prepare_split(ab_data, cfg, ab_labels);
      cfg.default_words(train.class_count());
      json rows = json::array();
      for (auto v : variants) {
        const auto r = swn::run_variant(train, test, v, cfg.pipeline());
        rows.push_back({{"variant", swn::variant_name(v)},
                        {"acc", r.metrics.acc},
                        {"maf1", r.metrics.maf1},
                        {"metrics", r.metrics.to_json()},
                        {"history", swn::history_to_json(r.history)}});
      }
      json out{{"rows", rows},
               {"meta", meta_for("ablate", cfg, {{"data", ab_data}, {"label_per_class", ab_labels}})}};
      if (ab_out.empty()) {
        std::cout << out.dump(2) << "\n";
      } else {
        write_json(ab_out, out);
      }
    } else if (*sw) {
      auto cfg = sweep_common.load();
      override_if(o_sw_tf, sw_test_fraction, cfg.test_fraction);
      const auto [train, test] = prepare_split(sw_data, cfg, sw_labels);
      cfg.default_words(train.class_count());
      const auto csv = swn::sweep_csv(swn::run_sweep(train, test, sw_param, sw_values, cfg.pipeline()));
      if (sw_out.empty()) {
        std::cout << csv;
      } else {
        swn::write_text_file(sw_out, csv);
      }
    }
  } catch (const swn::ConfigError& e) {
    std::fprintf(stderr, "swn: %s\n", e.what());
    return kExitUsage;
  } catch (const swn::Error& e) {
    std::fprintf(stderr, "swn: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "swn: %s\n", e.what());
    return kExitData;
  }
  return 0;
}
