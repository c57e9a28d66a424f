#include "swn/discretize.hpp"

#include <fstream>
#include <sstream>

#include "swn/error.hpp"
#include "swn/kernels.hpp"

namespace swn {

std::vector<Series> segment(std::span<const double> channel, std::size_t length) {
  if (length < 1) throw ShapeError("segment length must be >= 1");
  if (length > channel.size()) {
    throw ShapeError("segment length " + std::to_string(length) + " exceeds series length " +
                     std::to_string(channel.size()));
  }
  const std::size_t count = channel.size() / length;
  std::vector<Series> out;
  out.reserve(count);
  for (std::size_t g = 0; g < count; ++g) {
    const auto w = channel.subspan(g * length, length);
    out.emplace_back(w.begin(), w.end());
  }
  return out;
}

int nearest_word(std::span<const double> segment, std::span<const ShapeWordEntry> block) {
  if (block.empty()) throw DomainError("empty ShapeWord block");
  int best = 0;
  double best_d = 0.0;
  bool first = true;
  for (const auto& e : block) {
    if (e.centroid.size() != segment.size()) {
      throw ShapeError("segment length " + std::to_string(segment.size()) +
                       " differs from ShapeWord length " + std::to_string(e.centroid.size()));
    }
    double d = 0.0;
    for (std::size_t j = 0; j < segment.size(); ++j) {
      const double diff = segment[j] - e.centroid[j];
      d += diff * diff;
    }
    if (first || d < best_d || (d == best_d && e.token < best)) {
      best = e.token;
      best_d = d;
      first = false;
    }
  }
  return best;
}

namespace {

void check_compatible(const Dataset& ds, const Vocabulary& vocab, std::size_t scale) {
  if (!vocab.has_scale(scale)) {
    throw ConfigError("scale " + std::to_string(scale) + " is not in the vocabulary");
  }
  if (ds.channel_count() != vocab.channel_count()) {
    throw CompatibilityError("dataset has " + std::to_string(ds.channel_count()) +
                             " channels, vocabulary " + std::to_string(vocab.channel_count()));
  }
  if (scale > ds.length()) {
    throw ShapeError("scale " + std::to_string(scale) + " exceeds series length " +
                     std::to_string(ds.length()));
  }
}

// Row-major token rows via the packed centroid matrix; entries in a block are
// ordered by token, so the smallest-index tie rule equals smallest token.
TokenRows tokenize(const Sample& sample, const Vocabulary& vocab, std::size_t scale) {
  TokenRows rows(sample.channel_count());
  for (std::size_t v = 0; v < sample.channel_count(); ++v) {
    const auto centroids = vocab.block_centroids(v, scale);
    const std::span<const double> ch = sample.channels[v];
    const std::size_t count = ch.size() / scale;
    rows[v].resize(count);
    for (std::size_t g = 0; g < count; ++g) {
      rows[v][g] = static_cast<int>(
          kernels::nearest_row(ch.subspan(g * scale, scale), centroids, scale));
    }
  }
  return rows;
}

}  // namespace

ShapeSentence discretize_sample(const Sample& sample, const Vocabulary& vocab,
                                std::size_t scale) {
  if (!vocab.has_scale(scale)) {
    throw ConfigError("scale " + std::to_string(scale) + " is not in the vocabulary");
  }
  if (sample.channel_count() != vocab.channel_count()) {
    throw ShapeError("sample channel count differs from vocabulary");
  }
  if (scale > sample.length()) throw ShapeError("scale exceeds series length");
  return {scale, sample.id, sample.label, tokenize(sample, vocab, scale)};
}

MultiScaleCorpus mst(const Dataset& ds, const Vocabulary& vocab,
                     const std::vector<std::size_t>& scales, Exec exec) {
  if (scales.empty()) throw ConfigError("mst needs at least one scale");
  for (auto l : scales) check_compatible(ds, vocab, l);

  MultiScaleCorpus corpus;
  corpus.scales = scales;
  corpus.vocab_fingerprint = vocab.fingerprint();
  corpus.class_count = ds.class_count();
  corpus.channel_count = ds.channel_count();
  corpus.words_per_block = vocab.words_per_block();
  corpus.samples.resize(ds.size());

  const auto count = static_cast<std::ptrdiff_t>(ds.size());
  const bool par = exec == Exec::parallel;
#pragma omp parallel for schedule(static) if (par)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    const auto& s = ds[static_cast<std::size_t>(i)];
    auto& out = corpus.samples[static_cast<std::size_t>(i)];
    out.id = s.id;
    out.label = s.label;
    out.sentences.reserve(scales.size());
    for (auto l : scales) out.sentences.push_back(tokenize(s, vocab, l));
  }
  return corpus;
}

void save_corpus(const MultiScaleCorpus& corpus, const std::filesystem::path& path,
                 const json& meta) {
  std::ostringstream out;
  json header{{"vocab_fingerprint", corpus.vocab_fingerprint},
              {"scales", corpus.scales},
              {"class_count", corpus.class_count},
              {"channel_count", corpus.channel_count},
              {"words_per_block", corpus.words_per_block}};
  if (!meta.is_null()) header["meta"] = meta;
  out << header.dump() << '\n';
  for (const auto& s : corpus.samples) {
    json by_scale = json::object();
    for (std::size_t u = 0; u < corpus.scales.size(); ++u) {
      by_scale[std::to_string(corpus.scales[u])] = s.sentences[u];
    }
    out << json{{"id", s.id}, {"label", s.label}, {"scales", std::move(by_scale)}}.dump() << '\n';
  }
  write_text_file(path, out.str());
}

MultiScaleCorpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open corpus " + path.string());
  MultiScaleCorpus corpus;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json rec = json::parse(line);
      if (!have_header) {
        corpus.vocab_fingerprint = rec.at("vocab_fingerprint").get<std::string>();
        corpus.scales = rec.at("scales").get<std::vector<std::size_t>>();
        corpus.class_count = rec.at("class_count").get<int>();
        corpus.channel_count = rec.at("channel_count").get<std::size_t>();
        corpus.words_per_block = rec.at("words_per_block").get<std::size_t>();
        have_header = true;
        continue;
      }
      CorpusSample s;
      s.id = rec.at("id").get<std::string>();
      s.label = rec.at("label").get<int>();
      const auto& by_scale = rec.at("scales");
      for (auto l : corpus.scales) {
        auto rows = by_scale.at(std::to_string(l)).get<TokenRows>();
        if (rows.size() != corpus.channel_count) {
          throw ShapeError("line " + std::to_string(line_no) + ": wrong number of token rows");
        }
        s.sentences.push_back(std::move(rows));
      }
      corpus.samples.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw ParseError("corpus line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw ParseError("corpus " + path.string() + " has no header");
  return corpus;
}

}  // namespace swn
