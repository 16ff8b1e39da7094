#include "chartparse/model.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace chartparse {

static_assert(std::endian::native == std::endian::little, "model files store little-endian doubles");

using json = nlohmann::json;

bool ModelConfig::operator==(const ModelConfig& o) const { return model_settings(*this) == model_settings(o); }

namespace {

std::string flag(bool b) { return b ? "true" : "false"; }

bool parse_flag(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument(key + ": expected true or false, got '" + v + "'");
}

int parse_positive(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  int x = 0;
  try {
    x = std::stoi(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty() || x < 1) throw std::invalid_argument(key + ": expected a positive integer, got '" + v + "'");
  return x;
}

}  // namespace

std::map<std::string, std::string> model_settings(const ModelConfig& c) {
  return {
      {"decoder", to_string(c.decoder)},
      {"word_dim", std::to_string(c.dims.word_dim)},
      {"tag_dim", std::to_string(c.dims.tag_dim)},
      {"char_dim", std::to_string(c.dims.char_dim)},
      {"char_hidden", std::to_string(c.dims.char_hidden)},
      {"lstm_dim", std::to_string(c.dims.lstm_dim)},
      {"mlp_dim", std::to_string(c.dims.mlp_dim)},
      {"history", to_string(c.history.kind)},
      {"history_hidden", std::to_string(c.history.hidden)},
      {"history_label_dim", std::to_string(c.history.label_dim)},
      {"history_input_label", flag(c.history.input_label)},
      {"history_input_span", flag(c.history.input_span)},
      {"history_predict_label", flag(c.history.predict_label)},
      {"history_predict_span", flag(c.history.predict_span)},
  };
}

bool apply_model_setting(ModelConfig& c, const std::string& key, const std::string& v) {
  if (key == "decoder") c.decoder = parse_decoder_kind(v);
  else if (key == "word_dim") c.dims.word_dim = parse_positive(key, v);
  else if (key == "tag_dim") c.dims.tag_dim = parse_positive(key, v);
  else if (key == "char_dim") c.dims.char_dim = parse_positive(key, v);
  else if (key == "char_hidden") c.dims.char_hidden = parse_positive(key, v);
  else if (key == "lstm_dim") c.dims.lstm_dim = parse_positive(key, v);
  else if (key == "mlp_dim") c.dims.mlp_dim = parse_positive(key, v);
  else if (key == "history") c.history.kind = parse_history_kind(v);
  else if (key == "history_hidden") c.history.hidden = parse_positive(key, v);
  else if (key == "history_label_dim") c.history.label_dim = parse_positive(key, v);
  else if (key == "history_input_label") c.history.input_label = parse_flag(key, v);
  else if (key == "history_input_span") c.history.input_span = parse_flag(key, v);
  else if (key == "history_predict_label") c.history.predict_label = parse_flag(key, v);
  else if (key == "history_predict_span") c.history.predict_span = parse_flag(key, v);
  else return false;
  return true;
}

Model::Model(const ModelConfig& config, Vocab vocab, std::uint64_t seed) : config_(config), vocab_(std::move(vocab)) {
  validate_decoder(config_.decoder, config_.history.kind);
  std::mt19937_64 rng(seed);
  Encoder::declare(store_, config_.dims, vocab_, rng);
  const int span_dim = 2 * config_.dims.lstm_dim;
  const int hist = config_.history.hidden;
  Scorer::declare(store_, span_dim + (config_.history.feeds_label() ? hist : 0),
                  span_dim + (config_.history.feeds_span() ? hist : 0), config_.dims.mlp_dim, vocab_.labels.size(),
                  rng);
  HistoryTracker::declare(store_, config_.history, span_dim, vocab_.labels.size(), rng);
  bind();
}

Model::Model(const ModelConfig& config, Vocab vocab, ad::ParamStore store)
    : config_(config), vocab_(std::move(vocab)), store_(std::move(store)) {
  bind();
}

void Model::bind() {
  encoder_ = Encoder(store_, config_.dims);
  scorer_ = Scorer(store_);
  if (scorer_.num_labels() != vocab_.labels.size()) throw ModelError("label head does not match the label vocabulary");
  if (config_.history.enabled()) tracker_.emplace(store_, config_.history);
  else tracker_.reset();
}

BinaryTree Model::decode(const std::vector<std::string>& words, const std::vector<std::string>& tags,
                         DecoderKind decoder, DecodeStats* stats) const {
  validate_decoder(decoder, config_.history.kind);
  ad::Graph g;
  const SentenceEncoding enc = encoder_.encode(g, vocab_, words, tags);
  SentenceScorer source(g, enc, scorer_, tracker(), labels());
  switch (decoder) {
    case DecoderKind::Cky: return decode_cky(source, stats);
    case DecoderKind::TopDown: return decode_topdown(source, stats);
    case DecoderKind::InOrder: return decode_inorder(source, stats);
  }
  throw std::logic_error("unknown decoder");
}

Tree Model::parse(const std::vector<Leaf>& leaves, DecoderKind decoder, DecodeStats* stats) const {
  std::vector<std::string> words, tags;
  for (const Leaf& l : leaves) {
    words.push_back(l.word);
    tags.push_back(l.tag);
  }
  return unbinarize(decode(words, tags, decoder, stats), leaves);
}

// ---------------------------------------------------------------------------
// File layout: magic line, 8-byte header length, JSON header, raw doubles.

namespace {

json index_json(const Index& index) { return index.items(); }

Index index_from(const json& j) {
  Index out;
  for (const auto& item : j) {
    const std::string s = item.get<std::string>();
    if (out.add(s) != out.size() - 1) throw ModelError("duplicate vocabulary entry '" + s + "'");
  }
  return out;
}

}  // namespace

void Model::save(const std::string& path) const {
  json header;
  header["format_version"] = kModelFormatVersion;
  json cfg = json::object();
  for (const auto& [k, v] : model_settings(config_)) cfg[k] = v;
  header["config"] = cfg;
  header["vocab"] = {{"words", index_json(vocab_.words)},
                     {"word_counts", vocab_.word_counts},
                     {"chars", index_json(vocab_.chars)},
                     {"tags", index_json(vocab_.tags)},
                     {"labels", index_json(vocab_.labels)}};
  json tensors = json::array();
  std::size_t offset = 0;
  for (const ad::Parameter* p : store_.parameters()) {
    tensors.push_back({{"name", p->name}, {"shape", p->value.shape()}, {"offset", offset}});
    offset += p->value.size();
  }
  header["tensors"] = tensors;
  header["total"] = offset;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError("cannot write model file " + path);
  const std::string text = header.dump();
  const std::uint64_t len = text.size();
  out << kModelMagic << '\n';
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const ad::Parameter* p : store_.parameters()) {
    const auto data = p->value.data();
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double)));
  }
  if (!out) throw ModelError("error writing model file " + path);
}

Model Model::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open model file " + path);
  std::string magic;
  std::getline(in, magic);
  if (magic != kModelMagic) throw ModelError(path + ": not a chartparse model (bad magic)");
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in || len > (1ull << 32)) throw ModelError(path + ": truncated header");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw ModelError(path + ": truncated header");

  try {
    const json header = json::parse(text);
    const int version = header.at("format_version").get<int>();
    if (version != kModelFormatVersion)
      throw ModelError(path + ": model format version " + std::to_string(version) + " is not supported (expected " +
                       std::to_string(kModelFormatVersion) + ")");
    ModelConfig config;
    for (const auto& [k, v] : header.at("config").items())
      if (!apply_model_setting(config, k, v.get<std::string>())) throw ModelError("unknown model setting '" + k + "'");

    Vocab vocab;
    const json& jv = header.at("vocab");
    vocab.words = index_from(jv.at("words"));
    vocab.word_counts = jv.at("word_counts").get<std::vector<int>>();
    vocab.chars = index_from(jv.at("chars"));
    vocab.tags = index_from(jv.at("tags"));
    vocab.labels = index_from(jv.at("labels"));
    if (vocab.word_counts.size() != static_cast<std::size_t>(vocab.words.size()))
      throw ModelError("word counts do not match the word vocabulary");

    ad::ParamStore store;
    std::size_t expected = 0;
    for (const auto& t : header.at("tensors")) {
      const auto shape = t.at("shape").get<ad::Shape>();
      if (t.at("offset").get<std::size_t>() != expected) throw ModelError("tensor offsets are not contiguous");
      ad::Tensor value(shape, 0.0);
      auto data = value.data();
      in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double)));
      if (!in) throw ModelError(path + ": truncated tensor data");
      if (!value.all_finite()) throw ModelError(path + ": non-finite value in " + t.at("name").get<std::string>());
      expected += value.size();
      store.add(t.at("name").get<std::string>(), std::move(value));
    }
    return Model(config, std::move(vocab), std::move(store));
  } catch (const ModelError&) {
    throw;
  } catch (const std::exception& e) {
    throw ModelError(path + ": malformed model header: " + e.what());
  }
}

}  // namespace chartparse
