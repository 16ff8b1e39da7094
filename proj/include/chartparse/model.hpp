#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "chartparse/autodiff.hpp"
#include "chartparse/decoders.hpp"
#include "chartparse/encoder.hpp"
#include "chartparse/treebank.hpp"
#include "chartparse/vocab.hpp"

namespace chartparse {

inline constexpr const char* kModelMagic = "CHARTPARSE1";
inline constexpr int kModelFormatVersion = 1;

struct ModelConfig {
  EncoderDims dims;
  HistoryConfig history;
  DecoderKind decoder = DecoderKind::InOrder;  // the decoder the model is trained with

  bool operator==(const ModelConfig& o) const;
};

/// Flat key/value view used by the model header and the config files.
std::map<std::string, std::string> model_settings(const ModelConfig& config);
/// Returns false when `key` is not a model setting; throws std::invalid_argument on a bad value.
bool apply_model_setting(ModelConfig& config, const std::string& key, const std::string& value);

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vocabulary, parameters and the modules bound to them.
class Model {
 public:
  Model(const ModelConfig& config, Vocab vocab, std::uint64_t seed);
  Model(Model&&) = default;
  Model& operator=(Model&&) = default;

  /// Throws ModelError on bad magic, version mismatch or truncated data.
  static Model load(const std::string& path);
  void save(const std::string& path) const;

  const ModelConfig& config() const { return config_; }
  const Vocab& vocab() const { return vocab_; }
  const std::vector<std::string>& labels() const { return vocab_.labels.items(); }
  ad::ParamStore& params() { return store_; }
  const ad::ParamStore& params() const { return store_; }
  const Encoder& encoder() const { return encoder_; }
  const Scorer& scorer() const { return scorer_; }
  const HistoryTracker* tracker() const { return tracker_ ? &*tracker_ : nullptr; }

  /// Greedy or CKY decode in evaluation mode. Safe to call concurrently.
  BinaryTree decode(const std::vector<std::string>& words, const std::vector<std::string>& tags, DecoderKind decoder,
                    DecodeStats* stats = nullptr) const;
  Tree parse(const std::vector<Leaf>& leaves, DecoderKind decoder, DecodeStats* stats = nullptr) const;
  Tree parse(const std::vector<Leaf>& leaves) const { return parse(leaves, config_.decoder); }

 private:
  Model(const ModelConfig& config, Vocab vocab, ad::ParamStore store);
  void bind();

  ModelConfig config_;
  Vocab vocab_;
  ad::ParamStore store_;
  Encoder encoder_;
  Scorer scorer_;
  std::optional<HistoryTracker> tracker_;
};

}  // namespace chartparse
