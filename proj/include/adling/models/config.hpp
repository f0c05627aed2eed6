#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace adling::models {

enum class Architecture { cnn, lstm, cnn_lstm };

std::string_view to_string(Architecture arch);
Architecture parse_architecture(std::string_view text);  // throws ConfigError

/// Hyperparameters of one architecture. Fields that do not apply to the
/// architecture are ignored (filter fields for lstm, `layers` for cnn).
struct ModelConfig {
  Architecture architecture = Architecture::cnn_lstm;
  std::size_t vocab_size = 2396;
  std::size_t max_len = 32;
  std::size_t classes = 2;
  bool tagged = false;
  std::size_t embed_dim = 300;
  std::vector<std::size_t> filter_sizes;
  std::size_t filters_per_size = 0;
  std::size_t layers = 1;
  std::size_t hidden = 0;
  // Keep probabilities (1 - dropout rate).
  double keep_prob = 1.0;
  double recurrent_keep_prob = 1.0;

  /// Throws ConfigError when an invariant fails (ascending positive filter
  /// sizes, positive counts, keep probabilities in (0, 1]).
  void validate() const;

  /// Width of the representation fed to the output layer.
  std::size_t feature_width() const;

  std::map<std::string, std::string> to_key_values() const;
  /// Starts from the architecture defaults and applies the given keys;
  /// unknown keys throw ConfigError.
  static ModelConfig from_key_values(const std::map<std::string, std::string>& kv);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Text CNN: windows [3, 4, 5] with 128 filters each, keep 0.80.
ModelConfig cnn_defaults();
/// Two stacked LSTM layers of 128 units, keep 0.70.
ModelConfig lstm_defaults();
/// Windows [3, 4, 5, 6] with 100 filters each under one 300-unit LSTM;
/// 300-dimensional embeddings; keep 0.65 both feedforward and recurrent.
ModelConfig cnn_lstm_defaults();
ModelConfig default_config(Architecture arch);

/// Recognized config keys, shared with the CLI's key=value layer.
const std::vector<std::string>& model_config_keys();

}  // namespace adling::models
