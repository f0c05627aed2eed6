#include "adling/models/config.hpp"

#include <sstream>

#include "adling/error.hpp"

namespace adling::models {
namespace {

std::size_t parse_size(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size() || v < 0) throw std::invalid_argument("bad");
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' expects a nonnegative integer, got '" + text + "'");
  }
}

double parse_real(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("bad");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' expects a real number, got '" + text + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("key '" + key + "' expects true/false, got '" + text + "'");
}

std::string format_real(double v) {
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

}  // namespace

std::string_view to_string(Architecture arch) {
  switch (arch) {
    case Architecture::cnn: return "cnn";
    case Architecture::lstm: return "lstm";
    case Architecture::cnn_lstm: return "cnn_lstm";
  }
  return "cnn";
}

Architecture parse_architecture(std::string_view text) {
  if (text == "cnn") return Architecture::cnn;
  if (text == "lstm") return Architecture::lstm;
  if (text == "cnn_lstm") return Architecture::cnn_lstm;
  throw ConfigError("unknown architecture '" + std::string(text) + "' (expected cnn, lstm or cnn_lstm)");
}

ModelConfig cnn_defaults() {
  ModelConfig c;
  c.architecture = Architecture::cnn;
  c.filter_sizes = {3, 4, 5};
  c.filters_per_size = 128;
  c.keep_prob = 0.80;
  return c;
}

ModelConfig lstm_defaults() {
  ModelConfig c;
  c.architecture = Architecture::lstm;
  c.layers = 2;
  c.hidden = 128;
  c.keep_prob = 0.70;
  return c;
}

ModelConfig cnn_lstm_defaults() {
  ModelConfig c;
  c.architecture = Architecture::cnn_lstm;
  c.filter_sizes = {3, 4, 5, 6};
  c.filters_per_size = 100;
  c.layers = 1;
  c.hidden = 300;
  c.keep_prob = 0.65;
  c.recurrent_keep_prob = 0.65;
  return c;
}

ModelConfig default_config(Architecture arch) {
  switch (arch) {
    case Architecture::cnn: return cnn_defaults();
    case Architecture::lstm: return lstm_defaults();
    case Architecture::cnn_lstm: return cnn_lstm_defaults();
  }
  return cnn_defaults();
}

void ModelConfig::validate() const {
  if (vocab_size < 3) throw ConfigError("vocab_size must be at least 3");
  if (max_len == 0) throw ConfigError("max_len must be positive");
  if (classes < 2) throw ConfigError("classes must be at least 2");
  if (embed_dim == 0) throw ConfigError("embed_dim must be positive");
  if (!(keep_prob > 0.0 && keep_prob <= 1.0)) throw ConfigError("keep_prob must lie in (0, 1]");
  if (!(recurrent_keep_prob > 0.0 && recurrent_keep_prob <= 1.0)) {
    throw ConfigError("recurrent_keep_prob must lie in (0, 1]");
  }
  if (architecture != Architecture::lstm) {
    if (filter_sizes.empty()) throw ConfigError("filter_sizes must not be empty");
    for (std::size_t i = 0; i < filter_sizes.size(); ++i) {
      if (filter_sizes[i] == 0 || (i > 0 && filter_sizes[i] <= filter_sizes[i - 1])) {
        throw ConfigError("filter_sizes must be positive and strictly ascending");
      }
    }
    if (filters_per_size == 0) throw ConfigError("filters_per_size must be positive");
  }
  if (architecture != Architecture::cnn) {
    if (layers == 0) throw ConfigError("layers must be at least 1");
    if (hidden == 0) throw ConfigError("hidden must be positive");
  }
}

std::size_t ModelConfig::feature_width() const {
  return architecture == Architecture::cnn ? filter_sizes.size() * filters_per_size : hidden;
}

const std::vector<std::string>& model_config_keys() {
  static const std::vector<std::string> keys = {
      "arch",   "vocab_size", "max_len",   "classes",   "tagged",
      "embed_dim", "filter_sizes", "filters_per_size", "layers", "hidden",
      "keep_prob", "recurrent_keep_prob"};
  return keys;
}

std::map<std::string, std::string> ModelConfig::to_key_values() const {
  std::map<std::string, std::string> kv;
  kv["arch"] = std::string(to_string(architecture));
  kv["vocab_size"] = std::to_string(vocab_size);
  kv["max_len"] = std::to_string(max_len);
  kv["classes"] = std::to_string(classes);
  kv["tagged"] = tagged ? "true" : "false";
  kv["embed_dim"] = std::to_string(embed_dim);
  std::string sizes;
  for (std::size_t i = 0; i < filter_sizes.size(); ++i) sizes += (i ? "," : "") + std::to_string(filter_sizes[i]);
  kv["filter_sizes"] = sizes;
  kv["filters_per_size"] = std::to_string(filters_per_size);
  kv["layers"] = std::to_string(layers);
  kv["hidden"] = std::to_string(hidden);
  kv["keep_prob"] = format_real(keep_prob);
  kv["recurrent_keep_prob"] = format_real(recurrent_keep_prob);
  return kv;
}

ModelConfig ModelConfig::from_key_values(const std::map<std::string, std::string>& kv) {
  ModelConfig c = default_config(kv.count("arch") ? parse_architecture(kv.at("arch")) : Architecture::cnn_lstm);
  for (const auto& [key, value] : kv) {
    if (key == "arch") continue;
    if (key == "vocab_size") c.vocab_size = parse_size(key, value);
    else if (key == "max_len") c.max_len = parse_size(key, value);
    else if (key == "classes") c.classes = parse_size(key, value);
    else if (key == "tagged") c.tagged = parse_bool(key, value);
    else if (key == "embed_dim") c.embed_dim = parse_size(key, value);
    else if (key == "filters_per_size") c.filters_per_size = parse_size(key, value);
    else if (key == "layers") c.layers = parse_size(key, value);
    else if (key == "hidden") c.hidden = parse_size(key, value);
    else if (key == "keep_prob") c.keep_prob = parse_real(key, value);
    else if (key == "recurrent_keep_prob") c.recurrent_keep_prob = parse_real(key, value);
    else if (key == "filter_sizes") {
      c.filter_sizes.clear();
      std::stringstream in(value);
      std::string item;
      while (std::getline(in, item, ',')) {
        if (!item.empty()) c.filter_sizes.push_back(parse_size(key, item));
      }
    } else {
      throw ConfigError("unknown model key '" + key + "'");
    }
  }
  return c;
}

}  // namespace adling::models
