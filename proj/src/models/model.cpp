#include "adling/models/model.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "adling/error.hpp"

namespace adling::models {
namespace {

using ad::Tensor;
using ad::Var;

Tensor uniform_tensor(ad::Shape shape, double limit, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(-limit, limit);
  return t;
}

double glorot_limit(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

std::string conv_name(std::size_t window) { return "conv" + std::to_string(window); }
std::string lstm_name(std::size_t layer) { return "lstm" + std::to_string(layer); }

ad::ParamSet initial_params(const ModelConfig& c, std::uint64_t seed) {
  Rng rng(seed);
  ad::ParamSet p;
  p.add("embedding", uniform_tensor({c.vocab_size, c.embed_dim}, 0.05, rng));
  if (c.architecture != Architecture::lstm) {
    for (std::size_t w : c.filter_sizes) {
      p.add(conv_name(w) + ".filters",
            uniform_tensor({c.filters_per_size, w, c.embed_dim},
                           glorot_limit(w * c.embed_dim, c.filters_per_size), rng));
      p.add(conv_name(w) + ".bias", Tensor({c.filters_per_size}, 0.0));
    }
  }
  if (c.architecture != Architecture::cnn) {
    const std::size_t layers = c.architecture == Architecture::lstm ? c.layers : 1;
    std::size_t input = c.architecture == Architecture::lstm ? c.embed_dim
                                                             : c.filter_sizes.size() * c.filters_per_size;
    for (std::size_t l = 0; l < layers; ++l) {
      const std::size_t gates = 4 * c.hidden;
      p.add(lstm_name(l) + ".input", uniform_tensor({input, gates}, glorot_limit(input, gates), rng));
      p.add(lstm_name(l) + ".recurrent", uniform_tensor({c.hidden, gates}, glorot_limit(c.hidden, gates), rng));
      Tensor bias({gates}, 0.0);
      for (std::size_t k = c.hidden; k < 2 * c.hidden; ++k) bias[k] = 1.0;
      p.add(lstm_name(l) + ".bias", std::move(bias));
      input = c.hidden;
    }
  }
  const std::size_t features = c.feature_width();
  p.add("output.weight", uniform_tensor({features, c.classes}, glorot_limit(features, c.classes), rng));
  p.add("output.bias", Tensor({c.classes}, 0.0));
  return p;
}

}  // namespace

Model::Model(ModelConfig config, std::uint64_t init_seed) : config_(std::move(config)) {
  config_.validate();
  params_ = initial_params(config_, init_seed);
}

Model::Model(ModelConfig config, ad::ParamSet params) : config_(std::move(config)), params_(std::move(params)) {
  config_.validate();
  const ad::ParamSet expected = initial_params(config_, 0);
  if (expected.names() != params_.names()) throw ShapeError("checkpoint parameters do not match the model config");
  for (const auto& [name, t] : expected) {
    if (params_.at(name).shape() != t.shape()) {
      throw ShapeError("parameter '" + name + "' has shape " + ad::shape_string(params_.at(name).shape()) +
                       ", expected " + ad::shape_string(t.shape()));
    }
  }
}

std::vector<std::string> Model::probe_names() const {
  std::vector<std::string> names = {"embed"};
  if (config_.architecture != Architecture::lstm) {
    for (std::size_t w : config_.filter_sizes) names.push_back(conv_name(w));
  }
  if (config_.architecture == Architecture::cnn) names.push_back("pooled");
  else names.push_back("h_final");
  names.push_back("pre_softmax");
  return names;
}

std::size_t Model::probe_width(const std::string& name) const {
  if (name == "embed") return config_.embed_dim;
  if (name == "pre_softmax") return config_.classes;
  if (name == "pooled" && config_.architecture == Architecture::cnn) return config_.feature_width();
  if (name == "h_final" && config_.architecture != Architecture::cnn) return config_.hidden;
  if (config_.architecture != Architecture::lstm) {
    for (std::size_t w : config_.filter_sizes) {
      if (name == conv_name(w)) return config_.filters_per_size;
    }
  }
  std::string valid;
  for (const auto& n : probe_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw LookupError("unknown probe '" + name + "' for " + std::string(to_string(config_.architecture)) +
                    "; valid probes: " + valid);
}

Var Model::bind(ad::Tape& tape, const std::string& name, ad::ParamSet* grads) const {
  return tape.parameter(params_.at(name), grads ? &grads->at(name) : nullptr);
}

std::vector<Var> Model::conv_features(ad::Tape& tape, Var embedded, ad::Padding padding, ad::ParamSet* grads,
                                      SampleGraph& graph) const {
  std::vector<Var> maps;
  for (std::size_t w : config_.filter_sizes) {
    const Var map = ad::relu(ad::conv1d(embedded, bind(tape, conv_name(w) + ".filters", grads),
                                        bind(tape, conv_name(w) + ".bias", grads), padding));
    maps.push_back(map);
    graph.probes[conv_name(w)] = ad::max_over_time(map);
  }
  return maps;
}

std::vector<Var> Model::run_lstm(ad::Tape& tape, Var sequence, std::size_t layer, const Tensor* recurrent_mask,
                                 ad::ParamSet* grads) const {
  const std::string prefix = lstm_name(layer);
  const ad::LstmWeights weights{bind(tape, prefix + ".input", grads), bind(tape, prefix + ".recurrent", grads),
                                bind(tape, prefix + ".bias", grads)};
  const std::size_t steps = sequence.value().dim(0);
  ad::LstmState state{tape.input(Tensor({config_.hidden}, 0.0)), tape.input(Tensor({config_.hidden}, 0.0))};
  std::vector<Var> outputs;
  outputs.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    Var h_in = state.h;
    if (recurrent_mask && t > 0) h_in = ad::apply_mask(h_in, *recurrent_mask);
    state = ad::lstm_cell(ad::row(sequence, t), h_in, state.c, weights);
    outputs.push_back(state.h);
  }
  return outputs;
}

SampleGraph Model::forward(ad::Tape& tape, std::span<const int> tokens, ad::Mode mode, Rng* dropout_rng,
                           ad::ParamSet* grads, bool embed_gradient) const {
  if (mode == ad::Mode::train && !dropout_rng) throw UsageError("train-mode forward needs a dropout generator");
  std::vector<int> ids(tokens.begin(), tokens.end());
  if (ids.empty()) ids.push_back(corpus::kPadId);
  if (config_.architecture == Architecture::cnn && ids.size() < config_.filter_sizes.back()) {
    ids.resize(config_.filter_sizes.back(), corpus::kPadId);
  }

  SampleGraph graph;
  graph.embed = ad::embed_lookup(bind(tape, "embedding", grads), ids);
  if (embed_gradient && !grads) graph.embed = tape.input(graph.embed.value(), true);
  {
    const Tensor& e = graph.embed.value();
    Tensor mean({config_.embed_dim}, 0.0);
    for (std::size_t t = 0; t < e.dim(0); ++t) {
      for (std::size_t j = 0; j < e.dim(1); ++j) mean[j] += e.at(t, j);
    }
    mean.scale(1.0 / static_cast<double>(e.dim(0)));
    graph.probes["embed"] = tape.input(std::move(mean));
  }

  Var features;
  switch (config_.architecture) {
    case Architecture::cnn: {
      conv_features(tape, graph.embed, ad::Padding::valid, grads, graph);
      std::vector<Var> pooled;
      for (std::size_t w : config_.filter_sizes) pooled.push_back(graph.probes.at(conv_name(w)));
      features = ad::concat(pooled);
      graph.probes["pooled"] = features;
      break;
    }
    case Architecture::lstm: {
      Var sequence = graph.embed;
      for (std::size_t l = 0; l < config_.layers; ++l) {
        std::vector<Var> outputs = run_lstm(tape, sequence, l, nullptr, grads);
        features = outputs.back();
        if (l + 1 < config_.layers) sequence = ad::stack_rows(outputs);
      }
      graph.probes["h_final"] = features;
      break;
    }
    case Architecture::cnn_lstm: {
      const std::vector<Var> maps = conv_features(tape, graph.embed, ad::Padding::same, grads, graph);
      const Var sequence = ad::concat(maps);
      std::optional<Tensor> mask;
      if (mode == ad::Mode::train && config_.recurrent_keep_prob < 1.0) {
        mask = ad::dropout_mask({config_.hidden}, config_.recurrent_keep_prob, *dropout_rng);
      }
      features = run_lstm(tape, sequence, 0, mask ? &*mask : nullptr, grads).back();
      graph.probes["h_final"] = features;
      break;
    }
  }

  if (mode == ad::Mode::train) features = ad::dropout(features, config_.keep_prob, mode, *dropout_rng);
  graph.logits = ad::dense(features, bind(tape, "output.weight", grads), bind(tape, "output.bias", grads));
  graph.probes["pre_softmax"] = graph.logits;
  return graph;
}

std::size_t predicted_class(std::span<const double> logits) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = i;
  }
  return best;
}

ad::Tensor batch_logits(const Model& model, std::span<const corpus::EncodedSample> batch) {
  if (batch.empty()) throw PreconditionError("empty batch");
  const std::size_t classes = model.config().classes;
  Tensor out({batch.size(), classes});
  for (std::size_t i = 0; i < batch.size(); ++i) {
    ad::Tape tape;
    const SampleGraph g = model.forward(tape, batch[i].tokens(), ad::Mode::eval, nullptr);
    std::copy_n(g.logits.value().data(), classes, out.row(i).data());
  }
  return out;
}

ad::Tensor batch_probabilities(const Model& model, std::span<const corpus::EncodedSample> batch) {
  Tensor logits = batch_logits(model, batch);
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    auto row = logits.row(i);
    const std::vector<double> p = ad::softmax(row);
    std::copy(p.begin(), p.end(), row.begin());
  }
  return logits;
}

ad::Tensor probe_activations(const Model& model, std::span<const corpus::EncodedSample> batch,
                             const std::string& probe) {
  const std::size_t width = model.probe_width(probe);
  if (batch.empty()) throw PreconditionError("empty batch");
  Tensor out({batch.size(), width});
  for (std::size_t i = 0; i < batch.size(); ++i) {
    ad::Tape tape;
    const SampleGraph g = model.forward(tape, batch[i].tokens(), ad::Mode::eval, nullptr);
    const Tensor& v = g.probes.at(probe).value();
    std::copy_n(v.data(), width, out.row(i).data());
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& dir, const Model& model, const corpus::Vocabulary& vocab) {
  std::filesystem::create_directories(dir);
  ad::save_params(dir / "model.bin", model.params());
  {
    std::ofstream cfg(dir / "model.cfg");
    if (!cfg) throw PreconditionError("cannot write " + (dir / "model.cfg").string());
    for (const auto& [key, value] : model.config().to_key_values()) cfg << key << '=' << value << '\n';
    cfg << "vocab_hash=" << vocab.fingerprint() << '\n';
  }
  std::ofstream voc(dir / "vocab.txt");
  if (!voc) throw PreconditionError("cannot write " + (dir / "vocab.txt").string());
  for (const auto& token : vocab.tokens()) voc << token << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  std::ifstream cfg(dir / "model.cfg");
  if (!cfg) throw PreconditionError("no checkpoint config at " + (dir / "model.cfg").string());
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(cfg, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError(line_no, "model.cfg line without '='");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  const std::string hash = kv.count("vocab_hash") ? kv.at("vocab_hash") : "";
  kv.erase("vocab_hash");

  std::ifstream voc(dir / "vocab.txt");
  if (!voc) throw PreconditionError("no vocabulary at " + (dir / "vocab.txt").string());
  std::vector<std::string> tokens;
  while (std::getline(voc, line)) tokens.push_back(line);
  corpus::Vocabulary vocab = corpus::Vocabulary::from_tokens(std::move(tokens));
  if (hash != std::to_string(vocab.fingerprint())) {
    throw FormatError(0, "vocabulary fingerprint does not match model.cfg");
  }
  Model model(ModelConfig::from_key_values(kv), ad::load_params(dir / "model.bin"));
  return {std::move(model), std::move(vocab)};
}

}  // namespace adling::models
