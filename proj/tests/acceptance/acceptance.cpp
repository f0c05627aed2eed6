// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any
// criterion fails. Every reference value comes from an oracle computed here
// (brute force, enumeration, an independent recurrence) or from a count.

#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "adling/autodiff/grad_check.hpp"
#include "adling/cli/commands.hpp"
#include "adling/corpus/chat.hpp"
#include "adling/corpus/synthetic.hpp"
#include "adling/interpret/activations.hpp"
#include "adling/interpret/kmeans.hpp"
#include "adling/interpret/patterns.hpp"
#include "adling/interpret/saliency.hpp"
#include "adling/stats/bootstrap.hpp"
#include "adling/stats/gender.hpp"
#include "adling/training/evaluation.hpp"
#include "adling/training/optimizer.hpp"
#include "adling/training/trainer.hpp"
#include "oracles.hpp"

using namespace adling;
using ad::ParamSet;
using ad::Tape;
using ad::Tensor;
using ad::Var;
using corpus::EncodedSample;
using models::Architecture;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string strf(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
std::string strf(const char* fmt, ...) {
  char buf[1024];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  return buf;
}

constexpr Architecture kArchs[] = {Architecture::cnn, Architecture::lstm, Architecture::cnn_lstm};

// ---- AC1 gradient fidelity ----------------------------------------------

Tensor away_from_zero(ad::Shape shape, Rng& rng) {
  Tensor t = testing::random_tensor(std::move(shape), rng);
  for (double& v : t.values()) v = (v < 0 ? -1.0 : 1.0) * (0.1 + std::abs(v));
  return t;
}

models::ModelConfig tiny_config(Architecture arch) {
  models::ModelConfig c = models::default_config(arch);
  c.vocab_size = 12;
  c.embed_dim = 4;
  c.max_len = 10;
  if (arch != Architecture::lstm) {
    c.filter_sizes = {2, 3};
    c.filters_per_size = 3;
  }
  c.hidden = 3;
  return c;
}

Outcome ac1_gradients() {
  Rng rng(101);
  struct Case {
    std::string name;
    bool smooth;
    ParamSet inputs;
    testing::GraphBuilder build;
  };
  std::vector<Case> cases;
  auto make = [&](std::string name, bool smooth, std::vector<std::pair<std::string, Tensor>> in,
                  testing::GraphBuilder build) {
    ParamSet p;
    for (auto& [n, t] : in) p.add(n, t);
    cases.push_back({std::move(name), smooth, std::move(p), std::move(build)});
  };
  make("embed_lookup", true, {{"t", testing::random_tensor({6, 3}, rng)}}, [](Tape&, auto& v) {
    const int ids[] = {5, 0, 5, 2};
    return ad::embed_lookup(v["t"], ids);
  });
  for (ad::Padding pad : {ad::Padding::valid, ad::Padding::same}) {
    for (std::size_t w : {1u, 2u, 3u, 4u}) {
      make(strf("conv1d[%s,w=%zu]", pad == ad::Padding::valid ? "valid" : "same", w), true,
           {{"x", testing::random_tensor({5, 3}, rng)},
            {"f", testing::random_tensor({4, w, 3}, rng)},
            {"b", testing::random_tensor({4}, rng)}},
           [pad](Tape&, auto& v) { return ad::conv1d(v["x"], v["f"], v["b"], pad); });
    }
  }
  make("conv1d_bank", true,
       {{"x", testing::random_tensor({6, 2}, rng)},
        {"f2", testing::random_tensor({3, 2, 2}, rng)},
        {"f3", testing::random_tensor({3, 3, 2}, rng)},
        {"b2", testing::random_tensor({3}, rng)},
        {"b3", testing::random_tensor({3}, rng)}},
       [](Tape&, auto& v) {
         const Var f[] = {v["f2"], v["f3"]};
         const Var b[] = {v["b2"], v["b3"]};
         return ad::concat(ad::conv1d_bank(v["x"], f, b, ad::Padding::same));
       });
  make("relu", false, {{"x", away_from_zero({4, 3}, rng)}}, [](Tape&, auto& v) { return ad::relu(v["x"]); });
  make("max_over_time", false, {{"x", testing::random_tensor({6, 4}, rng)}},
       [](Tape&, auto& v) { return ad::max_over_time(v["x"]); });
  make("concat", true, {{"a", testing::random_tensor({3}, rng)}, {"b", testing::random_tensor({2}, rng)}},
       [](Tape&, auto& v) { return ad::concat(std::vector<Var>{v["a"], v["b"], v["a"]}); });
  make("stack_rows", true, {{"a", testing::random_tensor({3}, rng)}, {"b", testing::random_tensor({3}, rng)}},
       [](Tape&, auto& v) { return ad::stack_rows(std::vector<Var>{v["a"], v["b"]}); });
  make("row", true, {{"x", testing::random_tensor({4, 3}, rng)}}, [](Tape&, auto& v) { return ad::row(v["x"], 2); });
  make("slice", true, {{"x", testing::random_tensor({7}, rng)}}, [](Tape&, auto& v) { return ad::slice(v["x"], 2, 4); });
  make("add", true, {{"a", testing::random_tensor({3, 2}, rng)}, {"b", testing::random_tensor({3, 2}, rng)}},
       [](Tape&, auto& v) { return ad::add(v["a"], v["b"]); });
  make("scale", true, {{"x", testing::random_tensor({5}, rng)}}, [](Tape&, auto& v) { return ad::scale(v["x"], -1.7); });
  make("sum", true, {{"x", testing::random_tensor({2, 3}, rng)}}, [](Tape&, auto& v) { return ad::sum(v["x"]); });
  make("pick", true, {{"x", testing::random_tensor({5}, rng)}}, [](Tape&, auto& v) { return ad::pick(v["x"], 3); });
  make("dense", true,
       {{"x", testing::random_tensor({3, 4}, rng)},
        {"w", testing::random_tensor({4, 5}, rng)},
        {"b", testing::random_tensor({5}, rng)}},
       [](Tape&, auto& v) { return ad::dense(v["x"], v["w"], v["b"]); });
  make("lstm_cell", true,
       {{"x", testing::random_tensor({4}, rng)},
        {"h", testing::random_tensor({3}, rng)},
        {"c", testing::random_tensor({3}, rng)},
        {"wx", testing::random_tensor({4, 12}, rng)},
        {"wh", testing::random_tensor({3, 12}, rng)},
        {"b", testing::random_tensor({12}, rng)}},
       [](Tape&, auto& v) {
         const ad::LstmState s = ad::lstm_cell(v["x"], v["h"], v["c"], {v["wx"], v["wh"], v["b"]});
         return ad::concat(std::vector<Var>{s.h, s.c});
       });
  make("softmax_xent", true, {{"z", testing::random_tensor({2}, rng, -3, 3)}},
       [](Tape&, auto& v) { return ad::softmax_xent(v["z"], 1).loss; });
  const Tensor mask = ad::dropout_mask({3, 4}, 0.6, rng);
  make("dropout(mask)", true, {{"x", testing::random_tensor({3, 4}, rng)}},
       [mask](Tape&, auto& v) { return ad::apply_mask(v["x"], mask); });

  bool pass = true;
  double worst_smooth = 0.0, worst_kinked = 0.0;
  std::string failures;
  for (const Case& c : cases) {
    const double err = testing::op_gradient_error(c.inputs, c.build);
    const double limit = c.smooth ? 1e-5 : 1e-4;
    (c.smooth ? worst_smooth : worst_kinked) = std::max(c.smooth ? worst_smooth : worst_kinked, err);
    if (!(err < limit)) {
      pass = false;
      failures += strf(" %s=%.2e", c.name.c_str(), err);
    }
  }

  // Full models: mean loss over a batch of four in train mode, with the
  // dropout stream reseeded per evaluation so the masks are constants.
  std::string model_errs;
  for (Architecture arch : kArchs) {
    const auto cfg = tiny_config(arch);
    std::vector<EncodedSample> batch;
    for (int i = 0; i < 4; ++i) {
      EncodedSample s;
      s.true_length = 1 + rng.below(cfg.max_len);
      for (std::size_t t = 0; t < s.true_length; ++t) s.ids.push_back(2 + static_cast<int>(rng.below(cfg.vocab_size - 2)));
      s.ids.resize(cfg.max_len, corpus::kPadId);
      s.label = rng.bernoulli(0.5) ? corpus::Label::ad : corpus::Label::control;
      batch.push_back(s);
    }
    // Weights of order one: at the initial embedding scale many gradients
    // are near 1e-9, where central differences measure only roundoff.
    ParamSet point = models::Model(cfg, 10).params();
    for (auto& [name, t] : point) t = testing::random_tensor(t.shape(), rng, -0.5, 0.5);
    const ad::Objective loss = [&](const ParamSet& p, ParamSet* grads) {
      const models::Model m(cfg, p);
      Rng drop(77);
      double total = 0.0;
      for (const auto& s : batch) {
        Tape tape;
        const auto g = m.forward(tape, s.tokens(), ad::Mode::train, &drop, grads);
        const auto x = ad::softmax_xent(g.logits, static_cast<std::size_t>(s.label));
        total += x.loss.value()[0] / 4.0;
        if (grads) tape.backward(x.loss, 0.25);
      }
      return total;
    };
    const auto r = ad::grad_check(loss, point);
    model_errs += strf(" %s=%.1e", std::string(models::to_string(arch)).c_str(), r.max_relative_error);
    if (!(r.max_relative_error < 1e-4)) {
      pass = false;
      failures += strf(" model %s worst %s[%zu]", std::string(models::to_string(arch)).c_str(),
                       r.worst_parameter.c_str(), r.worst_index);
    }
  }
  return {pass, strf("%zu primitives: smooth max %.1e (<1e-5), kinked max %.1e (<1e-4); models%s%s", cases.size(),
                     worst_smooth, worst_kinked, model_errs.c_str(), failures.c_str())};
}

// ---- AC2 majority baseline ----------------------------------------------

Outcome ac2_baseline() {
  std::vector<EncodedSample> samples(11458 + 2904);
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i].label = i < 11458 ? corpus::Label::ad : corpus::Label::control;
  const double b = training::majority_baseline(samples);
  const std::string rendered = strf("%.3f", b);
  return {rendered == "0.798", "baseline " + strf("%.6f", b) + " -> " + rendered};
}

// ---- AC3 synthetic end-to-end --------------------------------------------

// Scaled-down widths: the full-size networks do not fit the time budget on
// a single core. Filter windows, layer counts, dropout and batch sizes keep
// their defaults.
constexpr std::size_t kEmbed = 32, kFilters = 24, kHidden = 48, kEpochs = 30, kUtterances = 2000;

struct Run {
  double accuracy = 0.0;
  double baseline = 0.0;
  std::size_t best_epoch = 0;
  std::optional<models::Model> model;
  corpus::Vocabulary vocab;
  std::vector<corpus::Utterance> utterances;
  std::vector<EncodedSample> samples;
};

std::vector<corpus::Utterance> ac3_utterances(std::uint64_t seed) {
  auto c = corpus::generate_synthetic_corpus(200, seed);
  auto us = corpus::extract_utterances(c.transcripts, true);
  if (us.size() > kUtterances) us.resize(kUtterances);
  return us;
}

Run train_synthetic(Architecture arch, bool tagged, std::uint64_t seed) {
  Run run;
  run.utterances = ac3_utterances(seed);
  run.vocab = corpus::Vocabulary::build(run.utterances, corpus::kDefaultVocabularySize, tagged);
  run.samples = corpus::encode_all(run.utterances, run.vocab, tagged, corpus::default_max_len(tagged));
  const auto split = corpus::split_corpus(run.samples, {}, substream_seed(seed, "data"));
  auto cfg = models::default_config(arch);
  cfg.vocab_size = run.vocab.size();
  cfg.max_len = corpus::default_max_len(tagged);
  cfg.tagged = tagged;
  cfg.embed_dim = kEmbed;
  cfg.filters_per_size = kFilters;
  cfg.hidden = kHidden;
  training::TrainConfig tc;
  tc.batch_size = training::default_batch_size(arch);
  tc.max_epochs = kEpochs;
  tc.patience = kEpochs;
  tc.seed = seed;
  auto result = training::train(models::Model(cfg, substream_seed(seed, "init")), split, tc);
  run.accuracy = training::evaluate(result.model, split.test).accuracy;
  run.baseline = training::majority_baseline(split.test);
  run.best_epoch = result.best_epoch;
  run.model = std::move(result.model);
  return run;
}

std::optional<Run> g_tagged_seed1;  // reused by the pattern check

Outcome ac3_end_to_end() {
  const std::uint64_t seeds[] = {1, 2, 3};
  struct Variant {
    const char* name;
    Architecture arch;
    bool tagged;
  };
  const Variant variants[] = {{"CNN", Architecture::cnn, false},
                              {"CNN-LSTM", Architecture::cnn_lstm, false},
                              {"CNN-LSTM-tagged", Architecture::cnn_lstm, true}};
  std::map<std::string, std::vector<double>> acc;
  std::string detail;
  double primary_acc = 0.0, primary_base = 0.0;
  for (const auto& v : variants) {
    for (std::uint64_t seed : seeds) {
      Run r = train_synthetic(v.arch, v.tagged, seed);
      acc[v.name].push_back(r.accuracy);
      if (v.tagged && seed == 1) {
        primary_acc = r.accuracy;
        primary_base = r.baseline;
        g_tagged_seed1 = std::move(r);
      }
    }
  }
  auto median = [](std::vector<double> x) {
    std::sort(x.begin(), x.end());
    return x[x.size() / 2];
  };
  const double m_cnn = median(acc["CNN"]), m_hybrid = median(acc["CNN-LSTM"]), m_tagged = median(acc["CNN-LSTM-tagged"]);
  for (const auto& v : variants) {
    detail += strf("%s=[%.3f %.3f %.3f] ", v.name, acc[v.name][0], acc[v.name][1], acc[v.name][2]);
  }
  detail += strf("medians %.3f <= %.3f <= %.3f; seed-1 tagged %.3f vs baseline %.3f", m_cnn, m_hybrid, m_tagged,
                 primary_acc, primary_base);
  const bool pass = primary_acc >= 0.90 && primary_acc - primary_base >= 0.10 && m_cnn <= m_hybrid && m_hybrid <= m_tagged;
  return {pass, detail};
}

// ---- AC4 clipping -------------------------------------------------------

Outcome ac4_clip() {
  Rng rng(404);
  double worst_gap = 0.0, worst_excess = -1.0;
  bool pass = true;
  for (int trial = 0; trial < 1000; ++trial) {
    ParamSet g;
    const std::size_t tensors = 1 + rng.below(5);
    const double magnitude = std::pow(10.0, rng.uniform(-2.0, 2.0));
    for (std::size_t t = 0; t < tensors; ++t) {
      g.add("g" + std::to_string(t), testing::random_tensor({1 + rng.below(6), 1 + rng.below(6)}, rng, -magnitude, magnitude));
    }
    auto norm = [](const ParamSet& p) {
      long double s = 0;
      for (const auto& [n, t] : p)
        for (double v : t.values()) s += static_cast<long double>(v) * v;
      return static_cast<double>(std::sqrt(s));
    };
    const double before = norm(g);
    training::clip_global_norm(g, 2.0);
    const double after = norm(g);
    const double gap = std::abs(after - std::min(before, 2.0));
    worst_gap = std::max(worst_gap, gap);
    worst_excess = std::max(worst_excess, after - 2.0);
    if (!(after <= 2.0 + 1e-12) || !(gap <= 1e-12)) pass = false;
  }
  return {pass, strf("1000 sets: max |post - min(pre, 2)| = %.2e, max post - 2 = %.2e", worst_gap, worst_excess)};
}

// ---- AC5 Adam -----------------------------------------------------------

Outcome ac5_adam() {
  Rng rng(505);
  double worst = 0.0;
  for (int seq = 0; seq < 100; ++seq) {
    ParamSet p;
    p.add("w", testing::random_tensor({1 + rng.below(4), 1 + rng.below(4)}, rng));
    p.add("b", testing::random_tensor({1 + rng.below(5)}, rng));
    training::Adam adam(p);
    // Independent recurrence on plain vectors.
    std::map<std::string, std::vector<double>> rp, m, v;
    for (const auto& [n, t] : p) {
      rp[n].assign(t.values().begin(), t.values().end());
      m[n].assign(t.size(), 0.0);
      v[n].assign(t.size(), 0.0);
    }
    for (int step = 1; step <= 5; ++step) {
      ParamSet g = p.zeros_like();
      for (auto& [n, t] : g) t = testing::random_tensor(t.shape(), rng, -3, 3);
      adam.step(p, g);
      for (const auto& [n, t] : g) {
        for (std::size_t i = 0; i < t.size(); ++i) {
          const double gi = t.values()[i];
          m[n][i] = 0.9 * m[n][i] + 0.1 * gi;
          v[n][i] = 0.999 * v[n][i] + 0.001 * gi * gi;
          const double mh = m[n][i] / (1.0 - std::pow(0.9, step));
          const double vh = v[n][i] / (1.0 - std::pow(0.999, step));
          rp[n][i] -= 1e-4 * mh / (std::sqrt(vh) + 1e-8);
        }
      }
      for (const auto& [n, t] : p)
        for (std::size_t i = 0; i < t.size(); ++i) worst = std::max(worst, std::abs(t.values()[i] - rp[n][i]));
    }
  }
  return {worst <= 1e-12, strf("100 sequences x 5 steps: max elementwise deviation %.2e", worst)};
}

// ---- AC6 k-means --------------------------------------------------------

Outcome ac6_kmeans() {
  // Instance stream fixed before the first run and never changed.
  Rng rng(606);
  const auto seeds = interpret::restart_seeds(606, 5);
  std::size_t exact = 0, monotone = 0;
  double worst = 0.0;
  for (int instance = 0; instance < 50; ++instance) {
    const std::size_t n = 2 + rng.below(7), dim = 1 + rng.below(3);
    const Tensor x = testing::random_tensor({n, dim}, rng, -5, 5);
    const auto r = interpret::kmeans_best_of(x, {.k = 2}, seeds);
    const double optimum = testing::brute_force_two_means(x);
    // Both sides sum the same squared deviations in different orders, so
    // "equal" means equal up to that reassociation.
    const double gap = std::abs(r.inertia - optimum) / std::max(1.0, optimum);
    worst = std::max(worst, gap);
    exact += gap <= 1e-12;
    bool ok = true;
    for (std::size_t t = 1; t < r.inertia_trace.size(); ++t) ok = ok && r.inertia_trace[t] <= r.inertia_trace[t - 1];
    monotone += ok;
  }
  return {exact == 50 && monotone == 50,
          strf("optimum reached on %zu/50 (max relative gap %.1e), non-increasing trace on %zu/50", exact, worst,
               monotone)};
}

// ---- AC7 pattern discovery ----------------------------------------------

std::string render_top(const interpret::ClusterPattern& p) {
  std::string s = "[";
  for (std::size_t i = 0; i < p.top_tags.size(); ++i) {
    std::string f = strf("%.2f", p.top_tags[i].frequency);
    if (f.rfind("0.", 0) == 0) f = f.substr(1);
    s += (i ? "," : "") + ("(" + p.top_tags[i].tag + "," + f + ")");
  }
  return s + "]";
}

Outcome ac7_patterns() {
  // Constructed cluster: n 20, det 14, adj 5, adv 4 and 57 further tags
  // spread three each over 19 other categories, in 25 utterances.
  const std::vector<std::string> others = {"v",   "pro", "aux", "prep", "co",  "part", "presp", "conj", "num", "inf",
                                           "qn",  "wh",  "neg", "on",   "poss", "cop", "mod",   "int",  "fil"};
  std::vector<std::string> bag;
  auto put = [&](const std::string& tag, int n) {
    for (int i = 0; i < n; ++i) bag.push_back(tag);
  };
  put("n", 20);
  put("det", 14);
  put("adj", 5);
  put("adv", 4);
  for (const auto& t : others) put(t, 3);
  interpret::ActivationMatrix am;
  am.values = Tensor({25, 1}, 0.0);
  for (std::size_t u = 0; u < 25; ++u) {
    auto utt = std::make_shared<corpus::Utterance>();
    utt->label = corpus::Label::ad;
    std::vector<corpus::PosTag> pos;
    for (std::size_t i = u * 4; i < u * 4 + 4; ++i) {
      pos.emplace_back(bag[i]);
      utt->words.push_back("w");
    }
    utt->pos = pos;
    am.meta.push_back(utt);
  }
  interpret::KMeansResult one;
  one.assignment.assign(25, 0);
  one.centroids = Tensor({1, 1}, 0.0);
  const auto table = interpret::cluster_pos_patterns(one, am, 4);
  const std::string rendered = render_top(table.at(0));
  const bool table_ok = rendered == "[(n,.20),(det,.14),(adj,.05),(adv,.04)]";

  // Synthetic corpus: cluster the tagged CNN-LSTM activations per task.
  if (!g_tagged_seed1) g_tagged_seed1 = train_synthetic(Architecture::cnn_lstm, true, 1);
  const Run& run = *g_tagged_seed1;
  double worst_sum = 0.0;
  std::size_t clusters = 0;
  for (corpus::Task task : {corpus::Task::cookie, corpus::Task::recall, corpus::Task::other}) {
    std::vector<EncodedSample> members;
    for (const auto& s : run.samples)
      if (s.source->task == task) members.push_back(s);
    const auto acts = interpret::capture_activations(*run.model, members, "h_final");
    const auto km = interpret::kmeans_best_of(acts.values, {.k = 10}, interpret::restart_seeds(substream_seed(1, "kmeans"), 5));
    for (const auto& p : interpret::cluster_pos_patterns(km, acts)) {
      if (p.total_tags == 0) continue;
      double s = 0.0;
      for (const auto& tf : p.distribution) s += tf.frequency;
      worst_sum = std::max(worst_sum, std::abs(s - 1.0));
      ++clusters;
    }
  }
  std::map<std::string, std::size_t> pool;
  for (const auto& u : run.utterances) {
    if (u.label != corpus::Label::control || u.task != corpus::Task::cookie || !u.has_pos()) continue;
    for (const auto& t : *u.pos) ++pool[t.str()];
  }
  const auto control_cookie = interpret::pattern_from_counts(0, pool, 4);
  std::set<std::string> top;
  for (const auto& tf : control_cookie.top_tags) top.insert(tf.tag);
  const bool pool_ok = top.count("n") && top.count("det");
  return {table_ok && worst_sum <= 1e-9 && pool_ok,
          strf("constructed cluster %s; %zu synthetic clusters, max |sum - 1| = %.1e; Control/Cookie top-4 %s",
               rendered.c_str(), clusters, worst_sum, render_top(control_cookie).c_str())};
}

// ---- AC8 saliency -------------------------------------------------------

Outcome ac8_saliency() {
  Rng rng(808);
  bool pass = true;
  std::string detail;

  std::size_t zero_maps = 0, zero_bad = 0;
  for (bool tagged : {false, true}) {
    auto utts = corpus::extract_utterances(corpus::generate_synthetic_corpus(20, 8).transcripts, true);
    const auto vocab = corpus::Vocabulary::build(utts, corpus::kDefaultVocabularySize, tagged);
    const auto samples = corpus::encode_all(utts, vocab, tagged, corpus::default_max_len(tagged));
    for (Architecture arch : kArchs) {
      auto cfg = tiny_config(arch);
      cfg.vocab_size = vocab.size();
      cfg.max_len = corpus::default_max_len(tagged);
      cfg.tagged = tagged;
      models::Model m(cfg, 3);
      for (auto& [n, t] : m.params()) t = testing::random_tensor(t.shape(), rng, -0.5, 0.5);
      m.params().at("output.weight").fill(0.0);
      for (std::size_t i = 0; i < 20; ++i) {
        ++zero_maps;
        for (double v : interpret::saliency(m, samples[i], vocab).scores()) zero_bad += v != 0.0;
      }
    }
  }
  pass = pass && zero_bad == 0;
  detail += strf("zero output layer: %zu maps, %zu nonzero scores; ", zero_maps, zero_bad);

  auto utts = corpus::extract_utterances(corpus::generate_synthetic_corpus(60, 9).transcripts, true);
  const auto vocab = corpus::Vocabulary::build(utts, corpus::kDefaultVocabularySize, false);
  const auto samples = corpus::encode_all(utts, vocab, false, corpus::default_max_len(false));
  for (Architecture arch : kArchs) {
    auto cfg = tiny_config(arch);
    cfg.vocab_size = vocab.size();
    cfg.max_len = corpus::default_max_len(false);
    cfg.embed_dim = 8;
    models::Model m(cfg, 4);
    for (auto& [n, t] : m.params()) t = testing::random_tensor(t.shape(), rng, -0.5, 0.5);

    // Directional check on 100 random utterances: moving the embedding row of
    // one position by h along its normalized gradient changes the target
    // logit by h * (gradient norm) to first order.
    std::size_t checked = 0, agree = 0, zero_grad = 0;
    double worst = 0.0;
    while (checked < 100) {
      const EncodedSample& s = samples[rng.below(samples.size())];
      const auto toks = s.tokens();
      std::vector<std::size_t> unique_positions;
      for (std::size_t p = 0; p < toks.size(); ++p)
        if (std::count(toks.begin(), toks.end(), toks[p]) == 1) unique_positions.push_back(p);
      if (unique_positions.empty()) continue;  // every row feeds several positions
      const std::size_t pos = unique_positions[rng.below(unique_positions.size())];
      const auto map = interpret::saliency(m, s, vocab);
      const Tensor grad = interpret::logit_embedding_gradient(m, toks, map.target_class);
      const double norm = map.tokens[pos].score;
      const double h = 1e-4;
      // A position no max-pool selects has an exactly zero gradient; then any
      // direction must leave the logit unchanged.
      std::vector<double> dir(grad.dim(1));
      for (std::size_t j = 0; j < dir.size(); ++j) dir[j] = norm > 0 ? grad.at(pos, j) / norm : rng.uniform(-1.0, 1.0);
      if (norm == 0) {
        double len = 0;
        for (double d : dir) len += d * d;
        for (double& d : dir) d /= std::sqrt(len);
      }
      auto logit_with = [&](double sign) {
        models::Model shifted = m;
        auto row = shifted.params().at("embedding").row(static_cast<std::size_t>(toks[pos]));
        for (std::size_t j = 0; j < row.size(); ++j) row[j] += sign * h * dir[j];
        return Tensor(models::batch_logits(shifted, std::vector<EncodedSample>{s})).at(0, map.target_class);
      };
      const double change = (logit_with(1) - logit_with(-1)) / 2;
      const double rel = norm > 0 ? std::abs(change - h * norm) / (h * norm) : (std::abs(change) <= 1e-12 ? 0.0 : 1.0);
      zero_grad += norm == 0;
      worst = std::max(worst, rel);
      agree += rel <= 0.05;
      ++checked;
    }
    pass = pass && agree == checked;
    detail += strf("%s FD %zu/%zu within 5%% (worst %.1e, %zu zero-gradient positions); ",
                   std::string(models::to_string(arch)).c_str(), agree, checked, worst, zero_grad);

    if (arch != Architecture::cnn) {
      std::size_t same = 0;
      for (std::size_t i = 0; i < 100; ++i) {
        EncodedSample longer = samples[i];
        longer.ids.resize(96, corpus::kPadId);
        same += interpret::saliency(m, samples[i], vocab).scores() == interpret::saliency(m, longer, vocab).scores();
      }
      pass = pass && same == 100;
      detail += strf("PAD-extended maps identical %zu/100; ", same);
    }
  }
  return {pass, detail};
}

// ---- AC9 bootstrap ------------------------------------------------------

Outcome ac9_bootstrap() {
  Rng rng(909);
  double worst = 0.0;
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<int> a(4), b(4);
    for (int& x : a) x = static_cast<int>(rng.below(2));
    for (int& x : b) x = static_cast<int>(rng.below(2));
    const double exact = std::max(testing::bootstrap_p_exhaustive(a, b), 1.0 / stats::kDefaultResamples);
    const auto r = stats::bootstrap_diff_test(a, b, stats::kDefaultResamples, rng.next_u64());
    worst = std::max(worst, std::abs(r.p_value - exact));
  }
  std::vector<int> same(40);
  for (std::size_t i = 0; i < same.size(); ++i) same[i] = static_cast<int>(rng.below(2));
  const double p_same = stats::bootstrap_diff_test(same, same, stats::kDefaultResamples, 9).p_value;
  const std::vector<int> ones(40, 1), zeros(40, 0);
  const double p_disjoint = stats::bootstrap_diff_test(ones, zeros, stats::kDefaultResamples, 9).p_value;
  const bool pass = worst <= 0.02 && p_same == 1.0 && p_disjoint == 1.0 / stats::kDefaultResamples;
  return {pass, strf("n=4 vs enumeration: max |diff| %.4f (<= 0.02); identical p=%.4f; disjoint p=%.4g", worst, p_same,
                     p_disjoint)};
}

// ---- CLI helpers ---------------------------------------------------------

int cli(std::vector<std::string> args, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  if (out) *out = o.str();
  if (code != 0) std::fprintf(stderr, "  cli %s -> %d: %s", args[0].c_str(), code, e.str().c_str());
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Model settings small enough for repeated CLI runs.
std::vector<std::string> with_small_model(std::vector<std::string> args) {
  for (const char* kv : {"embed_dim=16", "filters_per_size=8", "hidden=16", "epochs=4", "n_resamples=2000"}) {
    args.push_back("--set");
    args.push_back(kv);
  }
  return args;
}

// ---- AC10 gender protocol -----------------------------------------------

Outcome ac10_gender() {
  Rng rng(1010);
  std::size_t ok_pools = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<EncodedSample> pool;
    const std::size_t ma = 1 + rng.below(30), mc = 1 + rng.below(30);
    const std::size_t fa = ma + rng.below(40), fc = mc + rng.below(40);
    std::size_t index = 0;
    auto add = [&](corpus::Gender g, corpus::Label l, std::size_t n) {
      for (std::size_t i = 0; i < n; ++i) {
        auto u = std::make_shared<corpus::Utterance>();
        u->transcript_id = "p";
        u->index = index++;
        u->gender = g;
        u->label = l;
        EncodedSample s;
        s.label = l;
        s.source = u;
        pool.push_back(s);
      }
    };
    add(corpus::Gender::male, corpus::Label::ad, ma);
    add(corpus::Gender::male, corpus::Label::control, mc);
    add(corpus::Gender::female, corpus::Label::ad, fa);
    add(corpus::Gender::female, corpus::Label::control, fc);
    rng.shuffle(pool);
    const auto g = stats::gender_partition_downsample(pool, rng.next_u64());
    const auto m = stats::count_classes(g.male), f = stats::count_classes(g.female);
    const double gap = std::abs(double(m.ad) / double(m.total()) - double(f.ad) / double(f.total()));
    ok_pools += g.male.size() == g.female.size() && gap <= 1.0 / double(g.male.size());
  }

  const fs::path dir = fs::temp_directory_path() / "adling_acceptance_gender";
  fs::remove_all(dir);
  std::string out;
  bool ran = cli({"synth", "--n", "100", "--seed", "7", "--out", dir.string()}) == 0;
  ran = ran && cli(with_small_model({"gender", "--out", dir.string(), "--seed", "7", "--tagged"}), &out) == 0;
  const std::string report = slurp(dir / "gender" / "report.txt");
  std::istringstream lines(report);
  std::string l1, l2, l3, l4;
  std::getline(lines, l1);
  std::getline(lines, l2);
  std::getline(lines, l3);
  std::getline(lines, l4);
  const std::regex first(
      R"(male_acc=[01]\.\d{3} female_acc=[01]\.\d{3} diff=[+-][01]\.\d{3} p=[01]\.\d{4} n_resamples=2000 seed=\d+ mode=train-per-subset)");
  const std::regex counts(
      R"(male_n=(\d+) male_ad=(\d+) male_control=(\d+) female_n=(\d+) female_ad=(\d+) female_control=(\d+) female_pool_ad=\d+ female_pool_control=\d+)");
  std::smatch m;
  const bool well_formed = std::regex_match(l1, first) && std::regex_match(l2, m, counts) && m[1] == m[4] &&
                           m[2] == m[5] && m[3] == m[6] && l3.rfind("ad_pos_male ", 0) == 0 &&
                           l4.rfind("ad_pos_female ", 0) == 0;
  return {ok_pools == 100 && ran && well_formed,
          strf("%zu/100 pools matched; gender command %s; report: %s", ok_pools, ran ? "ran" : "FAILED",
               well_formed ? l1.c_str() : "malformed")};
}

// ---- AC11 parser --------------------------------------------------------

Outcome ac11_parser() {
  const auto corpus = corpus::generate_synthetic_corpus(1000, 1111);
  Rng rng(1111);
  std::size_t round_trips = 0, misaligned_ok = 0;
  for (const auto& t : corpus.transcripts) {
    const std::string text = corpus::serialize_chat(t);
    const auto parsed = corpus::parse_chat(text, t.id);
    round_trips += parsed == t && corpus::parse_chat(corpus::serialize_chat(parsed), t.id) == parsed;

    // Drop one %mor item of a random utterance: its words must survive with
    // no tags, and require_pos must drop exactly that utterance.
    std::vector<std::string> lines;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    std::vector<std::size_t> mor_lines;
    for (std::size_t i = 0; i < lines.size(); ++i)
      if (lines[i].rfind("%mor:", 0) == 0) mor_lines.push_back(i);
    const std::size_t victim = rng.below(mor_lines.size());
    std::string& mor = lines[mor_lines[victim]];
    const auto first_space = mor.find(' ', mor.find('\t') + 1);
    mor.erase(mor.find('\t') + 1, first_space - mor.find('\t'));
    std::string broken;
    for (const auto& line : lines) broken += line + "\n";
    const auto bt = corpus::parse_chat(broken, t.id);
    const auto& u = bt.utterances.at(victim);
    const auto kept = corpus::extract_utterances(std::vector<corpus::Transcript>{bt}, true);
    bool ok = !u.has_pos() && u.words == t.utterances[victim].words && kept.size() + 1 == t.utterances.size();
    for (const auto& k : kept) ok = ok && k.index != victim;
    misaligned_ok += ok;
  }
  return {round_trips == 1000 && misaligned_ok == 1000,
          strf("round trip %zu/1000; misaligned tier kept wordwise and excluded %zu/1000", round_trips, misaligned_ok)};
}

// ---- AC12 determinism ---------------------------------------------------

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = slurp(e.path());
  }
  return files;
}

Outcome ac12_determinism() {
  const fs::path dir = fs::temp_directory_path() / "adling_acceptance_determinism";
  fs::remove_all(dir);
  if (cli({"synth", "--n", "60", "--seed", "12", "--out", dir.string()}) != 0) return {false, "synth failed"};
  const std::vector<std::vector<std::string>> runs = {
      with_small_model({"train", "--arch", "cnn_lstm", "--tagged", "--seed", "12", "--out", dir.string()}),
      {"cluster", "--k", "5", "--out", dir.string()},
      {"saliency", "--format", "html", "--limit", "8", "--out", dir.string()},
      with_small_model({"gender", "--seed", "12", "--out", dir.string()}),
  };
  const char* names[] = {"train", "cluster", "saliency", "gender"};
  std::map<std::string, std::map<std::string, std::string>> first;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (cli(runs[i]) != 0) return {false, std::string(names[i]) + " failed"};
    first[names[i]] = snapshot(dir / names[i]);
  }
  for (const char* n : names) fs::remove_all(dir / n);
  std::string detail;
  bool pass = true;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (cli(runs[i]) != 0) return {false, std::string(names[i]) + " rerun failed"};
    const auto again = snapshot(dir / names[i]);
    const bool same = again == first[names[i]];
    pass = pass && same;
    detail += strf("%s %zu files %s; ", names[i], again.size(), same ? "identical" : "DIFFER");
  }
  return {pass, detail};
}

}  // namespace

int main() {
  struct Criterion {
    const char* id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"AC1", "gradient fidelity", ac1_gradients},
      {"AC2", "majority baseline arithmetic", ac2_baseline},
      {"AC3", "synthetic end-to-end", ac3_end_to_end},
      {"AC4", "clip correctness", ac4_clip},
      {"AC5", "Adam oracle", ac5_adam},
      {"AC6", "k-means oracle", ac6_kmeans},
      {"AC7", "pattern discovery", ac7_patterns},
      {"AC8", "saliency soundness", ac8_saliency},
      {"AC9", "bootstrap oracle", ac9_bootstrap},
      {"AC10", "gender protocol", ac10_gender},
      {"AC11", "parser", ac11_parser},
      {"AC12", "determinism", ac12_determinism},
  };
  std::size_t failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("%-4s %s  %s (%.1fs): %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
