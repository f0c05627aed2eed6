#include <cmath>
#include <numeric>

#include "adling/error.hpp"
#include "adling/training/evaluation.hpp"
#include "adling/training/optimizer.hpp"
#include "adling/training/trainer.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace adling;
using namespace adling::training;
using adling::ad::ParamSet;
using adling::ad::Tensor;
using adling::corpus::EncodedSample;
using adling::corpus::Label;

namespace {

EncodedSample sample(std::vector<int> tokens, Label label, std::size_t max_len = 8) {
  EncodedSample s;
  s.true_length = tokens.size();
  s.ids = std::move(tokens);
  s.ids.resize(max_len, corpus::kPadId);
  s.label = label;
  auto u = std::make_shared<corpus::Utterance>();
  u->words.assign(s.true_length, "w");
  u->label = label;
  s.source = u;
  return s;
}

// Two disjoint token inventories: ids 2..6 for Control, 7..11 for AD.
std::vector<EncodedSample> separable(std::size_t n, Rng& rng) {
  std::vector<EncodedSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    const Label label = i % 2 ? Label::ad : Label::control;
    std::vector<int> toks(2 + rng.below(5));
    for (int& t : toks) t = (label == Label::ad ? 7 : 2) + static_cast<int>(rng.below(5));
    out.push_back(sample(toks, label));
  }
  return out;
}

models::ModelConfig toy_config(models::Architecture arch) {
  models::ModelConfig c = models::default_config(arch);
  c.vocab_size = 12;
  c.max_len = 8;
  c.embed_dim = 8;
  c.filter_sizes = {2, 3};
  c.filters_per_size = 4;
  c.hidden = 6;
  return c;
}

// Textbook Adam on one scalar, written out independently of Adam::step.
struct ReferenceAdam {
  double m = 0, v = 0, b1t = 1, b2t = 1;
  double step(double p, double g) {
    b1t *= 0.9;
    b2t *= 0.999;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    return p - 1e-4 * (m / (1 - b1t)) / (std::sqrt(v / (1 - b2t)) + 1e-8);
  }
};

}  // namespace

TEST_SUITE("clip_global_norm") {
  TEST_CASE("norm 5 clipped to 2") {
    ParamSet g;
    g.add("a", Tensor::vector({3, 4}));
    CHECK(clip_global_norm(g, 2.0) == 5.0);
    CHECK(g.at("a")[0] == doctest::Approx(1.2).epsilon(1e-15));
    CHECK(g.at("a")[1] == doctest::Approx(1.6).epsilon(1e-15));
  }

  TEST_CASE("small norm is untouched") {
    ParamSet g;
    g.add("a", Tensor::vector({0.6, 0.8}));
    const ParamSet before = g;
    clip_global_norm(g, 2.0);
    CHECK(g == before);
  }

  TEST_CASE("recomputed norm equals min(original, clip) over random sets") {
    Rng rng(1);
    for (int trial = 0; trial < 200; ++trial) {
      ParamSet g;
      const double scale = std::pow(10.0, rng.uniform(-2, 2));
      for (int k = 0; k < 3; ++k) g.add("p" + std::to_string(k), testing::random_tensor({1 + rng.below(6), 3}, rng, -scale, scale));
      double sq = 0;
      for (auto& [n, t] : g)
        for (double x : t.values()) sq += x * x;
      const double original = std::sqrt(sq);
      clip_global_norm(g, 2.0);
      sq = 0;
      for (auto& [n, t] : g)
        for (double x : t.values()) sq += x * x;
      CHECK(std::abs(std::sqrt(sq) - std::min(original, 2.0)) <= 1e-12);
    }
  }

  TEST_CASE("non-finite entries are a numeric error naming the parameter") {
    ParamSet g;
    g.add("bad.weight", Tensor::vector({1, std::nan("")}));
    try {
      clip_global_norm(g, 2.0);
      FAIL("expected a numeric error");
    } catch (const NumericError& e) {
      CHECK(std::string(e.what()).find("bad.weight") != std::string::npos);
    }
  }
}

TEST_SUITE("adam") {
  TEST_CASE("first step with unit gradient moves by lr / (1 + eps)") {
    ParamSet p, g;
    p.add("x", Tensor::vector({0.0}));
    g.add("x", Tensor::vector({1.0}));
    Adam adam(p);
    adam.step(p, g);
    CHECK(std::abs(-p.at("x")[0] - 1e-4 / (1 + 1e-8)) <= 1e-18);
    CHECK(adam.steps() == 1);
  }

  TEST_CASE("zero gradient with fresh state is a no-op") {
    ParamSet p;
    p.add("x", Tensor::vector({0.5, -2}));
    const ParamSet before = p;
    Adam adam(p);
    adam.step(p, p.zeros_like());
    CHECK(p == before);
  }

  TEST_CASE("matches the reference recurrence") {
    Rng rng(2);
    for (int seq = 0; seq < 100; ++seq) {
      ParamSet p, g;
      p.add("x", Tensor::vector({rng.uniform(-1, 1)}));
      g.add("x", Tensor::vector({0}));
      Adam adam(p);
      ReferenceAdam ref;
      double expected = p.at("x")[0];
      for (int t = 0; t < 5; ++t) {
        const double grad = rng.uniform(-3, 3);
        g.at("x")[0] = grad;
        adam.step(p, g);
        expected = ref.step(expected, grad);
        CHECK(std::abs(p.at("x")[0] - expected) <= 1e-15);
      }
    }
  }

  TEST_CASE("shape mismatch is a shape error") {
    ParamSet p, g;
    p.add("x", Tensor::vector({0}));
    g.add("x", Tensor::vector({0, 1}));
    Adam adam(p);
    CHECK_THROWS_AS(adam.step(p, g), ShapeError);
  }
}

TEST_SUITE("evaluate") {
  TEST_CASE("majority baseline") {
    CHECK(std::round(majority_baseline(11458, 14362) * 1000) / 1000 == 0.798);
    CHECK(majority_baseline(5, 10) == 0.5);
    CHECK(majority_baseline(0, 7) == 1.0);
    CHECK_THROWS_AS(majority_baseline(0, 0), PreconditionError);
  }

  TEST_CASE("perfect and constant predictors") {
    std::vector<EncodedSample> s;
    for (int i = 0; i < 1000; ++i) s.push_back(sample({2}, i < 798 ? Label::ad : Label::control));
    std::vector<std::size_t> truth, always_ad(1000, 1);
    for (auto& x : s) truth.push_back(static_cast<std::size_t>(x.label));
    const EvalReport perfect = score_predictions(s, truth);
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.confusion[0][1] == 0);
    CHECK(perfect.confusion[1][0] == 0);
    CHECK(score_predictions(s, always_ad).accuracy == 0.798);
  }

  TEST_CASE("accuracy equals the recounted confusion trace") {
    Rng rng(3);
    std::vector<EncodedSample> s;
    std::vector<std::size_t> pred;
    for (int i = 0; i < 500; ++i) {
      s.push_back(sample({2}, rng.bernoulli(0.6) ? Label::ad : Label::control));
      pred.push_back(rng.below(2));
    }
    const EvalReport r = score_predictions(s, pred);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < s.size(); ++i) correct += pred[i] == static_cast<std::size_t>(s[i].label);
    CHECK(r.accuracy == static_cast<double>(correct) / 500.0);
    CHECK(r.total() == 500);
  }

  TEST_CASE("empty sets are rejected") {
    CHECK_THROWS_AS(score_predictions({}, {}), PreconditionError);
  }
}

TEST_SUITE("error_report") {
  std::pair<std::vector<EncodedSample>, EvalReport> fixture(Rng & rng) {
    std::vector<EncodedSample> s;
    std::vector<std::size_t> pred;
    for (int i = 0; i < 300; ++i) {
      std::vector<int> toks(1 + rng.below(6), 2);
      s.push_back(sample(toks, rng.bernoulli(0.5) ? Label::ad : Label::control));
      pred.push_back(rng.below(2));
    }
    return {s, score_predictions(s, pred)};
  }

  TEST_CASE("full fraction covers every misclassified control sample") {
    Rng rng(4);
    auto [s, eval] = fixture(rng);
    const ErrorReport r = error_report(s, eval, 1.0, 9);
    CHECK(r.qualifying == eval.confusion[0][1]);
    CHECK(r.sampled.size() == r.qualifying);
  }

  TEST_CASE("short fraction equals a recount of the sampled listing") {
    Rng rng(5);
    auto [s, eval] = fixture(rng);
    const ErrorReport r = error_report(s, eval, 0.1, 9);
    CHECK(r.sampled.size() == static_cast<std::size_t>(std::ceil(0.1 * r.qualifying)));
    std::size_t short_count = 0;
    for (const ErrorCase& c : r.sampled) {
      CHECK(c.utterance->label == Label::control);
      short_count += c.utterance->words.size() <= 3;
    }
    CHECK(r.short_fraction == static_cast<double>(short_count) / r.sampled.size());
  }

  TEST_CASE("all two-token errors give short fraction one; no errors give an empty report") {
    std::vector<EncodedSample> s{sample({2, 3}, Label::control), sample({2, 3}, Label::control),
                                 sample({2, 3, 4, 5}, Label::ad)};
    CHECK(error_report(s, score_predictions(s, {1, 1, 0}), 1.0, 1).short_fraction == 1.0);
    const ErrorReport none = error_report(s, score_predictions(s, {0, 0, 1}), 1.0, 1);
    CHECK(none.qualifying == 0);
    CHECK(none.sampled.empty());
    CHECK_THROWS_AS(error_report(s, score_predictions(s, {0, 0, 1}), 0.0, 1), ConfigError);
  }
}

TEST_SUITE("train") {
  TEST_CASE("separable toy set reaches full dev accuracy within 20 epochs") {
    for (auto arch : {models::Architecture::cnn, models::Architecture::lstm, models::Architecture::cnn_lstm}) {
      Rng rng(6);
      corpus::CorpusSplit split;
      split.train = separable(200, rng);
      split.dev = separable(40, rng);
      TrainConfig cfg;
      cfg.batch_size = default_batch_size(arch);
      cfg.max_epochs = 20;
      cfg.patience = 20;
      cfg.adam.lr = 1e-2;
      const TrainResult r = train(models::Model(toy_config(arch), 1), split, cfg);
      INFO(models::to_string(arch));
      double best = 0;
      for (auto& e : r.history) best = std::max(best, e.dev_accuracy);
      CHECK(best == 1.0);
      CHECK(evaluate(r.model, split.dev).accuracy == best);
      CHECK(evaluate(r.model, split.train).accuracy >= majority_baseline(split.train));
    }
  }

  TEST_CASE("patience zero runs exactly one epoch") {
    Rng rng(7);
    corpus::CorpusSplit split;
    split.train = separable(20, rng);
    split.dev = separable(6, rng);
    TrainConfig cfg;
    cfg.patience = 0;
    const TrainResult r = train(models::Model(toy_config(models::Architecture::lstm), 1), split, cfg);
    CHECK(r.history.size() == 1);
    CHECK(r.best_epoch == 1);
  }

  TEST_CASE("same seed gives identical history and parameters") {
    Rng rng(8);
    corpus::CorpusSplit split;
    split.train = separable(40, rng);
    split.dev = separable(10, rng);
    TrainConfig cfg;
    cfg.max_epochs = 3;
    cfg.seed = 42;
    const auto a = train(models::Model(toy_config(models::Architecture::cnn_lstm), 1), split, cfg);
    const auto b = train(models::Model(toy_config(models::Architecture::cnn_lstm), 1), split, cfg);
    CHECK(format_history(a.history) == format_history(b.history));
    CHECK(a.model.params() == b.model.params());
  }

  TEST_CASE("empty training set is rejected") {
    corpus::CorpusSplit split;
    CHECK_THROWS_AS(train(models::Model(toy_config(models::Architecture::cnn), 1), split, {}), PreconditionError);
  }
}
