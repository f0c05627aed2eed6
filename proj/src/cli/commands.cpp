#include "adling/cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "adling/corpus/chat.hpp"
#include "adling/corpus/dataset.hpp"
#include "adling/corpus/synthetic.hpp"
#include "adling/error.hpp"
#include "adling/interpret/activations.hpp"
#include "adling/interpret/heatmap.hpp"
#include "adling/interpret/kmeans.hpp"
#include "adling/interpret/patterns.hpp"
#include "adling/interpret/saliency.hpp"
#include "adling/models/model.hpp"
#include "adling/random.hpp"
#include "adling/stats/bootstrap.hpp"
#include "adling/stats/gender.hpp"
#include "adling/training/evaluation.hpp"
#include "adling/training/trainer.hpp"

namespace adling::cli {
namespace {

namespace fs = std::filesystem;
using corpus::EncodedSample;

std::string strf(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
std::string strf(const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, args);
  va_end(args);
  return buf;
}

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw PreconditionError("cannot write " + path.string());
}

std::string sample_id(const corpus::Utterance& u) { return u.transcript_id + "_" + std::to_string(u.index); }

// Holds the lock on <out>/<command>/ and echoes the resolved config there.
struct Workspace {
  fs::path dir;
  std::unique_ptr<DirectoryLock> lock;
};

Workspace open_workspace(const RunConfig& cfg, const std::string& command) {
  Workspace ws;
  ws.dir = cfg.get_path("out") / command;
  ws.lock = std::make_unique<DirectoryLock>(ws.dir);
  write_file(ws.dir / "config.resolved", cfg.resolved_text());
  return ws;
}

std::uint64_t stream(const RunConfig& cfg, std::string_view name) {
  return substream_seed(cfg.get_seed("seed"), name);
}

// ---- data --------------------------------------------------------------

const char* const kDataKeys[] = {"corpus",      "seed",      "require_pos", "utterance_limit", "vocab_size",
                                 "split_unit",  "train_ratio", "dev_ratio", "test_ratio"};

std::vector<corpus::Utterance> load_utterances(const RunConfig& cfg) {
  const auto transcripts = corpus::load_corpus_dir(cfg.get_path("corpus"));
  if (transcripts.empty()) throw PreconditionError("no *.cha files in " + cfg.get("corpus"));
  auto utterances = corpus::extract_utterances(transcripts, cfg.get_bool("require_pos"));
  const std::size_t limit = cfg.get_size("utterance_limit");
  if (limit > 0 && utterances.size() > limit) utterances.resize(limit);
  if (utterances.empty()) throw PreconditionError("corpus " + cfg.get("corpus") + " has no usable utterances");
  return utterances;
}

corpus::CorpusSplit make_split(const RunConfig& cfg, std::vector<EncodedSample> samples) {
  const corpus::SplitRatios ratios{cfg.get_real("train_ratio"), cfg.get_real("dev_ratio"), cfg.get_real("test_ratio")};
  const auto unit = cfg.get("split_unit") == "transcript" ? corpus::SplitUnit::transcript : corpus::SplitUnit::utterance;
  return corpus::split_corpus(std::move(samples), ratios, stream(cfg, "data"), unit);
}

models::ModelConfig model_config(const RunConfig& cfg, std::size_t vocab_size) {
  std::map<std::string, std::string> kv;
  for (const auto& key : models::model_config_keys()) {
    if (key == "vocab_size" || key == "classes") continue;
    if (key == "filter_sizes" && cfg.get(key) == "none") continue;
    kv[key] = cfg.get(key);
  }
  kv["vocab_size"] = std::to_string(vocab_size);
  auto mc = models::ModelConfig::from_key_values(kv);
  mc.validate();
  return mc;
}

training::TrainConfig train_config(const RunConfig& cfg) {
  training::TrainConfig tc;
  tc.batch_size = cfg.get_size("batch_size");
  tc.clip_norm = cfg.get_real("clip_norm");
  tc.max_epochs = cfg.get_size("epochs");
  tc.patience = cfg.get_size("patience");
  tc.seed = cfg.get_seed("seed");
  tc.adam.lr = cfg.get_real("lr");
  tc.validate();
  return tc;
}

training::TrainResult fit(const RunConfig& cfg, const corpus::CorpusSplit& split, std::size_t vocab_size,
                          std::ostream& log) {
  models::Model model(model_config(cfg, vocab_size), stream(cfg, "init"));
  return training::train(std::move(model), split, train_config(cfg), [&](const training::EpochRecord& r) {
    log << strf("epoch %zu train_loss=%.6f dev_accuracy=%.4f\n", r.epoch, r.train_loss, r.dev_accuracy);
  });
}

// Commands that consume a checkpoint take the model and data settings it was
// trained under, so the split they rebuild is the one the model saw.
models::Checkpoint adopt_checkpoint(RunConfig& cfg) {
  cfg.resolve_paths();
  const fs::path dir = cfg.get_path("checkpoint");
  if (!fs::is_directory(dir)) {
    throw PreconditionError("checkpoint " + dir.string() + " not found (run train first or set --checkpoint)");
  }
  auto ck = models::load_checkpoint(dir);
  const auto kv = ck.model.config().to_key_values();
  for (const char* key : {"arch", "tagged", "max_len", "embed_dim", "filter_sizes", "filters_per_size", "layers",
                          "hidden", "keep_prob", "recurrent_keep_prob"}) {
    std::string value = kv.at(key);
    if (value.empty()) value = "none";
    cfg.set(key, value);
  }
  if (fs::exists(dir / "data.cfg")) {
    RunConfig data;
    data.load_file(dir / "data.cfg");
    for (const char* key : kDataKeys) cfg.adopt(key, data.get(key));
  }
  cfg.resolve();
  return ck;
}

std::vector<EncodedSample> encode_for(const RunConfig& cfg, const models::Checkpoint& ck) {
  const auto utterances = load_utterances(cfg);
  const auto& mc = ck.model.config();
  return corpus::encode_all(utterances, ck.vocabulary, mc.tagged, mc.max_len);
}

const std::vector<EncodedSample>& pick_subset(const corpus::CorpusSplit& split, const std::string& name,
                                              const std::vector<EncodedSample>& all) {
  if (name == "train") return split.train;
  if (name == "dev") return split.dev;
  if (name == "test") return split.test;
  return all;
}

// ---- synth -------------------------------------------------------------

void cmd_synth(RunConfig cfg, std::ostream& out) {
  cfg.resolve();
  auto ws = open_workspace(cfg, "synth");
  corpus::SyntheticOptions opts;
  opts.ad_fraction = cfg.get_real("ad_fraction");
  opts.female_fraction = cfg.get_real("female_fraction");
  opts.min_utterances = cfg.get_size("min_utterances");
  opts.max_utterances = cfg.get_size("max_utterances");
  if (!(opts.ad_fraction >= 0.0 && opts.ad_fraction <= 1.0)) throw ConfigError("ad_fraction must lie in [0, 1]");
  if (!(opts.female_fraction >= 0.0 && opts.female_fraction <= 1.0)) {
    throw ConfigError("female_fraction must lie in [0, 1]");
  }
  const auto synthetic = corpus::generate_synthetic_corpus(cfg.get_size("n"), stream(cfg, "synth"), opts);
  const fs::path dir = cfg.get_path("corpus");
  corpus::write_corpus_dir(dir, synthetic.transcripts);

  std::string families = "transcript_id,index,family\n";
  for (const auto& t : synthetic.transcripts) {
    for (const auto& u : t.utterances) {
      families += u.transcript_id + "," + std::to_string(u.index) + "," +
                  std::string(corpus::to_string(synthetic.family_of(u))) + "\n";
    }
  }
  write_file(ws.dir / "families.csv", families);
  out << "wrote " << synthetic.transcripts.size() << " transcripts to " << dir.string() << "\n";
}

// ---- ingest ------------------------------------------------------------

void cmd_ingest(RunConfig cfg, std::ostream& out) {
  cfg.resolve();
  auto ws = open_workspace(cfg, "ingest");
  const auto transcripts = corpus::load_corpus_dir(cfg.get_path("corpus"));
  if (transcripts.empty()) throw PreconditionError("no *.cha files in " + cfg.get("corpus"));

  std::size_t ad = 0;
  std::map<std::string, std::size_t> by_class, by_gender, by_task;
  std::size_t utterances = 0, with_pos = 0, words = 0, tagged_words = 0;
  for (const auto& t : transcripts) {
    if (t.diagnosis == corpus::Label::ad) ++ad;
    for (const auto& u : t.utterances) {
      ++utterances;
      ++by_class[std::string(corpus::to_string(u.label))];
      ++by_gender[std::string(corpus::to_string(u.gender))];
      ++by_task[std::string(corpus::to_string(u.task))];
      words += u.words.size();
      if (u.has_pos()) {
        ++with_pos;
        tagged_words += u.words.size();
      }
    }
  }
  auto counts = [](const char* name, std::map<std::string, std::size_t>& m, std::initializer_list<const char*> keys) {
    std::string line = name;
    for (const char* k : keys) line += strf(" %s=%zu", k, m[k]);
    return line + "\n";
  };
  std::string report;
  report += strf("transcripts=%zu ad=%zu control=%zu\n", transcripts.size(), ad, transcripts.size() - ad);
  report += strf("utterances=%zu with_pos=%zu pos_coverage=%.4f word_pos_coverage=%.4f\n", utterances, with_pos,
                 utterances ? double(with_pos) / double(utterances) : 0.0,
                 words ? double(tagged_words) / double(words) : 0.0);
  report += counts("class", by_class, {"AD", "Control"});
  report += counts("gender", by_gender, {"male", "female", "unknown"});
  report += counts("task", by_task, {"Cookie", "Recall", "Other"});
  write_file(ws.dir / "stats.txt", report);
  out << report;
}

// ---- train -------------------------------------------------------------

void cmd_train(RunConfig cfg, std::ostream& out) {
  cfg.resolve();
  auto ws = open_workspace(cfg, "train");
  const auto utterances = load_utterances(cfg);
  const bool tagged = cfg.get_bool("tagged");
  const auto vocab = corpus::Vocabulary::build(utterances, cfg.get_size("vocab_size"), tagged);
  const auto split = make_split(cfg, corpus::encode_all(utterances, vocab, tagged, cfg.get_size("max_len")));

  std::ostringstream log;
  auto result = fit(cfg, split, vocab.size(), log);
  out << log.str();

  models::save_checkpoint(ws.dir / "checkpoint", result.model, vocab);
  std::string data;
  for (const char* key : kDataKeys) data += std::string(key) + "=" + cfg.get(key) + "\n";
  write_file(ws.dir / "checkpoint" / "data.cfg", data);
  write_file(ws.dir / "history.csv", training::format_history(result.history));

  const double dev_acc = result.history.at(result.best_epoch - 1).dev_accuracy;
  std::string summary = strf("arch=%s tagged=%s train=%zu dev=%zu test=%zu best_epoch=%zu dev_accuracy=%.4f",
                             cfg.get("arch").c_str(), tagged ? "true" : "false", split.train.size(),
                             split.dev.size(), split.test.size(), result.best_epoch, dev_acc);
  if (!split.test.empty()) {
    summary += strf(" test_accuracy=%.4f majority_baseline=%.4f",
                    training::evaluate(result.model, split.test).accuracy, training::majority_baseline(split.test));
  }
  summary += "\n";
  write_file(ws.dir / "summary.txt", summary);
  out << summary;
}

// ---- eval --------------------------------------------------------------

void cmd_eval(RunConfig cfg, std::ostream& out) {
  const auto ck = adopt_checkpoint(cfg);
  auto ws = open_workspace(cfg, "eval");
  const auto all = encode_for(cfg, ck);
  const auto split = make_split(cfg, all);
  const auto& samples = pick_subset(split, cfg.get("eval_split"), all);
  if (samples.empty()) throw InsufficientDataError("the " + cfg.get("eval_split") + " subset is empty");

  const auto report = training::evaluate(ck.model, samples);
  std::string predictions = "transcript_id,index,label,predicted\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& u = *samples[i].source;
    predictions += u.transcript_id + "," + std::to_string(u.index) + "," + std::string(corpus::to_string(u.label)) +
                   "," + std::string(corpus::to_string(static_cast<corpus::Label>(report.predictions[i]))) + "\n";
  }
  write_file(ws.dir / "predictions.csv", predictions);

  std::string text = strf("split=%s majority_baseline=%.4f\n", cfg.get("eval_split").c_str(),
                          training::majority_baseline(samples));
  text += training::format_eval_report(report);
  write_file(ws.dir / "eval.txt", text);
  out << text;

  const double frac = cfg.get_real("error_frac");
  if (frac > 0.0) {
    const auto errors = training::error_report(samples, report, frac, stream(cfg, "errors"),
                                               cfg.get_size("short_threshold"));
    const std::string listing = training::format_error_report(errors);
    write_file(ws.dir / "errors.txt", listing);
    out << listing.substr(0, listing.find('\n') + 1);
  }
}

// ---- cluster -----------------------------------------------------------

void cmd_cluster(RunConfig cfg, std::ostream& out) {
  const auto ck = adopt_checkpoint(cfg);
  auto ws = open_workspace(cfg, "cluster");
  const auto all = encode_for(cfg, ck);

  std::vector<std::pair<std::string, std::vector<EncodedSample>>> groups;
  const std::string task = cfg.get("task");
  if (task == "all") {
    groups.emplace_back("all", all);
  } else {
    for (const char* name : {"Cookie", "Recall", "Other"}) {
      if (task != "per-task" && task != name) continue;
      std::vector<EncodedSample> members;
      for (const auto& s : all) {
        if (corpus::to_string(s.source->task) == name) members.push_back(s);
      }
      groups.emplace_back(name, std::move(members));
    }
  }

  interpret::KMeansOptions opts;
  opts.k = cfg.get_size("k");
  opts.max_iter = cfg.get_size("max_iter");
  const std::string probe = cfg.get("probe");
  ck.model.probe_width(probe);  // unknown probe names fail before any work

  std::string report, assignments = "task,transcript_id,index,label,cluster\n";
  std::size_t clustered = 0;
  for (const auto& [name, members] : groups) {
    if (members.size() < std::max<std::size_t>(opts.k, 1)) {
      report += strf("# task=%s rows=%zu skipped (fewer rows than k=%zu)\n\n", name.c_str(), members.size(), opts.k);
      continue;
    }
    const auto am = interpret::capture_activations(ck.model, members, probe);
    const auto seeds = interpret::restart_seeds(substream_seed(stream(cfg, "kmeans"), name), cfg.get_size("restarts"));
    const auto result = interpret::kmeans_best_of(am.values, opts, seeds);
    const auto patterns = interpret::cluster_pos_patterns(result, am, cfg.get_size("top_k"));
    report += strf("# task=%s rows=%zu k=%zu probe=%s inertia=%.6f\n", name.c_str(), am.rows(), opts.k,
                   probe.c_str(), result.inertia);
    report += interpret::format_cluster_report(patterns) + "\n";
    for (std::size_t i = 0; i < am.rows(); ++i) {
      const auto& u = *am.meta[i];
      assignments += name + "," + u.transcript_id + "," + std::to_string(u.index) + "," +
                     std::string(corpus::to_string(u.label)) + "," + std::to_string(result.assignment[i]) + "\n";
    }
    ++clustered;
  }
  if (clustered == 0) throw InsufficientDataError("no task group has at least k=" + std::to_string(opts.k) + " rows");
  write_file(ws.dir / "clusters.txt", report);
  write_file(ws.dir / "assignments.csv", assignments);
  out << report;
}

// ---- saliency ----------------------------------------------------------

void cmd_saliency(RunConfig cfg, std::ostream& out) {
  const auto ck = adopt_checkpoint(cfg);
  auto ws = open_workspace(cfg, "saliency");
  const auto format = interpret::parse_heatmap_format(cfg.get("format"));
  const auto kind = interpret::parse_score_kind(cfg.get("score"));
  const auto target = interpret::parse_saliency_target(cfg.get("target"));
  const auto all = encode_for(cfg, ck);

  std::vector<const EncodedSample*> chosen;
  std::vector<EncodedSample> test;
  if (cfg.get("ids").empty()) {
    test = make_split(cfg, all).test;
    for (std::size_t i = 0; i < test.size() && i < cfg.get_size("limit"); ++i) chosen.push_back(&test[i]);
  } else {
    std::map<std::string, const EncodedSample*> by_id;
    for (const auto& s : all) by_id[sample_id(*s.source)] = &s;
    std::stringstream in(cfg.get("ids"));
    std::string id;
    while (std::getline(in, id, ',')) {
      if (id.empty()) continue;
      const auto it = by_id.find(id);
      if (it == by_id.end()) throw LookupError("no retained utterance with id '" + id + "'");
      chosen.push_back(it->second);
    }
  }
  if (chosen.empty()) throw InsufficientDataError("no utterances selected for saliency");

  std::string scores = "id\tposition\ttoken\tscore\n";
  for (const EncodedSample* s : chosen) {
    const auto map = interpret::saliency(ck.model, *s, ck.vocabulary, kind, target);
    write_file(ws.dir / interpret::heatmap_filename(map, format), interpret::render_heatmap(map, format));
    for (std::size_t i = 0; i < map.tokens.size(); ++i) {
      scores += strf("%s\t%zu\t%s\t%.9g\n", sample_id(*s->source).c_str(), i, map.tokens[i].token.c_str(),
                     map.tokens[i].score);
    }
  }
  write_file(ws.dir / "scores.tsv", scores);
  out << "wrote " << chosen.size() << " heatmaps to " << ws.dir.string() << "\n";
}

// ---- gender ------------------------------------------------------------

std::vector<int> correctness(const models::Model& model, const std::vector<EncodedSample>& samples) {
  const auto report = training::evaluate(model, samples);
  std::vector<int> correct(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    correct[i] = report.predictions[i] == static_cast<std::size_t>(samples[i].label) ? 1 : 0;
  }
  return correct;
}

std::string ad_pos_line(const char* name, const std::vector<EncodedSample>& samples, std::size_t top) {
  std::map<std::string, std::size_t> counts;
  for (const auto& s : samples) {
    if (s.label != corpus::Label::ad || !s.source->has_pos()) continue;
    for (const auto& tag : *s.source->pos) ++counts[tag.str()];
  }
  std::string line = name;
  if (counts.empty()) return line + " none\n";
  for (const auto& tf : interpret::pattern_from_counts(0, counts, top).top_tags) {
    line += strf(" %s:%.4f", tf.tag.c_str(), tf.frequency);
  }
  return line + "\n";
}

void cmd_gender(RunConfig cfg, std::ostream& out) {
  const std::string mode = cfg.get("mode");
  std::unique_ptr<models::Checkpoint> ck;
  if (mode == "eval-shared") {
    ck = std::make_unique<models::Checkpoint>(adopt_checkpoint(cfg));
  } else {
    cfg.resolve();
  }
  auto ws = open_workspace(cfg, "gender");

  stats::GenderSubsets subsets;
  std::vector<int> male_correct, female_correct;
  std::string log;
  if (ck) {
    // The shared model is scored on the eval_split subset (test by default).
    const auto all = encode_for(cfg, *ck);
    const auto split = make_split(cfg, all);
    subsets = stats::gender_partition_downsample(pick_subset(split, cfg.get("eval_split"), all),
                                                 stream(cfg, "downsample"));
    male_correct = correctness(ck->model, subsets.male);
    female_correct = correctness(ck->model, subsets.female);
  } else {
    const auto utterances = load_utterances(cfg);
    const bool tagged = cfg.get_bool("tagged");
    const auto vocab = corpus::Vocabulary::build(utterances, cfg.get_size("vocab_size"), tagged);
    const auto samples = corpus::encode_all(utterances, vocab, tagged, cfg.get_size("max_len"));
    subsets = stats::gender_partition_downsample(samples, stream(cfg, "downsample"));
    for (const char* name : {"male", "female"}) {
      const auto& subset = std::string(name) == "male" ? subsets.male : subsets.female;
      const auto split = make_split(cfg, subset);
      if (split.test.empty()) throw InsufficientDataError(std::string(name) + " subset leaves an empty test split");
      std::ostringstream epochs;
      auto result = fit(cfg, split, vocab.size(), epochs);
      write_file(ws.dir / name / "history.csv", training::format_history(result.history));
      log += std::string("# ") + name + "\n" + epochs.str();
      (std::string(name) == "male" ? male_correct : female_correct) = correctness(result.model, split.test);
    }
  }

  const auto test = stats::bootstrap_diff_test(male_correct, female_correct, cfg.get_size("n_resamples"),
                                               stream(cfg, "bootstrap"));
  std::string report = stats::format_gender_report(test, mode);
  report += strf("male_n=%zu male_ad=%zu male_control=%zu female_n=%zu female_ad=%zu female_control=%zu "
                 "female_pool_ad=%zu female_pool_control=%zu\n",
                 subsets.male_counts.total(), subsets.male_counts.ad, subsets.male_counts.control,
                 subsets.female_counts.total(), subsets.female_counts.ad, subsets.female_counts.control,
                 subsets.female_pool_counts.ad, subsets.female_pool_counts.control);
  report += ad_pos_line("ad_pos_male", subsets.male, cfg.get_size("pos_top"));
  report += ad_pos_line("ad_pos_female", subsets.female, cfg.get_size("pos_top"));
  write_file(ws.dir / "report.txt", report);
  out << log << report;
}

// ---- report ------------------------------------------------------------

void cmd_report(RunConfig cfg, std::ostream& out) {
  cfg.resolve_paths();
  cfg.resolve();
  auto ws = open_workspace(cfg, "report");
  // Sub-commands write under <out>/report/<command>/ and train a fresh
  // checkpoint there; the corpus path stays as resolved above.
  RunConfig sub = cfg;
  sub.set("out", ws.dir.string());
  sub.set("checkpoint", (ws.dir / "train" / "checkpoint").string());

  std::string summary;
  for (const char* command : {"ingest", "train", "eval", "cluster", "saliency", "gender"}) {
    std::ostringstream section;
    dispatch(command, sub, section);
    summary += std::string("== ") + command + "\n" + section.str() + "\n";
  }
  write_file(ws.dir / "summary.txt", summary);
  out << summary;
}

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::usage: return 1;
    case ErrorCategory::data: return 2;
    case ErrorCategory::numeric: return 3;
  }
  return 2;
}

std::string dashed(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

std::string usage() {
  std::string text = "usage: adling <command> [--config FILE] [--set key=value]... [--<key> value]...\ncommands:";
  for (const auto& c : command_names()) text += " " + c;
  return text + "\nrun `adling <command> --help` for the keys.\n";
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"synth", "ingest", "train", "eval",
                                                 "cluster", "saliency", "gender", "report"};
  return names;
}

void dispatch(const std::string& command, RunConfig config, std::ostream& out) {
  if (command == "synth") return cmd_synth(std::move(config), out);
  if (command == "ingest") return cmd_ingest(std::move(config), out);
  if (command == "train") return cmd_train(std::move(config), out);
  if (command == "eval") return cmd_eval(std::move(config), out);
  if (command == "cluster") return cmd_cluster(std::move(config), out);
  if (command == "saliency") return cmd_saliency(std::move(config), out);
  if (command == "gender") return cmd_gender(std::move(config), out);
  if (command == "report") return cmd_report(std::move(config), out);
  throw UsageError("unknown command '" + command + "'");
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (args.empty()) {
    err << usage();
    return 1;
  }
  const std::string& command = args[0];
  if (command == "--help" || command == "-h" || command == "help") {
    out << usage();
    return 0;
  }
  if (std::find(command_names().begin(), command_names().end(), command) == command_names().end()) {
    err << "adling: unknown command '" << command << "'\n" << usage();
    return 1;
  }

  CLI::App app{"adling " + command, "adling " + command};
  std::string config_file;
  std::vector<std::string> overrides;
  app.add_option("--config", config_file, "key=value config file");
  app.add_option("--set", overrides, "key=value override, repeatable");
  // std::map keeps the bound storage at stable addresses.
  std::map<std::string, std::string> text_values;
  std::map<std::string, bool> flag_values;
  std::vector<std::pair<std::string, CLI::Option*>> options;
  for (const auto& spec : key_specs()) {
    const std::string name = "--" + dashed(spec.key);
    CLI::Option* opt = spec.kind == ValueKind::boolean
                           ? app.add_flag(name + ",!--no-" + dashed(spec.key), flag_values[spec.key], spec.help)
                           : app.add_option(name, text_values[spec.key], spec.help);
    options.emplace_back(spec.key, opt);
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "adling " << command << ": " << e.what() << "\n";
    return 1;
  }

  try {
    RunConfig config;
    if (!config_file.empty()) config.load_file(config_file);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
      config.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    for (const auto& [key, opt] : options) {
      if (opt->count() == 0) continue;
      const KeySpec* spec = find_key(key);
      config.set(key, spec->kind == ValueKind::boolean ? (flag_values[key] ? "true" : "false") : text_values[key]);
    }
    dispatch(command, std::move(config), out);
    return 0;
  } catch (const Error& e) {
    err << "adling " << command << ": " << e.what() << "\n";
    return exit_code(e.category());
  } catch (const fs::filesystem_error& e) {
    err << "adling " << command << ": " << e.what() << "\n";
    return 2;
  } catch (const std::bad_alloc&) {
    err << "adling " << command << ": out of memory\n";
    return 3;
  } catch (const std::exception& e) {
    err << "adling " << command << ": " << e.what() << "\n";
    return 2;
  }
}

}  // namespace adling::cli
