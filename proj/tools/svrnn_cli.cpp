// svrnn: generate corpora, train, evaluate, induce, and export structure
// graphs. Talks to the library only through the C API.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "svrnn/svrnn.h"

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

// Carries a C API failure (or a usage problem) to main.
struct Failure {
  std::string code;
  std::string message;
  int exit_code;
};

void check(svrnn_status s) {
  if (s != SVRNN_OK) {
    throw Failure{svrnn_status_name(s), svrnn_last_error(), s == SVRNN_INTERNAL ? 70 : static_cast<int>(s)};
  }
}

[[noreturn]] void usage(const std::string& message) { throw Failure{"USAGE", message, 2}; }

// RAII wrappers over the opaque handles.
template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
  T** out() { return &p; }
  T* get() const { return p; }
};
using Corpus = Handle<svrnn_corpus, svrnn_corpus_free>;
using Config = Handle<svrnn_config, svrnn_config_free>;
using TrainerH = Handle<svrnn_trainer, svrnn_trainer_free>;
using Model = Handle<svrnn_model, svrnn_model_free>;

std::string take(char* s) {
  std::string out = s == nullptr ? "" : s;
  svrnn_string_free(s);
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Failure{"IO", "cannot write " + path, SVRNN_IO};
  out << text;
  if (!out) throw Failure{"IO", "write to " + path + " failed", SVRNN_IO};
}

Json elbo_json(const svrnn_elbo& e) {
  return Json{{"reconstruction", e.reconstruction}, {"kl", e.kl},       {"prior_fit", e.prior_fit},
              {"bow", e.bow},                       {"total", e.total}, {"turns", e.turns}};
}

std::string config_value(const svrnn_config* c, const char* key) {
  char* v = nullptr;
  check(svrnn_config_get(c, key, &v));
  return take(v);
}

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("svrnn");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S] %^%l%$ %v");
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("SVRNN_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only accept real names.
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
    else spdlog::warn("ignoring unknown SVRNN_LOG level '{}'", env);
  }
}

// ---- generate ----

struct GenerateArgs {
  std::string domain;
  bool multi_party = false;
  int speakers = 4;
  std::size_t count = 1000;
  std::uint64_t seed = 7;
  std::string out = ".";
  bool no_split = false;
};

void run_generate(const GenerateArgs& a) {
  if (a.domain.empty() == !a.multi_party) usage("generate needs exactly one of --domain or --multi-party");
  Corpus corpus;
  if (a.multi_party) check(svrnn_corpus_generate_multi_party(a.speakers, a.count, a.seed, corpus.out()));
  else check(svrnn_corpus_generate(a.domain.c_str(), a.count, a.seed, corpus.out()));

  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) throw Failure{"IO", "cannot create " + a.out + ": " + ec.message(), SVRNN_IO};
  const fs::path dir(a.out);
  if (a.no_split) {
    check(svrnn_corpus_write(corpus.get(), (dir / "corpus.jsonl").string().c_str()));
  } else {
    Corpus train, valid, test;
    check(svrnn_corpus_split(corpus.get(), train.out(), valid.out(), test.out()));
    check(svrnn_corpus_write(train.get(), (dir / "train.jsonl").string().c_str()));
    check(svrnn_corpus_write(valid.get(), (dir / "valid.jsonl").string().c_str()));
    check(svrnn_corpus_write(test.get(), (dir / "test.jsonl").string().c_str()));
  }
  char* structure = nullptr;
  check(svrnn_corpus_structure(corpus.get(), &structure));
  write_text((dir / "structure.json").string(), take(structure) + "\n");

  char* stats = nullptr;
  check(svrnn_corpus_stats(corpus.get(), &stats));
  std::cout << take(stats) << "\n";
  spdlog::info("wrote {} dialogues to {}", svrnn_corpus_size(corpus.get()), a.out);
}

// ---- train ----

struct TrainArgs {
  std::string config_file;
  std::vector<std::string> sets;
  std::map<std::string, std::string> flags;  // key -> value from dedicated options
  std::string resume;
  int until = -1;  // stop after this epoch without changing the schedule
};

void apply(svrnn_config* c, const TrainArgs& a) {
  if (!a.config_file.empty()) check(svrnn_config_load(c, a.config_file.c_str()));
  for (const auto& [k, v] : a.flags) check(svrnn_config_set(c, k.c_str(), v.c_str()));
  for (const auto& kv : a.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) usage("--set expects key=value, got '" + kv + "'");
    check(svrnn_config_set(c, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
  }
}

void run_train(const TrainArgs& a) {
  Config config;
  // Resuming starts from the checkpoint's settings; file and flags still win.
  if (!a.resume.empty()) check(svrnn_config_from_checkpoint(a.resume.c_str(), config.out()));
  else check(svrnn_config_create(config.out()));
  apply(config.get(), a);
  check(svrnn_config_validate(config.get()));

  const std::string corpus_path = config_value(config.get(), "corpus");
  const std::string valid_path = config_value(config.get(), "valid");
  std::string checkpoint = config_value(config.get(), "checkpoint");
  std::string log_path = config_value(config.get(), "output");
  if (corpus_path.empty()) usage("train needs a corpus (--corpus or corpus= in the config)");
  if (checkpoint.empty()) usage("train needs a checkpoint path (--checkpoint or checkpoint= in the config)");
  if (log_path.empty()) log_path = checkpoint + ".log.jsonl";
  const int epochs = std::stoi(config_value(config.get(), "epochs"));
  const int every = std::stoi(config_value(config.get(), "checkpoint_every"));

  Corpus train, valid;
  check(svrnn_corpus_read(corpus_path.c_str(), train.out()));
  if (!valid_path.empty()) check(svrnn_corpus_read(valid_path.c_str(), valid.out()));

  TrainerH trainer;
  if (a.resume.empty()) check(svrnn_trainer_create(config.get(), train.get(), trainer.out()));
  else check(svrnn_trainer_resume(config.get(), train.get(), a.resume.c_str(), trainer.out()));

  const int start = svrnn_trainer_epoch_index(trainer.get());
  spdlog::info("training {} on {} dialogues, epochs {}..{}", config_value(config.get(), "variant"),
               svrnn_corpus_size(train.get()), start + 1, epochs);
  std::ofstream log(log_path, std::ios::binary | (a.resume.empty() ? std::ios::trunc : std::ios::app));
  if (!log) throw Failure{"IO", "cannot write " + log_path, SVRNN_IO};

  const int stop = a.until >= 0 ? std::min(a.until, epochs) : epochs;
  if (start >= stop) {
    check(svrnn_trainer_save(trainer.get(), checkpoint.c_str()));
    spdlog::info("nothing to train; wrote {}", checkpoint);
  }
  svrnn_elbo last{};
  Json summary{{"epochs", start}};
  while (svrnn_trainer_epoch_index(trainer.get()) < stop) {
    const double tau = svrnn_trainer_temperature(trainer.get());
    check(svrnn_trainer_epoch(trainer.get(), &last));
    const int e = svrnn_trainer_epoch_index(trainer.get());
    Json rec{{"epoch", e}, {"temperature", tau}};
    rec.update(elbo_json(last));
    if (valid.get() != nullptr) {
      svrnn_elbo v{};
      check(svrnn_trainer_evaluate(trainer.get(), valid.get(), &v));
      rec["valid"] = elbo_json(v);
      summary["valid"] = elbo_json(v);
    }
    log << rec.dump() << '\n';
    log.flush();
    spdlog::info("epoch {}/{} total {:.4f} rec {:.4f} kl {:.4f} bow {:.4f}", e, epochs, last.total,
                 last.reconstruction, last.kl, last.bow);
    if (e % every == 0 || e == stop) {
      check(svrnn_trainer_save(trainer.get(), checkpoint.c_str()));
      spdlog::debug("checkpoint {}", checkpoint);
    }
    summary["epochs"] = e;
    summary["train"] = elbo_json(last);
  }
  summary["checkpoint"] = checkpoint;
  std::cout << summary.dump() << "\n";
}

// ---- eval / induce / export-graph ----

struct EvalArgs {
  std::string checkpoint;
  std::string corpus;
  std::string labels;
  std::string variant;
  std::uint64_t seed = 1;
  std::string output;
};

void run_eval(const EvalArgs& a) {
  if (a.corpus.empty()) usage("eval needs --corpus with gold labels");
  Corpus gold;
  check(svrnn_corpus_read(a.corpus.c_str(), gold.out()));
  char* report = nullptr;
  if (!a.labels.empty()) {
    if (a.variant.empty()) usage("--labels needs --variant chain|tree");
    check(svrnn_evaluate_labels(gold.get(), a.variant.c_str(), a.labels.c_str(), &report));
  } else {
    if (a.checkpoint.empty()) usage("eval needs --checkpoint or --labels");
    Model model;
    check(svrnn_model_load(a.checkpoint.c_str(), model.out()));
    if (!a.variant.empty() && a.variant != svrnn_model_variant(model.get()))
      throw Failure{"INVALID_ARGUMENT",
                    "variant/corpus mismatch: checkpoint holds a " + std::string(svrnn_model_variant(model.get())) +
                        " model",
                    SVRNN_INVALID_ARGUMENT};
    check(svrnn_model_evaluate(model.get(), gold.get(), a.seed, &report));
  }
  const std::string text = take(report) + "\n";
  if (!a.output.empty()) write_text(a.output, text);
  std::cout << text;
}

struct InduceArgs {
  std::string checkpoint;
  std::string corpus;
  std::string output;
};

void run_induce(const InduceArgs& a) {
  Model model;
  Corpus corpus;
  check(svrnn_model_load(a.checkpoint.c_str(), model.out()));
  check(svrnn_corpus_read(a.corpus.c_str(), corpus.out()));
  char* records = nullptr;
  check(svrnn_model_induce(model.get(), corpus.get(), &records));
  write_text(a.output, take(records));
}

struct ExportArgs {
  std::string structure;
  std::string checkpoint;
  std::string corpus;
  double threshold = 0.1;
  std::size_t max_dialogues = 5;
  std::string output;
};

void run_export(const ExportArgs& a) {
  std::string doc;
  if (!a.structure.empty()) {
    std::ifstream in(a.structure, std::ios::binary);
    if (!in) throw Failure{"IO", "cannot read " + a.structure, SVRNN_IO};
    doc.assign(std::istreambuf_iterator<char>(in), {});
  } else {
    if (a.checkpoint.empty() || a.corpus.empty()) usage("export-graph needs --structure or --checkpoint with --corpus");
    Model model;
    Corpus corpus;
    check(svrnn_model_load(a.checkpoint.c_str(), model.out()));
    check(svrnn_corpus_read(a.corpus.c_str(), corpus.out()));
    char* s = nullptr;
    check(svrnn_model_structure(model.get(), corpus.get(), a.max_dialogues, &s));
    doc = take(s);
  }
  char* dot = nullptr;
  check(svrnn_structure_to_dot(doc.c_str(), a.threshold, &dot));
  write_text(a.output, take(dot));
}

// "a:\n  b\n  c" -> "a: b; c"
std::string one_line(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\n') {
      out += s[i];
      continue;
    }
    while (i + 1 < s.size() && (s[i + 1] == ' ' || s[i + 1] == '\t')) ++i;
    out += (!out.empty() && out.back() == ':') ? " " : "; ";
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Structured VRNN dialogue-structure toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", svrnn_version());

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate a synthetic corpus with gold structure");
  g->add_option("--domain", gen.domain, "Two-party domain (bus, restaurant, weather, movie)");
  g->add_flag("--multi-party", gen.multi_party, "Multi-party chats with gold reply trees");
  g->add_option("--speakers", gen.speakers, "Speakers per multi-party chat")->capture_default_str();
  g->add_option("--count", gen.count, "Number of dialogues")->capture_default_str();
  g->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  g->add_option("--out", gen.out, "Output directory")->capture_default_str();
  g->add_flag("--no-split", gen.no_split, "Write corpus.jsonl instead of train/valid/test");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a model; flags override the config file");
  t->add_option("--config", tr.config_file, "key=value config file");
  t->add_option("--set", tr.sets, "Extra key=value settings (repeatable)");
  t->add_option("--resume", tr.resume, "Continue from a training checkpoint");
  t->add_option("--until", tr.until, "Stop after this epoch; the schedule still spans --epochs");
  struct Flag {
    const char* name;
    const char* key;
    const char* help;
  };
  static const Flag flags[] = {
      {"--variant", "variant", "chain or tree"},
      {"--states", "states", "Number of latent states"},
      {"--hidden", "hidden", "Hidden size"},
      {"--embedding", "embedding", "Word embedding size"},
      {"--dropout", "dropout", "Dropout rate"},
      {"--lr", "learning_rate", "Learning rate"},
      {"--bow-weight", "bow_weight", "BOW loss weight"},
      {"--batch-size", "batch_size", "Dialogues per batch"},
      {"--epochs", "epochs", "Total epochs"},
      {"--tau-start", "tau_start", "Initial Gumbel temperature"},
      {"--tau-end", "tau_end", "Final Gumbel temperature"},
      {"--seed", "seed", "Seed for initialization and sampling"},
      {"--checkpoint-every", "checkpoint_every", "Save every N epochs"},
      {"--corpus", "corpus", "Training corpus (JSONL)"},
      {"--valid", "valid", "Validation corpus (JSONL)"},
      {"--checkpoint", "checkpoint", "Checkpoint path"},
      {"--log", "output", "Training log path (JSONL)"},
  };
  std::map<std::string, std::string> raw;
  for (const auto& f : flags) t->add_option(f.name, raw[f.key], f.help);

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score a model or label file against a gold corpus");
  e->add_option("--checkpoint", ev.checkpoint, "Trained checkpoint");
  e->add_option("--corpus", ev.corpus, "Gold-labeled corpus")->required();
  e->add_option("--labels", ev.labels, "Label records (induce output or a corpus) instead of a model");
  e->add_option("--variant", ev.variant, "Expected variant (chain or tree)");
  e->add_option("--seed", ev.seed, "K-means seed")->capture_default_str();
  e->add_option("--output", ev.output, "Also write the report here");

  InduceArgs in;
  auto* i = app.add_subcommand("induce", "Dump latent traces or tree marginals as JSONL");
  i->add_option("--checkpoint", in.checkpoint, "Trained checkpoint")->required();
  i->add_option("--corpus", in.corpus, "Corpus to analyse")->required();
  i->add_option("--output", in.output, "Output file (default stdout)");

  ExportArgs ex;
  auto* x = app.add_subcommand("export-graph", "Render a structure as DOT");
  x->add_option("--structure", ex.structure, "Structure JSON (e.g. structure.json from generate)");
  x->add_option("--checkpoint", ex.checkpoint, "Trained checkpoint");
  x->add_option("--corpus", ex.corpus, "Corpus to induce structure from");
  x->add_option("--threshold", ex.threshold, "Drop chain edges below this probability")->capture_default_str();
  x->add_option("--max-dialogues", ex.max_dialogues, "Tree dialogues to draw")->capture_default_str();
  x->add_option("--output", ex.output, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForVersion& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    std::cerr << "error: USAGE: " << one_line(err.what()) << "\n";
    return 2;
  }

  try {
    if (g->parsed()) run_generate(gen);
    if (t->parsed()) {
      for (const auto& f : flags) {
        if (t->count(f.name) > 0) tr.flags[f.key] = raw[f.key];
      }
      run_train(tr);
    }
    if (e->parsed()) run_eval(ev);
    if (i->parsed()) run_induce(in);
    if (x->parsed()) run_export(ex);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.code << ": " << one_line(f.message) << "\n";
    return f.exit_code;
  } catch (const std::exception& ex2) {
    std::cerr << "error: INTERNAL: " << one_line(ex2.what()) << "\n";
    return 70;
  }
  return 0;
}
