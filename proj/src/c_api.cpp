#include "svrnn/svrnn.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <optional>
#include <sstream>
#include <string>

#include "svrnn/checkpoint.hpp"
#include "svrnn/error.hpp"
#include "svrnn/pipeline.hpp"
#include "svrnn/run_config.hpp"

using namespace svrnn;

struct svrnn_corpus {
  std::vector<DialogueSession> sessions;
  std::optional<std::string> domain;  // set for generated two-party corpora
  bool multi_party = false;           // set for generated multi-party corpora
};

struct svrnn_config {
  RunConfig config;
};

struct svrnn_trainer {
  RunConfig config;
  std::unique_ptr<StructuredVrnn> model;
  std::unique_ptr<Trainer> trainer;
  std::vector<EncodedDialogue> train;
};

struct svrnn_model {
  std::unique_ptr<StructuredVrnn> model;
};

namespace {

thread_local std::string g_last_error;

svrnn_status to_status(ErrorCode code) { return static_cast<svrnn_status>(static_cast<int>(code)); }

svrnn_status record(svrnn_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs `body`, mapping exceptions to status codes and the thread's message.
template <typename F>
svrnn_status guarded(F&& body) {
  try {
    body();
    return SVRNN_OK;
  } catch (const Error& e) {
    return record(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return record(SVRNN_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return record(SVRNN_INTERNAL, e.what());
  } catch (...) {
    return record(SVRNN_INTERNAL, "unknown failure");
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) fail(ErrorCode::kInvalidArgument, std::string(what) + " must not be NULL");
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void set_elbo(const ElboReport& r, svrnn_elbo* out) {
  if (out == nullptr) return;
  out->reconstruction = r.reconstruction;
  out->kl = r.kl;
  out->prior_fit = r.prior_fit;
  out->bow = r.bow;
  out->total = r.total;
  out->turns = r.turns;
  out->dialogues = r.dialogues;
}

RunConfig config_from_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  const auto it = ckpt.meta.find("run");
  require(it != ckpt.meta.end(), ErrorCode::kFormat, path + " is not a training checkpoint (no run configuration)");
  RunConfig c;
  std::istringstream in(it->second);
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) c.set(line.substr(0, eq), line.substr(eq + 1));
  }
  c.validate();
  return c;
}

}  // namespace

extern "C" {

const char* svrnn_status_name(svrnn_status status) {
  if (status == SVRNN_OK) return "OK";
  if (status == SVRNN_INTERNAL) return "INTERNAL";
  const int v = static_cast<int>(status);
  if (v >= static_cast<int>(ErrorCode::kInvalidArgument) && v <= static_cast<int>(ErrorCode::kConfig))
    return error_code_name(static_cast<ErrorCode>(v));
  return "UNKNOWN";
}

const char* svrnn_last_error(void) { return g_last_error.c_str(); }

void svrnn_string_free(char* s) { std::free(s); }

const char* svrnn_version(void) { return "1.0.0"; }

size_t svrnn_domain_count(void) { return builtin_domain_names().size(); }

const char* svrnn_domain_name(size_t index) {
  const auto& names = builtin_domain_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

svrnn_status svrnn_corpus_read(const char* path, svrnn_corpus** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto c = std::make_unique<svrnn_corpus>();
    c->sessions = read_corpus(path);
    *out = c.release();
  });
}

svrnn_status svrnn_corpus_write(const svrnn_corpus* corpus, const char* path) {
  return guarded([&] {
    need(corpus, "corpus");
    need(path, "path");
    write_corpus(path, corpus->sessions);
  });
}

svrnn_status svrnn_corpus_generate(const char* domain, size_t count, uint64_t seed, svrnn_corpus** out) {
  return guarded([&] {
    need(domain, "domain");
    need(out, "out");
    const DomainSpec spec = builtin_domain(domain);
    auto c = std::make_unique<svrnn_corpus>();
    c->sessions = generate_two_party(spec, count, seed);
    c->domain = spec.name;
    *out = c.release();
  });
}

svrnn_status svrnn_corpus_generate_multi_party(int speakers, size_t count, uint64_t seed, svrnn_corpus** out) {
  return guarded([&] {
    need(out, "out");
    auto c = std::make_unique<svrnn_corpus>();
    c->sessions = generate_multi_party(speakers, count, seed);
    c->multi_party = true;
    *out = c.release();
  });
}

svrnn_status svrnn_corpus_split(const svrnn_corpus* corpus, svrnn_corpus** train, svrnn_corpus** valid,
                                svrnn_corpus** test) {
  return guarded([&] {
    need(corpus, "corpus");
    need(train, "train");
    need(valid, "valid");
    need(test, "test");
    CorpusSplit s = split_corpus(corpus->sessions);
    auto part = [&](std::vector<DialogueSession>&& sessions) {
      auto c = std::make_unique<svrnn_corpus>();
      c->sessions = std::move(sessions);
      c->domain = corpus->domain;
      c->multi_party = corpus->multi_party;
      return c;
    };
    auto a = part(std::move(s.train));
    auto b = part(std::move(s.valid));
    auto d = part(std::move(s.test));
    *train = a.release();
    *valid = b.release();
    *test = d.release();
  });
}

size_t svrnn_corpus_size(const svrnn_corpus* corpus) { return corpus == nullptr ? 0 : corpus->sessions.size(); }

svrnn_status svrnn_corpus_stats(const svrnn_corpus* corpus, char** json) {
  return guarded([&] {
    need(corpus, "corpus");
    need(json, "json");
    *json = copy_string(corpus_stats_json(corpus->sessions));
  });
}

svrnn_status svrnn_corpus_structure(const svrnn_corpus* corpus, char** json) {
  return guarded([&] {
    need(corpus, "corpus");
    need(json, "json");
    if (corpus->domain) {
      *json = copy_string(two_party_sidecar(builtin_domain(*corpus->domain), corpus->sessions));
    } else if (corpus->multi_party) {
      *json = copy_string(multi_party_sidecar(corpus->sessions));
    } else {
      fail(ErrorCode::kInvalidArgument, "gold structure is only known for generated corpora");
    }
  });
}

void svrnn_corpus_free(svrnn_corpus* corpus) { delete corpus; }

svrnn_status svrnn_config_create(svrnn_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new svrnn_config();
  });
}

svrnn_status svrnn_config_set(svrnn_config* config, const char* key, const char* value) {
  return guarded([&] {
    need(config, "config");
    need(key, "key");
    need(value, "value");
    config->config.set(key, value);
  });
}

svrnn_status svrnn_config_load(svrnn_config* config, const char* path) {
  return guarded([&] {
    need(config, "config");
    need(path, "path");
    config->config.load_file(path);
  });
}

svrnn_status svrnn_config_validate(const svrnn_config* config) {
  return guarded([&] {
    need(config, "config");
    config->config.validate();
  });
}

svrnn_status svrnn_config_get(const svrnn_config* config, const char* key, char** value) {
  return guarded([&] {
    need(config, "config");
    need(key, "key");
    need(value, "value");
    *value = copy_string(config->config.get(key));
  });
}

svrnn_status svrnn_config_to_text(const svrnn_config* config, char** text) {
  return guarded([&] {
    need(config, "config");
    need(text, "text");
    *text = copy_string(config->config.to_text());
  });
}

svrnn_status svrnn_config_from_checkpoint(const char* path, svrnn_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto c = std::make_unique<svrnn_config>();
    c->config = config_from_checkpoint(read_checkpoint(path), path);
    *out = c.release();
  });
}

void svrnn_config_free(svrnn_config* config) { delete config; }

svrnn_status svrnn_trainer_create(const svrnn_config* config, const svrnn_corpus* train, svrnn_trainer** out) {
  return guarded([&] {
    need(config, "config");
    need(train, "train");
    need(out, "out");
    config->config.validate();
    require(!train->sessions.empty(), ErrorCode::kInvalidArgument, "training corpus is empty");
    auto t = std::make_unique<svrnn_trainer>();
    t->config = config->config;
    const ModelConfig mc = t->config.model_config();
    t->model = std::make_unique<StructuredVrnn>(mc, build_vocabulary(train->sessions, mc.variant), t->config.seed);
    t->trainer = std::make_unique<Trainer>(*t->model, t->config.train_config());
    t->train = encode_corpus(*t->model, train->sessions);
    *out = t.release();
  });
}

svrnn_status svrnn_trainer_resume(const svrnn_config* config, const svrnn_corpus* train, const char* checkpoint,
                                  svrnn_trainer** out) {
  return guarded([&] {
    need(config, "config");
    need(train, "train");
    need(checkpoint, "checkpoint");
    need(out, "out");
    config->config.validate();
    require(!train->sessions.empty(), ErrorCode::kInvalidArgument, "training corpus is empty");
    const Checkpoint ckpt = read_checkpoint(checkpoint);
    config_from_checkpoint(ckpt, checkpoint);
    auto t = std::make_unique<svrnn_trainer>();
    t->config = config->config;
    t->model = std::make_unique<StructuredVrnn>(load_model(ckpt));
    require(model_config_to_text(t->model->config()) == model_config_to_text(t->config.model_config()),
            ErrorCode::kConfig, "model settings differ from the checkpoint being resumed");
    t->trainer = std::make_unique<Trainer>(*t->model, t->config.train_config());
    restore_trainer(ckpt, *t->trainer);
    t->train = encode_corpus(*t->model, train->sessions);
    *out = t.release();
  });
}

svrnn_status svrnn_trainer_epoch(svrnn_trainer* trainer, svrnn_elbo* report) {
  return guarded([&] {
    need(trainer, "trainer");
    set_elbo(trainer->trainer->train_epoch(trainer->train), report);
  });
}

svrnn_status svrnn_trainer_evaluate(svrnn_trainer* trainer, const svrnn_corpus* corpus, svrnn_elbo* report) {
  return guarded([&] {
    need(trainer, "trainer");
    need(corpus, "corpus");
    set_elbo(trainer->trainer->evaluate(encode_corpus(*trainer->model, corpus->sessions)), report);
  });
}

svrnn_status svrnn_trainer_report(svrnn_trainer* trainer, const svrnn_corpus* corpus, char** json) {
  return guarded([&] {
    need(trainer, "trainer");
    need(corpus, "corpus");
    need(json, "json");
    *json = copy_string(evaluate_model(*trainer->model, corpus->sessions, trainer->config.seed).to_json());
  });
}

int svrnn_trainer_epoch_index(const svrnn_trainer* trainer) {
  return trainer == nullptr ? -1 : trainer->trainer->epoch();
}

double svrnn_trainer_temperature(const svrnn_trainer* trainer) {
  return trainer == nullptr ? 0.0 : temperature_at(trainer->trainer->config(), trainer->trainer->epoch());
}

svrnn_status svrnn_trainer_save(const svrnn_trainer* trainer, const char* path) {
  return guarded([&] {
    need(trainer, "trainer");
    need(path, "path");
    Checkpoint ckpt = save_model(*trainer->model, trainer->trainer.get(), trainer->config.seed);
    ckpt.meta["run"] = trainer->config.to_text();
    write_checkpoint(path, ckpt);
  });
}

void svrnn_trainer_free(svrnn_trainer* trainer) { delete trainer; }

svrnn_status svrnn_model_load(const char* checkpoint, svrnn_model** out) {
  return guarded([&] {
    need(checkpoint, "checkpoint");
    need(out, "out");
    auto m = std::make_unique<svrnn_model>();
    m->model = std::make_unique<StructuredVrnn>(load_model(read_checkpoint(checkpoint)));
    *out = m.release();
  });
}

const char* svrnn_model_variant(const svrnn_model* model) {
  return model == nullptr ? "" : variant_name(model->model->config().variant);
}

svrnn_status svrnn_model_induce(svrnn_model* model, const svrnn_corpus* corpus, char** jsonl) {
  return guarded([&] {
    need(model, "model");
    need(corpus, "corpus");
    need(jsonl, "jsonl");
    std::string text;
    for (const auto& line : induce_records(*model->model, corpus->sessions)) text += line + '\n';
    *jsonl = copy_string(text);
  });
}

svrnn_status svrnn_model_structure(svrnn_model* model, const svrnn_corpus* corpus, size_t max_dialogues,
                                   char** json) {
  return guarded([&] {
    need(model, "model");
    need(corpus, "corpus");
    need(json, "json");
    *json = copy_string(structure_to_json(learned_structure(*model->model, corpus->sessions, max_dialogues)));
  });
}

svrnn_status svrnn_model_evaluate(svrnn_model* model, const svrnn_corpus* corpus, uint64_t kmeans_seed, char** json) {
  return guarded([&] {
    need(model, "model");
    need(corpus, "corpus");
    need(json, "json");
    *json = copy_string(evaluate_model(*model->model, corpus->sessions, kmeans_seed).to_json());
  });
}

void svrnn_model_free(svrnn_model* model) { delete model; }

svrnn_status svrnn_evaluate_labels(const svrnn_corpus* gold, const char* variant, const char* labels_path,
                                   char** json) {
  return guarded([&] {
    need(gold, "gold");
    need(variant, "variant");
    need(labels_path, "labels_path");
    need(json, "json");
    const Variant v = parse_variant(variant);
    require_gold_labels(gold->sessions, v);
    *json = copy_string(evaluate_labels(gold->sessions, v, read_labels(labels_path, v)).to_json());
  });
}

svrnn_status svrnn_structure_to_dot(const char* structure_json, double threshold, char** dot) {
  return guarded([&] {
    need(structure_json, "structure_json");
    need(dot, "dot");
    *dot = copy_string(structure_to_dot(structure_from_json(structure_json), threshold));
  });
}

}  // extern "C"
