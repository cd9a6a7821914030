#ifndef SVRNN_SVRNN_H
#define SVRNN_SVRNN_H

/*
 * C interface to the structured VRNN toolkit.
 *
 * Every fallible call returns an svrnn_status. On failure the message for
 * the calling thread is available from svrnn_last_error() until the next
 * failing call on that thread. Objects are opaque handles released with the
 * matching *_free function (NULL is accepted). Strings returned through
 * `char**` are owned by the caller and released with svrnn_string_free.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SVRNN_BUILDING_LIBRARY)
#    define SVRNN_API __declspec(dllexport)
#  else
#    define SVRNN_API __declspec(dllimport)
#  endif
#else
#  define SVRNN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum svrnn_status {
  SVRNN_OK = 0,
  SVRNN_INVALID_ARGUMENT = 1,
  SVRNN_DIMENSION_MISMATCH = 2,
  SVRNN_OUT_OF_RANGE = 3,
  SVRNN_INFEASIBLE = 4,
  SVRNN_IO = 5,
  SVRNN_FORMAT = 6,
  SVRNN_NUMERIC = 7,
  SVRNN_VOCABULARY_MISMATCH = 8,
  SVRNN_CONFIG = 9,
  SVRNN_INTERNAL = 100
} svrnn_status;

typedef struct svrnn_corpus svrnn_corpus;
typedef struct svrnn_config svrnn_config;
typedef struct svrnn_trainer svrnn_trainer;
typedef struct svrnn_model svrnn_model;

/* Per-turn means over one pass. */
typedef struct svrnn_elbo {
  double reconstruction;
  double kl;
  double prior_fit;
  double bow;
  double total;
  size_t turns;
  size_t dialogues;
} svrnn_elbo;

/* Upper-case code such as "CONFIG". Never NULL. */
SVRNN_API const char* svrnn_status_name(svrnn_status status);
/* Message of the last failure on this thread, or "". */
SVRNN_API const char* svrnn_last_error(void);
SVRNN_API void svrnn_string_free(char* s);
SVRNN_API const char* svrnn_version(void);

/* ---- corpora ---- */

SVRNN_API size_t svrnn_domain_count(void);
/* NULL when out of range. */
SVRNN_API const char* svrnn_domain_name(size_t index);

SVRNN_API svrnn_status svrnn_corpus_read(const char* path, svrnn_corpus** out);
SVRNN_API svrnn_status svrnn_corpus_write(const svrnn_corpus* corpus, const char* path);
SVRNN_API svrnn_status svrnn_corpus_generate(const char* domain, size_t count, uint64_t seed, svrnn_corpus** out);
SVRNN_API svrnn_status svrnn_corpus_generate_multi_party(int speakers, size_t count, uint64_t seed,
                                                        svrnn_corpus** out);
/* 80/10/10 in order. Parts remember the generating domain, if any. */
SVRNN_API svrnn_status svrnn_corpus_split(const svrnn_corpus* corpus, svrnn_corpus** train, svrnn_corpus** valid,
                                          svrnn_corpus** test);
SVRNN_API size_t svrnn_corpus_size(const svrnn_corpus* corpus);
SVRNN_API svrnn_status svrnn_corpus_stats(const svrnn_corpus* corpus, char** json);
/* Gold structure of a generated corpus (domain graph or reply trees).
 * Fails with SVRNN_INVALID_ARGUMENT for corpora read from disk. */
SVRNN_API svrnn_status svrnn_corpus_structure(const svrnn_corpus* corpus, char** json);
SVRNN_API void svrnn_corpus_free(svrnn_corpus* corpus);

/* ---- run configuration ---- */

SVRNN_API svrnn_status svrnn_config_create(svrnn_config** out);
/* Parse problems are recorded and reported by svrnn_config_validate. */
SVRNN_API svrnn_status svrnn_config_set(svrnn_config* config, const char* key, const char* value);
SVRNN_API svrnn_status svrnn_config_load(svrnn_config* config, const char* path);
/* SVRNN_CONFIG with every violation, one per line, in the message. */
SVRNN_API svrnn_status svrnn_config_validate(const svrnn_config* config);
SVRNN_API svrnn_status svrnn_config_get(const svrnn_config* config, const char* key, char** value);
SVRNN_API svrnn_status svrnn_config_to_text(const svrnn_config* config, char** text);
/* The configuration a training checkpoint was written with. */
SVRNN_API svrnn_status svrnn_config_from_checkpoint(const char* path, svrnn_config** out);
SVRNN_API void svrnn_config_free(svrnn_config* config);

/* ---- training ---- */

/* Validates the config, builds the vocabulary from `train`, and initializes
 * the model from the config seed. The corpus is copied. */
SVRNN_API svrnn_status svrnn_trainer_create(const svrnn_config* config, const svrnn_corpus* train,
                                            svrnn_trainer** out);
/* Continues from a checkpoint written by svrnn_trainer_save. The model
 * settings in `config` must match the checkpoint. */
SVRNN_API svrnn_status svrnn_trainer_resume(const svrnn_config* config, const svrnn_corpus* train,
                                            const char* checkpoint, svrnn_trainer** out);
SVRNN_API svrnn_status svrnn_trainer_epoch(svrnn_trainer* trainer, svrnn_elbo* report);
/* Objective on another corpus without updates. */
SVRNN_API svrnn_status svrnn_trainer_evaluate(svrnn_trainer* trainer, const svrnn_corpus* corpus,
                                              svrnn_elbo* report);
/* Structure metrics against gold labels, as a JSON object. */
SVRNN_API svrnn_status svrnn_trainer_report(svrnn_trainer* trainer, const svrnn_corpus* corpus, char** json);
/* Completed epochs. */
SVRNN_API int svrnn_trainer_epoch_index(const svrnn_trainer* trainer);
/* Temperature the next epoch will use. */
SVRNN_API double svrnn_trainer_temperature(const svrnn_trainer* trainer);
/* Model, optimizer, and config; written atomically. */
SVRNN_API svrnn_status svrnn_trainer_save(const svrnn_trainer* trainer, const char* path);
SVRNN_API void svrnn_trainer_free(svrnn_trainer* trainer);

/* ---- trained models ---- */

SVRNN_API svrnn_status svrnn_model_load(const char* checkpoint, svrnn_model** out);
/* "chain" or "tree". */
SVRNN_API const char* svrnn_model_variant(const svrnn_model* model);
/* One JSON line per dialogue, newline-terminated. */
SVRNN_API svrnn_status svrnn_model_induce(svrnn_model* model, const svrnn_corpus* corpus, char** jsonl);
/* Learned structure JSON; tree models keep the first `max_dialogues`. */
SVRNN_API svrnn_status svrnn_model_structure(svrnn_model* model, const svrnn_corpus* corpus, size_t max_dialogues,
                                             char** json);
SVRNN_API svrnn_status svrnn_model_evaluate(svrnn_model* model, const svrnn_corpus* corpus, uint64_t kmeans_seed,
                                            char** json);
SVRNN_API void svrnn_model_free(svrnn_model* model);

/* ---- evaluation and export ---- */

/* Scores label records (induce output or a gold corpus) against `gold`. */
SVRNN_API svrnn_status svrnn_evaluate_labels(const svrnn_corpus* gold, const char* variant, const char* labels_path,
                                             char** json);
/* DOT text for a structure JSON document. `threshold` prunes chain edges. */
SVRNN_API svrnn_status svrnn_structure_to_dot(const char* structure_json, double threshold, char** dot);

#ifdef __cplusplus
}
#endif

#endif /* SVRNN_SVRNN_H */
