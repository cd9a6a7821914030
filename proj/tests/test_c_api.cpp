// Exercises the shared library through its C header only.
#include <cstdio>
#include <cstring>
#include <string>

#include "doctest.h"
#include "svrnn/svrnn.h"

namespace {

std::string take(char* s) {
  std::string out = s == nullptr ? "" : s;
  svrnn_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("status names and errors") {
  CHECK(std::string(svrnn_status_name(SVRNN_OK)) == "OK");
  CHECK(std::string(svrnn_status_name(SVRNN_CONFIG)) == "CONFIG");
  CHECK(std::string(svrnn_status_name(SVRNN_INTERNAL)) == "INTERNAL");
  CHECK(std::string(svrnn_status_name(static_cast<svrnn_status>(42))) == "UNKNOWN");

  svrnn_corpus* c = nullptr;
  CHECK(svrnn_corpus_read("no/such/file.jsonl", &c) == SVRNN_IO);
  CHECK(c == nullptr);
  CHECK(std::strstr(svrnn_last_error(), "no/such/file.jsonl") != nullptr);
  CHECK(svrnn_corpus_generate("pirates", 5, 1, &c) == SVRNN_INVALID_ARGUMENT);
  CHECK(svrnn_corpus_generate("bus", 5, 1, nullptr) == SVRNN_INVALID_ARGUMENT);
  svrnn_corpus_free(nullptr);
  svrnn_string_free(nullptr);

  CHECK(svrnn_domain_count() == 4);
  CHECK(std::string(svrnn_domain_name(0)).size() > 0);
  CHECK(svrnn_domain_name(99) == nullptr);
}

TEST_CASE("corpora") {
  svrnn_corpus* c = nullptr;
  REQUIRE(svrnn_corpus_generate("weather", 50, 3, &c) == SVRNN_OK);
  CHECK(svrnn_corpus_size(c) == 50);
  svrnn_corpus *tr = nullptr, *va = nullptr, *te = nullptr;
  REQUIRE(svrnn_corpus_split(c, &tr, &va, &te) == SVRNN_OK);
  CHECK(svrnn_corpus_size(tr) == 40);
  CHECK(svrnn_corpus_size(va) == 5);
  CHECK(svrnn_corpus_size(te) == 5);
  char* json = nullptr;
  REQUIRE(svrnn_corpus_structure(te, &json) == SVRNN_OK);
  CHECK(take(json).find("\"domain\":\"weather\"") != std::string::npos);

  const char* path = "test_c_api_corpus.jsonl";
  REQUIRE(svrnn_corpus_write(c, path) == SVRNN_OK);
  svrnn_corpus* back = nullptr;
  REQUIRE(svrnn_corpus_read(path, &back) == SVRNN_OK);
  CHECK(svrnn_corpus_size(back) == 50);
  CHECK(svrnn_corpus_structure(back, &json) == SVRNN_INVALID_ARGUMENT);
  REQUIRE(svrnn_corpus_stats(back, &json) == SVRNN_OK);
  CHECK(take(json).find("\"dialogues\":50") != std::string::npos);
  std::remove(path);

  svrnn_corpus* mp = nullptr;
  REQUIRE(svrnn_corpus_generate_multi_party(3, 10, 1, &mp) == SVRNN_OK);
  REQUIRE(svrnn_corpus_structure(mp, &json) == SVRNN_OK);
  CHECK(take(json).find("\"kind\":\"tree\"") != std::string::npos);
  CHECK(svrnn_corpus_generate_multi_party(1, 10, 1, &c) == SVRNN_INVALID_ARGUMENT);

  for (svrnn_corpus* p : {c, tr, va, te, back, mp}) svrnn_corpus_free(p);
}

TEST_CASE("configuration") {
  svrnn_config* cfg = nullptr;
  REQUIRE(svrnn_config_create(&cfg) == SVRNN_OK);
  CHECK(svrnn_config_validate(cfg) == SVRNN_OK);
  char* v = nullptr;
  REQUIRE(svrnn_config_get(cfg, "states", &v) == SVRNN_OK);
  CHECK(take(v) == "10");
  CHECK(svrnn_config_get(cfg, "nope", &v) == SVRNN_CONFIG);
  CHECK(svrnn_config_set(cfg, "states", "0") == SVRNN_OK);
  CHECK(svrnn_config_set(cfg, "hidden", "-3") == SVRNN_OK);
  CHECK(svrnn_config_validate(cfg) == SVRNN_CONFIG);
  const std::string msg = svrnn_last_error();
  CHECK(msg.find("states") != std::string::npos);
  CHECK(msg.find("hidden") != std::string::npos);
  svrnn_config_free(cfg);
}

TEST_CASE("train, save, resume, evaluate") {
  svrnn_corpus* c = nullptr;
  REQUIRE(svrnn_corpus_generate("bus", 20, 5, &c) == SVRNN_OK);
  svrnn_config* cfg = nullptr;
  REQUIRE(svrnn_config_create(&cfg) == SVRNN_OK);
  for (auto [k, val] : {std::pair{"hidden", "8"}, {"embedding", "8"}, {"states", "4"}, {"epochs", "3"}, {"seed", "9"}})
    REQUIRE(svrnn_config_set(cfg, k, val) == SVRNN_OK);

  svrnn_trainer* a = nullptr;
  REQUIRE(svrnn_trainer_create(cfg, c, &a) == SVRNN_OK);
  CHECK(svrnn_trainer_epoch_index(a) == 0);
  CHECK(svrnn_trainer_temperature(a) == doctest::Approx(1.0));
  svrnn_elbo e1{}, e2{}, e3{};
  REQUIRE(svrnn_trainer_epoch(a, &e1) == SVRNN_OK);
  CHECK(e1.dialogues == 20);
  CHECK(e1.turns > 0);
  const char* ckpt = "test_c_api.ckpt";
  REQUIRE(svrnn_trainer_save(a, ckpt) == SVRNN_OK);
  REQUIRE(svrnn_trainer_epoch(a, &e2) == SVRNN_OK);
  REQUIRE(svrnn_trainer_epoch(a, &e3) == SVRNN_OK);

  svrnn_config* saved = nullptr;
  REQUIRE(svrnn_config_from_checkpoint(ckpt, &saved) == SVRNN_OK);
  char* text = nullptr;
  REQUIRE(svrnn_config_to_text(saved, &text) == SVRNN_OK);
  CHECK(take(text).find("seed=9\n") != std::string::npos);

  svrnn_trainer* b = nullptr;
  REQUIRE(svrnn_trainer_resume(saved, c, ckpt, &b) == SVRNN_OK);
  CHECK(svrnn_trainer_epoch_index(b) == 1);
  svrnn_elbo r2{}, r3{};
  REQUIRE(svrnn_trainer_epoch(b, &r2) == SVRNN_OK);
  REQUIRE(svrnn_trainer_epoch(b, &r3) == SVRNN_OK);
  CHECK(r2.total == e2.total);
  CHECK(r3.total == e3.total);

  // Model settings must agree with the checkpoint.
  REQUIRE(svrnn_config_set(saved, "hidden", "9") == SVRNN_OK);
  svrnn_trainer* bad = nullptr;
  CHECK(svrnn_trainer_resume(saved, c, ckpt, &bad) == SVRNN_CONFIG);
  CHECK(bad == nullptr);

  char* report = nullptr;
  REQUIRE(svrnn_trainer_report(a, c, &report) == SVRNN_OK);
  CHECK(take(report).find("\"kmeans\"") != std::string::npos);

  svrnn_model* m = nullptr;
  REQUIRE(svrnn_model_load(ckpt, &m) == SVRNN_OK);
  CHECK(std::string(svrnn_model_variant(m)) == "chain");
  char* jsonl = nullptr;
  REQUIRE(svrnn_model_induce(m, c, &jsonl) == SVRNN_OK);
  const std::string lines = take(jsonl);
  CHECK(std::count(lines.begin(), lines.end(), '\n') == 20);
  char* structure = nullptr;
  REQUIRE(svrnn_model_structure(m, c, 5, &structure) == SVRNN_OK);
  char* dot = nullptr;
  REQUIRE(svrnn_structure_to_dot(structure, 0.1, &dot) == SVRNN_OK);
  svrnn_string_free(structure);
  CHECK(take(dot).rfind("digraph", 0) == 0);
  CHECK(svrnn_structure_to_dot("{\"kind\":\"chain\",\"states\":[],\"transitions\":[]}", 0.1, &dot) ==
        SVRNN_INVALID_ARGUMENT);

  const char* gold = "test_c_api_gold.jsonl";
  REQUIRE(svrnn_corpus_write(c, gold) == SVRNN_OK);
  REQUIRE(svrnn_evaluate_labels(c, "chain", gold, &report) == SVRNN_OK);
  CHECK(take(report).find("\"sed\":0.0") != std::string::npos);
  CHECK(svrnn_evaluate_labels(c, "tree", gold, &report) == SVRNN_INVALID_ARGUMENT);
  CHECK(svrnn_evaluate_labels(c, "ring", gold, &report) == SVRNN_CONFIG);

  std::remove(ckpt);
  std::remove(gold);
  svrnn_model_free(m);
  svrnn_trainer_free(a);
  svrnn_trainer_free(b);
  svrnn_config_free(cfg);
  svrnn_config_free(saved);
  svrnn_corpus_free(c);
}
