#include <fstream>

#include "doctest.h"
#include "svrnn/error.hpp"
#include "svrnn/run_config.hpp"

using namespace svrnn;

TEST_CASE("defaults validate and round-trip through text") {
  RunConfig c;
  CHECK(c.violations().empty());
  CHECK_NOTHROW(c.validate());
  const std::string text = c.to_text();
  CHECK(text.find("variant=chain\n") != std::string::npos);
  CHECK(text.find("states=10\n") != std::string::npos);
  CHECK(text.find("batch_prior=true\n") != std::string::npos);

  RunConfig d;
  for (const auto& k : RunConfig::keys()) d.set(k, c.get(k));
  CHECK(d.violations().empty());
  CHECK(d.to_text() == text);
}

TEST_CASE("set parses every kind of value") {
  RunConfig c;
  c.set("variant", " tree ");
  c.set("states", "12");
  c.set("dropout", "0.25");
  c.set("batch_prior", "false");
  c.set("seed", "18446744073709551615");
  c.set("corpus", "data/train.jsonl");
  CHECK(c.violations().empty());
  CHECK(c.variant == Variant::kTree);
  CHECK(c.states == 12);
  CHECK(c.dropout == doctest::Approx(0.25));
  CHECK_FALSE(c.batch_prior);
  CHECK(c.seed == 18446744073709551615ull);
  CHECK(c.model_config().num_states == 12);
  CHECK(c.model_config().variant == Variant::kTree);
  CHECK(c.train_config().seed == c.seed);
  CHECK(c.get("corpus") == "data/train.jsonl");
  CHECK_THROWS_AS(c.get("nope"), Error);
}

TEST_CASE("all problems are reported together") {
  RunConfig c;
  c.set("states", "0");
  c.set("dropout", "1.0");
  c.set("hidden", "sixty");
  c.set("variant", "graph");
  c.set("colour", "blue");
  c.set("batch_prior", "maybe");
  c.set("seed", "-1");
  c.set("tau_end", "nan");
  const auto v = c.violations();
  CHECK(v.size() == 8);
  try {
    c.validate();
    FAIL("validate should throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConfig);
    const std::string msg = e.what();
    CHECK(msg.find("8 configuration problems") != std::string::npos);
    CHECK(msg.find("unknown key 'colour'") != std::string::npos);
    CHECK(msg.find("states must be in [1, 1000]") != std::string::npos);
    CHECK(msg.find("dropout must be in [0, 1)") != std::string::npos);
  }
}

TEST_CASE("config files") {
  const std::string path = "test_run_config.cfg";
  {
    std::ofstream out(path);
    out << "# comment\n\nstates = 7\nlearning_rate=0.01  # trailing\nthis line is wrong\n";
  }
  RunConfig c;
  c.load_file(path);
  CHECK(c.states == 7);
  CHECK(c.learning_rate == doctest::Approx(0.01));
  const auto v = c.violations();
  REQUIRE(v.size() == 1);
  CHECK(v[0] == path + ":5: expected key = value");
  CHECK_THROWS_AS(c.load_file("does/not/exist.cfg"), Error);
  std::remove(path.c_str());
}
