#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "svrnn/corpus.hpp"
#include "svrnn/error.hpp"

using namespace svrnn;

namespace {

DialogueSession sample() {
  DialogueSession s;
  s.id = "d1";
  s.turns = {{"sys", "How can I help?"}, {"usr", "Bus to CMU, please."}, {"sys", "Goodbye."}};
  s.gold_states = {0, 3};
  return s;
}

ErrorCode code_of(const std::string& line) {
  try {
    session_from_json(line);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("JSON round trip") {
  const DialogueSession s = sample();
  const std::string line = session_to_json(s);
  CHECK(line == R"({"id":"d1","turns":[{"speaker":"sys","text":"How can I help?"},{"speaker":"usr","text":"Bus to CMU, please."},{"speaker":"sys","text":"Goodbye."}],"gold_states":[0,3]})");
  CHECK(session_from_json(line) == s);

  DialogueSession multi;
  multi.id = "m";
  multi.turns = {{"p1", "a"}, {"p2", "b"}, {"p1", "c"}};
  multi.gold_parents = {-1, 0, 0};
  CHECK(session_from_json(session_to_json(multi)) == multi);
}

TEST_CASE("malformed records") {
  CHECK(code_of("{not json") == ErrorCode::kFormat);
  CHECK(code_of("[1,2]") == ErrorCode::kFormat);
  CHECK(code_of(R"({"turns":[{"text":"hi"}]})") == ErrorCode::kFormat);
  CHECK(code_of(R"({"id":"x","turns":[]})") == ErrorCode::kFormat);
  CHECK(code_of(R"({"id":"x","turns":[{"text":"hi"}],"gold_states":[0,1]})") == ErrorCode::kFormat);
  CHECK(code_of(R"({"id":"x","turns":[{"text":"a"},{"text":"b"}],"gold_parents":[-1,1]})") == ErrorCode::kFormat);
  CHECK(code_of(R"({"id":"x","turns":[{"text":"a"}],"gold_states":"zero"})") == ErrorCode::kFormat);
}

TEST_CASE("exchanges and turn tokens") {
  const DialogueSession s = sample();
  const auto ex = exchanges(s);
  REQUIRE(ex.size() == 2);
  CHECK(ex[0] == std::vector<std::size_t>{0, 1});
  CHECK(ex[1] == std::vector<std::size_t>{2});
  const auto chain = turn_tokens(s, Variant::kChain);
  CHECK(chain[0] == std::vector<std::string>{"how", "can", "i", "help", "?", "bus", "to", "cmu", ",", "please", "."});
  CHECK(turn_tokens(s, Variant::kTree).size() == 3);
}

TEST_CASE("corpus files") {
  const auto dir = std::filesystem::temp_directory_path() / "svrnn_corpus_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "c.jsonl").string();
  write_corpus(path, {sample(), sample()});
  CHECK(read_corpus(path).size() == 2);
  {
    std::ofstream out(path, std::ios::app);
    out << "\n{\"id\":\"bad\"}\n";
  }
  try {
    read_corpus(path);
    FAIL("expected a format error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kFormat);
    CHECK(std::string(e.what()).find(":4:") != std::string::npos);
  }
  CHECK_THROWS_AS(read_corpus((dir / "missing.jsonl").string()), Error);
  std::filesystem::remove_all(dir);
}
