#include "svrnn/corpus.hpp"

#include <fstream>

#include <json.hpp>

#include "svrnn/error.hpp"

namespace svrnn {

using Json = nlohmann::ordered_json;

std::string session_to_json(const DialogueSession& s) {
  Json j;
  j["id"] = s.id;
  Json turns = Json::array();
  for (const auto& u : s.turns) turns.push_back(Json{{"speaker", u.speaker}, {"text", u.text}});
  j["turns"] = std::move(turns);
  if (!s.gold_states.empty()) j["gold_states"] = s.gold_states;
  if (!s.gold_parents.empty()) j["gold_parents"] = s.gold_parents;
  return j.dump();
}

DialogueSession session_from_json(const std::string& line) {
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::kFormat, std::string("invalid JSON: ") + e.what());
  }
  require(j.is_object(), ErrorCode::kFormat, "record is not an object");
  DialogueSession s;
  try {
    require(j.contains("id"), ErrorCode::kFormat, "missing field 'id'");
    s.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
    require(j.contains("turns") && j.at("turns").is_array(), ErrorCode::kFormat, "missing or non-array 'turns'");
    for (const auto& t : j.at("turns")) {
      require(t.is_object() && t.contains("text") && t.at("text").is_string(), ErrorCode::kFormat,
              "turn lacks a string 'text'");
      Utterance u;
      u.text = t.at("text").get<std::string>();
      if (t.contains("speaker")) u.speaker = t.at("speaker").get<std::string>();
      s.turns.push_back(std::move(u));
    }
    if (j.contains("gold_states")) s.gold_states = j.at("gold_states").get<std::vector<int>>();
    if (j.contains("gold_parents")) s.gold_parents = j.at("gold_parents").get<std::vector<int>>();
  } catch (const Json::exception& e) {
    fail(ErrorCode::kFormat, std::string("bad field type: ") + e.what());
  }
  validate_session(s);
  return s;
}

void write_corpus(const std::string& path, const std::vector<DialogueSession>& corpus) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::kIo, "cannot write " + path);
  for (const auto& s : corpus) out << session_to_json(s) << '\n';
  require(out.good(), ErrorCode::kIo, "write to " + path + " failed");
}

std::vector<DialogueSession> read_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::kIo, "cannot read " + path);
  std::vector<DialogueSession> corpus;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      corpus.push_back(session_from_json(line));
    } catch (const Error& e) {
      fail(e.code(), path + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return corpus;
}

std::vector<std::vector<std::size_t>> exchanges(const DialogueSession& s) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < s.turns.size(); ++i) {
    if (out.empty() || s.turns[i].speaker == kSystemSpeaker) out.emplace_back();
    out.back().push_back(i);
  }
  return out;
}

std::vector<std::vector<std::string>> turn_tokens(const DialogueSession& s, Variant variant) {
  std::vector<std::vector<std::string>> out;
  if (variant == Variant::kTree) {
    for (const auto& u : s.turns) {
      std::vector<std::string> tokens = nn::tokenize(u.speaker);
      const auto t = nn::tokenize(u.text);
      tokens.insert(tokens.end(), t.begin(), t.end());
      out.push_back(std::move(tokens));
    }
    return out;
  }
  for (const auto& group : exchanges(s)) {
    std::vector<std::string> tokens;
    for (auto i : group) {
      const auto t = nn::tokenize(s.turns[i].text);
      tokens.insert(tokens.end(), t.begin(), t.end());
    }
    out.push_back(std::move(tokens));
  }
  return out;
}

void validate_session(const DialogueSession& s) {
  require(!s.turns.empty(), ErrorCode::kFormat, "dialogue '" + s.id + "' has no turns");
  for (const auto& u : s.turns)
    require(!nn::tokenize(u.text).empty(), ErrorCode::kFormat, "dialogue '" + s.id + "' has an empty utterance");
  if (!s.gold_states.empty()) {
    require(s.gold_states.size() == exchanges(s).size(), ErrorCode::kFormat,
            "dialogue '" + s.id + "' has " + std::to_string(s.gold_states.size()) + " gold states for " +
                std::to_string(exchanges(s).size()) + " exchanges");
    for (int g : s.gold_states) require(g >= 0, ErrorCode::kFormat, "negative gold state in '" + s.id + "'");
  }
  if (!s.gold_parents.empty()) {
    require(s.gold_parents.size() == s.turns.size(), ErrorCode::kFormat,
            "dialogue '" + s.id + "' needs one gold parent per utterance");
    require(s.gold_parents[0] == -1, ErrorCode::kFormat, "first utterance of '" + s.id + "' must be the root");
    for (std::size_t j = 1; j < s.gold_parents.size(); ++j)
      require(s.gold_parents[j] == -1 || (s.gold_parents[j] >= 0 && static_cast<std::size_t>(s.gold_parents[j]) < j),
              ErrorCode::kFormat, "gold parent must precede its child in '" + s.id + "'");
  }
}

}  // namespace svrnn
