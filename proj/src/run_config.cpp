#include "svrnn/run_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "svrnn/error.hpp"

namespace svrnn {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_number(const std::string& text, T& out) {
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end && !text.empty();
}

bool parse_bool(const std::string& text, bool& out) {
  if (text == "true" || text == "1" || text == "yes") {
    out = true;
    return true;
  }
  if (text == "false" || text == "0" || text == "no") {
    out = false;
    return true;
  }
  return false;
}

std::string number_text(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

const std::vector<std::string>& RunConfig::keys() {
  static const std::vector<std::string> k{
      "variant",    "states",       "hidden",     "embedding", "dropout", "learning_rate", "bow_weight",
      "batch_prior", "mask_left_arcs", "batch_size", "epochs",    "tau_start", "tau_end",     "clip_norm",
      "seed",       "checkpoint_every", "corpus",  "valid",     "checkpoint", "output"};
  return k;
}

void RunConfig::set(const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  auto bad = [&](const char* expected) {
    problems_.push_back(key + ": expected " + expected + ", got '" + value + "'");
  };
  auto integer = [&](int& field) {
    if (!parse_number(value, field)) bad("an integer");
  };
  auto real = [&](double& field) {
    double v = 0.0;
    if (parse_number(value, v) && std::isfinite(v)) field = v;
    else bad("a finite number");
  };
  auto flag = [&](bool& field) {
    if (!parse_bool(value, field)) bad("true or false");
  };

  if (key == "variant") {
    if (value == "chain") variant = Variant::kChain;
    else if (value == "tree") variant = Variant::kTree;
    else bad("chain or tree");
  } else if (key == "states") integer(states);
  else if (key == "hidden") integer(hidden);
  else if (key == "embedding") integer(embedding);
  else if (key == "dropout") real(dropout);
  else if (key == "learning_rate") real(learning_rate);
  else if (key == "bow_weight") real(bow_weight);
  else if (key == "batch_prior") flag(batch_prior);
  else if (key == "mask_left_arcs") flag(mask_left_arcs);
  else if (key == "batch_size") integer(batch_size);
  else if (key == "epochs") integer(epochs);
  else if (key == "tau_start") real(tau_start);
  else if (key == "tau_end") real(tau_end);
  else if (key == "clip_norm") real(clip_norm);
  else if (key == "seed") {
    if (!parse_number(value, seed)) bad("a non-negative integer");
  } else if (key == "checkpoint_every") integer(checkpoint_every);
  else if (key == "corpus") corpus = value;
  else if (key == "valid") valid = value;
  else if (key == "checkpoint") checkpoint = value;
  else if (key == "output") output = value;
  else problems_.push_back("unknown key '" + key + "'");
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot read config file '" + path + "'");
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      problems_.push_back(path + ":" + std::to_string(n) + ": expected key = value");
      continue;
    }
    set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

std::vector<std::string> RunConfig::violations() const {
  std::vector<std::string> v = problems_;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) v.push_back(what);
  };
  check(states >= 1 && states <= 1000, "states must be in [1, 1000], got " + std::to_string(states));
  check(hidden >= 1 && hidden <= 4096, "hidden must be in [1, 4096], got " + std::to_string(hidden));
  check(embedding >= 1 && embedding <= 4096, "embedding must be in [1, 4096], got " + std::to_string(embedding));
  check(dropout >= 0.0 && dropout < 1.0, "dropout must be in [0, 1), got " + number_text(dropout));
  check(learning_rate >= 0.0 && learning_rate <= 1.0,
        "learning_rate must be in [0, 1], got " + number_text(learning_rate));
  check(bow_weight >= 0.0, "bow_weight must be >= 0, got " + number_text(bow_weight));
  check(batch_size >= 1, "batch_size must be >= 1, got " + std::to_string(batch_size));
  check(epochs >= 0, "epochs must be >= 0, got " + std::to_string(epochs));
  check(tau_start > 0.0, "tau_start must be > 0, got " + number_text(tau_start));
  check(tau_end > 0.0, "tau_end must be > 0, got " + number_text(tau_end));
  check(clip_norm >= 0.0, "clip_norm must be >= 0, got " + number_text(clip_norm));
  check(checkpoint_every >= 1, "checkpoint_every must be >= 1, got " + std::to_string(checkpoint_every));
  return v;
}

void RunConfig::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::string msg = std::to_string(v.size()) + " configuration problem" + (v.size() == 1 ? "" : "s") + ":";
  for (const auto& line : v) msg += "\n  " + line;
  fail(ErrorCode::kConfig, msg);
}

std::string RunConfig::get(const std::string& key) const {
  if (key == "variant") return variant_name(variant);
  if (key == "states") return std::to_string(states);
  if (key == "hidden") return std::to_string(hidden);
  if (key == "embedding") return std::to_string(embedding);
  if (key == "dropout") return number_text(dropout);
  if (key == "learning_rate") return number_text(learning_rate);
  if (key == "bow_weight") return number_text(bow_weight);
  if (key == "batch_prior") return batch_prior ? "true" : "false";
  if (key == "mask_left_arcs") return mask_left_arcs ? "true" : "false";
  if (key == "batch_size") return std::to_string(batch_size);
  if (key == "epochs") return std::to_string(epochs);
  if (key == "tau_start") return number_text(tau_start);
  if (key == "tau_end") return number_text(tau_end);
  if (key == "clip_norm") return number_text(clip_norm);
  if (key == "seed") return std::to_string(seed);
  if (key == "checkpoint_every") return std::to_string(checkpoint_every);
  if (key == "corpus") return corpus;
  if (key == "valid") return valid;
  if (key == "checkpoint") return checkpoint;
  if (key == "output") return output;
  fail(ErrorCode::kConfig, "unknown key '" + key + "'");
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& k : keys()) out += k + "=" + get(k) + "\n";
  return out;
}

ModelConfig RunConfig::model_config() const {
  ModelConfig m;
  m.variant = variant;
  m.num_states = states;
  m.hidden = hidden;
  m.embedding = embedding;
  m.dropout = dropout;
  m.bow_weight = bow_weight;
  m.batch_prior = batch_prior;
  m.mask_left_arcs = mask_left_arcs;
  return m;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.learning_rate = learning_rate;
  t.batch_size = batch_size;
  t.epochs = epochs;
  t.tau_start = tau_start;
  t.tau_end = tau_end;
  t.clip_norm = clip_norm;
  t.seed = seed;
  return t;
}

}  // namespace svrnn
