#pragma once

// Flat key=value run configuration shared by the command-line tools.
// Values are applied in order (defaults, then a file, then flags), and
// problems are collected rather than thrown so a single validation pass can
// report all of them.

#include <cstdint>
#include <string>
#include <vector>

#include "svrnn/model.hpp"

namespace svrnn {

struct RunConfig {
  Variant variant = Variant::kChain;
  int states = 10;
  int hidden = 64;
  int embedding = 64;
  double dropout = 0.5;
  double learning_rate = 1e-3;
  double bow_weight = 0.5;
  bool batch_prior = true;
  bool mask_left_arcs = true;
  int batch_size = 16;
  int epochs = 60;
  double tau_start = 1.0;
  double tau_end = 0.3;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
  int checkpoint_every = 1;
  std::string corpus;
  std::string valid;
  std::string checkpoint;
  std::string output;

  /// Applies one setting. Unknown keys and unparsable values are recorded.
  void set(const std::string& key, const std::string& value);
  /// Reads `key = value` lines; '#' starts a comment. Throws kIo when the
  /// file cannot be read; malformed lines are recorded.
  void load_file(const std::string& path);
  /// Every recorded parse problem plus every range violation, in key order.
  std::vector<std::string> violations() const;
  /// Throws kConfig listing all violations, one per line.
  void validate() const;

  /// Current value of a key as text. Throws kConfig for unknown keys.
  std::string get(const std::string& key) const;
  /// All keys in canonical order.
  static const std::vector<std::string>& keys();
  /// One `key=value` line per key.
  std::string to_text() const;

  ModelConfig model_config() const;
  TrainConfig train_config() const;

 private:
  std::vector<std::string> problems_;
};

}  // namespace svrnn
