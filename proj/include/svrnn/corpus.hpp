#pragma once

// Dialogue records and their line-delimited JSON form: one dialogue per line
// with fields id, turns [{speaker, text}], and optional gold_states /
// gold_parents.

#include <string>
#include <vector>

#include "svrnn/model.hpp"

namespace svrnn {

struct Utterance {
  std::string speaker;
  std::string text;

  bool operator==(const Utterance&) const = default;
};

struct DialogueSession {
  std::string id;
  std::vector<Utterance> turns;
  std::vector<int> gold_states;   // one per exchange, empty when unlabeled
  std::vector<int> gold_parents;  // one per utterance, -1 for the root; empty when unlabeled

  bool operator==(const DialogueSession&) const = default;
};

inline constexpr const char* kSystemSpeaker = "sys";
inline constexpr const char* kUserSpeaker = "usr";

std::string session_to_json(const DialogueSession& s);
/// Throws kFormat naming the offending field.
DialogueSession session_from_json(const std::string& line);

void write_corpus(const std::string& path, const std::vector<DialogueSession>& corpus);
/// Throws kIo when unreadable and kFormat with the line number on bad records.
std::vector<DialogueSession> read_corpus(const std::string& path);

/// Utterance indices grouped into exchanges: each system utterance opens a
/// new exchange and following user utterances join it.
std::vector<std::vector<std::size_t>> exchanges(const DialogueSession& s);

/// Tokens per model turn: exchanges for the chain variant, utterances for
/// the tree variant.
std::vector<std::vector<std::string>> turn_tokens(const DialogueSession& s, Variant variant);

/// Checks label shapes against the dialogue; throws kFormat.
void validate_session(const DialogueSession& s);

}  // namespace svrnn
