#include <cmath>
#include <set>

#include "doctest.h"
#include "svrnn/error.hpp"
#include "svrnn/simdial_gen.hpp"

using namespace svrnn;

TEST_CASE("built-in domains are valid") {
  for (const auto& name : builtin_domain_names()) {
    const DomainSpec d = builtin_domain(name);
    CHECK_NOTHROW(d.validate());
    CHECK(d.size() >= 6);
    CHECK(d.size() <= 9);
    for (const auto& s : d.states) CHECK(!s.system.empty());
  }
  CHECK_THROWS_AS(builtin_domain("pirates"), Error);
}

TEST_CASE("domain validation") {
  DomainSpec d = builtin_domain("bus");
  d.transitions(0, 1) += 0.1;
  CHECK_THROWS_AS(d.validate(), Error);
  d = builtin_domain("bus");
  d.states[2].system.clear();
  CHECK_THROWS_AS(d.validate(), Error);
  d = builtin_domain("bus");
  d.states[2].user.push_back("to {x:nowhere}");
  CHECK_THROWS_AS(generate_two_party(d, 1, 0), Error);
}

TEST_CASE("two-party generation") {
  const DomainSpec bus = builtin_domain("bus");
  CHECK(generate_two_party(bus, 0, 1).empty());

  SUBCASE("reproducible per seed") {
    CHECK(generate_two_party(bus, 20, 5) == generate_two_party(bus, 20, 5));
    CHECK(!(generate_two_party(bus, 20, 5) == generate_two_party(bus, 20, 6)));
  }
  SUBCASE("length and label invariants") {
    for (const auto& name : builtin_domain_names()) {
      const DomainSpec d = builtin_domain(name);
      for (const auto& s : generate_two_party(d, 500, 3)) {
        CHECK(s.turns.size() >= 6);
        CHECK(s.turns.size() <= 13);
        CHECK(s.gold_states.size() == exchanges(s).size());
        CHECK(s.gold_states.front() == d.initial);
        CHECK(s.gold_states.back() == d.terminal);
        for (int g : s.gold_states) {
          CHECK(g >= 0);
          CHECK(g < d.size());
        }
        for (const auto& u : s.turns) CHECK(nn::tokenize(u.text).size() <= 33);
        CHECK_NOTHROW(validate_session(s));
      }
    }
  }
  SUBCASE("two-state chain always gives the same sequence") {
    DomainSpec d;
    d.name = "tiny";
    d.states = {{"greet", {"hello."}, {"hi."}}, {"goodbye", {"bye."}, {}}};
    d.transitions.resize(2, 2);
    d.transitions << 0.0, 1.0, 0.5, 0.5;
    d.initial = 0;
    d.terminal = 1;
    for (const auto& s : generate_two_party(d, 50, 9)) CHECK(s.gold_states == std::vector<int>{0, 1});
  }
}

TEST_CASE("recovered truth matrix") {
  const DomainSpec bus = builtin_domain("bus");
  SUBCASE("single dialogue gives exact bigram counts") {
    const auto one = generate_two_party(bus, 1, 4);
    const auto t = recover_truth_matrix(one, bus.size());
    CHECK(t == estimate_transitions({one[0].gold_states}, bus.size()));
    const auto& g = one[0].gold_states;
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(t(g[i - 1], g[i]) == 1.0);
  }
  SUBCASE("matches the authored domain over 5000 dialogues") {
    for (const auto& name : builtin_domain_names()) {
      const DomainSpec d = builtin_domain(name);
      const auto t = recover_truth_matrix(generate_two_party(d, 5000, 2024), d.size());
      INFO(name);
      CHECK((t - d.transitions).cwiseAbs().maxCoeff() <= 0.02);
    }
  }
  SUBCASE("missing labels") {
    auto corpus = generate_two_party(bus, 2, 4);
    corpus[1].gold_states.clear();
    CHECK_THROWS_AS(recover_truth_matrix(corpus, bus.size()), Error);
  }
}

TEST_CASE("multi-party generation") {
  CHECK_THROWS_AS(generate_multi_party(1, 5, 0), Error);
  CHECK(generate_multi_party(3, 10, 1) == generate_multi_party(3, 10, 1));

  const auto corpus = generate_multi_party(4, 1000, 7);
  double parent_overlap = 0.0, other_overlap = 0.0;
  std::size_t parent_n = 0, other_n = 0;
  std::size_t replies = 0, addressed = 0, misaddressed = 0;
  // How often a reply attaches to an earlier question vs an earlier statement.
  std::size_t q_cand = 0, q_chosen = 0, s_cand = 0, s_chosen = 0;
  for (const auto& s : corpus) {
    CHECK(s.turns.size() >= 7);
    CHECK(s.turns.size() <= 8);
    REQUIRE(s.gold_parents.size() == s.turns.size());
    CHECK(s.gold_parents[0] == -1);
    CHECK(s.gold_parents[1] == 0);
    for (std::size_t j = 1; j < s.turns.size(); ++j) {
      const int p = s.gold_parents[j];
      CHECK(p >= 0);
      CHECK(p < static_cast<int>(j));
      CHECK(s.turns[j].speaker != s.turns[static_cast<std::size_t>(p)].speaker);
      ++replies;
      const std::string& text = s.turns[j].text;
      if (text.rfind("p", 0) == 0 && text.find(" : ") != std::string::npos) {
        const std::string name = text.substr(0, text.find(" : "));
        if (name == s.turns[static_cast<std::size_t>(p)].speaker) ++addressed;
        else ++misaddressed;
      }
      for (std::size_t i = 1; i + 1 < j; ++i) {
        const bool question = s.turns[i].text.back() == '?';
        const bool chosen = static_cast<int>(i) == p;
        (question ? q_cand : s_cand) += 1;
        (question ? q_chosen : s_chosen) += chosen ? 1 : 0;
      }
      for (std::size_t i = 0; i < j; ++i) {
        const double o = lexical_overlap(s.turns[j].text, s.turns[i].text);
        if (static_cast<int>(i) == p) {
          parent_overlap += o;
          ++parent_n;
        } else {
          other_overlap += o;
          ++other_n;
        }
      }
    }
    for (const auto& u : s.turns) CHECK(nn::tokenize(u.text).size() <= 33);
    CHECK_NOTHROW(validate_session(s));
  }
  CHECK(parent_overlap / parent_n > other_overlap / other_n);
  CHECK(misaddressed == 0);
  const double address_rate = static_cast<double>(addressed) / static_cast<double>(replies);
  CHECK(address_rate > 0.6);
  CHECK(address_rate < 0.8);
  REQUIRE(q_cand > 0);
  REQUIRE(s_cand > 0);
  CHECK(static_cast<double>(q_chosen) / q_cand > 2.0 * static_cast<double>(s_chosen) / s_cand);
}

TEST_CASE("split sizes") {
  const auto corpus = generate_two_party(builtin_domain("weather"), 1000, 1);
  const CorpusSplit s = split_corpus(corpus);
  CHECK(s.train.size() == 800);
  CHECK(s.valid.size() == 100);
  CHECK(s.test.size() == 100);
  CHECK(s.train.front() == corpus.front());
  CHECK(s.test.back() == corpus.back());
}

TEST_CASE("lexical overlap") {
  CHECK(lexical_overlap("a b c", "a b c") == 1.0);
  CHECK(lexical_overlap("a b", "c d") == 0.0);
  CHECK(lexical_overlap("a b", "b c") == doctest::Approx(1.0 / 3));
}
