#include "svrnn/simdial_gen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "svrnn/error.hpp"
#include "svrnn/model.hpp"
#include "svrnn/neural.hpp"

namespace svrnn {

namespace {

struct Edge {
  const char* from;
  const char* to;
  double p;
};

int state_index(const std::vector<StateSpec>& states, const std::string& name) {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i].name == name) return static_cast<int>(i);
  fail(ErrorCode::kInvalidArgument, "unknown state '" + name + "'");
}

DomainSpec make_domain(std::string name, std::vector<StateSpec> states, const std::vector<Edge>& edges,
                       std::map<std::string, std::vector<std::string>> slots) {
  DomainSpec d;
  d.name = std::move(name);
  d.states = std::move(states);
  d.slots = std::move(slots);
  const int n = d.size();
  d.initial = 0;
  d.terminal = n - 1;
  d.transitions = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : edges) d.transitions(state_index(d.states, e.from), state_index(d.states, e.to)) = e.p;
  d.transitions.row(d.terminal).setConstant(1.0 / n);
  d.validate();
  return d;
}

const std::vector<std::string> kGoodbye{"goodbye.", "have a nice day. goodbye.", "thanks for calling. goodbye."};
const std::vector<std::string> kYes{"yes.", "yes, that is right.", "correct.", "that is it."};
const std::vector<std::string> kAck{"ok.", "got it.", "great, thanks.", "sounds good."};

DomainSpec bus() {
  return make_domain(
      "bus",
      {
          {"greet",
           {"ask me about bus information. how can i help?", "welcome to the bus line. how can i help you?",
            "hello, this is the bus information system. what do you need?"},
           {"hi. i need a bus from {from:place}.", "i want to take a bus, leaving from {from:place}.",
            "hello. i am at {from:place} and need a bus."}},
          {"confirm_from", {"did you say {from:place}?", "just to confirm, is it {from:place}?"}, kYes},
          {"ask_to",
           {"where are you going?", "what is your destination?", "where do you want to go?"},
           {"going to {to:place}.", "i want to go to {to:place}.", "to {to:place}, please."}},
          {"confirm_to", {"did you say {to:place}?", "just to confirm, is it {to:place}?"}, kYes},
          {"ask_time",
           {"what time do you need the bus?", "when do you want to leave?"},
           {"departure time is {time:time}.", "at {time:time}.", "around {time:time}, please."}},
          {"inform",
           {"bus {bus:bus} can take you there. what else can i do?", "take bus {bus:bus} from {from:place}.",
            "bus {bus:bus} leaves soon and stops at {to:place}."},
           kAck},
          {"followup",
           {"anything else i can help with?", "is there anything else?"},
           {"how long is the ride?", "is the bus on time?", "how much is the fare?"}},
          {"goodbye", kGoodbye, {}},
      },
      {{"greet", "confirm_from", 0.35},
       {"greet", "ask_to", 0.65},
       {"confirm_from", "ask_to", 1.0},
       {"ask_to", "confirm_to", 0.35},
       {"ask_to", "ask_time", 0.65},
       {"confirm_to", "inform", 1.0},
       {"ask_time", "inform", 1.0},
       {"inform", "followup", 0.4},
       {"inform", "goodbye", 0.6},
       {"followup", "goodbye", 1.0}},
      {{"place",
        {"downtown", "the airport", "cmu", "lawrence", "oakland", "squirrel hill", "the waterfront", "shadyside",
         "the stadium", "east liberty", "bloomfield", "the library", "south side", "the zoo", "market square"}},
       {"time", {"7 am", "8 am", "9 am", "10 am", "noon", "1 pm", "3 pm", "5 pm", "6 pm", "9 pm", "midnight"}},
       {"bus", {"12", "28x", "54", "61c", "71a", "137", "500", "p1", "g2", "86"}}});
}

DomainSpec restaurant() {
  return make_domain(
      "restaurant",
      {
          {"greet",
           {"welcome to the restaurant finder. how can i help?", "hello, looking for somewhere to eat?"},
           {"i am hungry. find me food in {area:area}.", "hi. i want to eat somewhere in {area:area}.",
            "i need a restaurant near {area:area}."}},
          {"confirm_area", {"did you say {area:area}?", "so that is {area:area}, right?"}, kYes},
          {"ask_food",
           {"what kind of food do you like?", "which cuisine are you in the mood for?"},
           {"{food:food} food, please.", "i would like {food:food}.", "something {food:food}."}},
          {"confirm_food", {"did you say {food:food}?", "so that is {food:food}, right?"}, kYes},
          {"ask_price",
           {"what price range?", "how much do you want to spend?"},
           {"something {price:price}.", "{price:price} is fine.", "i prefer {price:price} places."}},
          {"inform",
           {"{name:name} serves {food:food} food in {area:area}.", "try {name:name}. it is {price:price}.",
            "{name:name} is a good {food:food} place."},
           kAck},
          {"followup",
           {"anything else i can help with?", "is there anything else?"},
           {"what is the phone number?", "do they take reservations?", "when do they close?"}},
          {"goodbye", kGoodbye, {}},
      },
      {{"greet", "confirm_area", 0.3},
       {"greet", "ask_food", 0.7},
       {"confirm_area", "ask_food", 1.0},
       {"ask_food", "confirm_food", 0.4},
       {"ask_food", "ask_price", 0.6},
       {"confirm_food", "inform", 1.0},
       {"ask_price", "inform", 1.0},
       {"inform", "followup", 0.45},
       {"inform", "goodbye", 0.55},
       {"followup", "goodbye", 1.0}},
      {{"area", {"the north side", "downtown", "the east end", "the west end", "the harbor", "old town",
                 "the university district", "midtown", "the riverside", "the market"}},
       {"food", {"italian", "thai", "chinese", "mexican", "indian", "french", "korean", "greek", "vegan",
                 "japanese", "spanish", "turkish"}},
       {"price", {"cheap", "moderate", "expensive", "mid-range", "affordable"}},
       {"name", {"the golden fork", "lucky star", "casa verde", "the olive tree", "blue lotus", "spice garden",
                 "the corner bistro", "sakura", "el toro", "the blue door"}}});
}

DomainSpec weather() {
  return make_domain(
      "weather",
      {
          {"greet",
           {"this is the weather service. how can i help?", "hello, want a weather forecast?"},
           {"what is the weather in {city:city}?", "hi. i want the forecast for {city:city}.",
            "tell me the weather for {city:city}."}},
          {"confirm_city", {"did you say {city:city}?", "so that is {city:city}, right?"}, kYes},
          {"ask_day",
           {"which day?", "for what day do you need the forecast?"},
           {"{day:day}, please.", "for {day:day}.", "i need it for {day:day}."}},
          {"confirm_day", {"did you say {day:day}?", "so that is {day:day}, right?"}, kYes},
          {"inform",
           {"it will be {sky:sky} in {city:city}.", "expect {sky:sky} weather {day:day}.",
            "the forecast says {sky:sky} with a high of {temp:temp}."},
           kAck},
          {"followup",
           {"anything else i can help with?", "is there anything else?"},
           {"will it be windy?", "how about the humidity?", "should i bring an umbrella?"}},
          {"goodbye", kGoodbye, {}},
      },
      {{"greet", "confirm_city", 0.4},
       {"greet", "ask_day", 0.6},
       {"confirm_city", "ask_day", 1.0},
       {"ask_day", "confirm_day", 0.3},
       {"ask_day", "inform", 0.7},
       {"confirm_day", "inform", 1.0},
       {"inform", "followup", 0.35},
       {"inform", "goodbye", 0.65},
       {"followup", "goodbye", 1.0}},
      {{"city", {"seattle", "boston", "denver", "chicago", "austin", "miami", "portland", "atlanta", "phoenix",
                 "detroit", "houston", "san diego"}},
       {"day", {"today", "tomorrow", "monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"}},
       {"sky", {"sunny", "cloudy", "rainy", "snowy", "foggy", "stormy", "clear", "windy"}},
       {"temp", {"50 degrees", "60 degrees", "70 degrees", "80 degrees", "90 degrees", "40 degrees"}}});
}

DomainSpec movie() {
  return make_domain(
      "movie",
      {
          {"greet",
           {"welcome to the movie guide. how can i help?", "hello, looking for a movie?"},
           {"i want to see a movie at {theater:theater}.", "hi. what is playing at {theater:theater}?",
            "i am going to {theater:theater} tonight."}},
          {"confirm_theater", {"did you say {theater:theater}?", "so that is {theater:theater}, right?"}, kYes},
          {"ask_genre",
           {"what kind of movie do you like?", "which genre do you want?"},
           {"a {genre:genre} movie.", "something {genre:genre}, please.", "i like {genre:genre}."}},
          {"confirm_genre", {"did you say {genre:genre}?", "so that is {genre:genre}, right?"}, kYes},
          {"ask_time",
           {"what time do you want to go?", "which showtime works for you?"},
           {"around {show:show}.", "the {show:show} show.", "at {show:show}, please."}},
          {"inform",
           {"{title:title} is playing at {theater:theater}.", "you could see {title:title}. it is {genre:genre}.",
            "{title:title} starts at {show:show}."},
           kAck},
          {"followup",
           {"anything else i can help with?", "is there anything else?"},
           {"how long is the movie?", "how much are tickets?", "is there parking?"}},
          {"goodbye", kGoodbye, {}},
      },
      {{"greet", "confirm_theater", 0.3},
       {"greet", "ask_genre", 0.7},
       {"confirm_theater", "ask_genre", 1.0},
       {"ask_genre", "confirm_genre", 0.35},
       {"ask_genre", "ask_time", 0.65},
       {"confirm_genre", "inform", 1.0},
       {"ask_time", "inform", 1.0},
       {"inform", "followup", 0.5},
       {"inform", "goodbye", 0.5},
       {"followup", "goodbye", 1.0}},
      {{"theater", {"the regal", "the grand", "cinema one", "the palace", "the strand", "the rex", "the majestic",
                    "the odeon"}},
       {"genre", {"comedy", "horror", "action", "drama", "romance", "thriller", "animated", "documentary"}},
       {"show", {"6 pm", "7 pm", "8 pm", "9 pm", "10 pm", "noon", "4 pm"}},
       {"title", {"night train", "the last harbor", "paper moons", "red canyon", "little giants", "deep water",
                  "the quiet hour", "iron garden", "silver lining", "cold front"}}});
}

/// Replaces {variable:list} placeholders, drawing each variable once.
std::string realize(const std::string& tmpl, const DomainSpec& spec, std::map<std::string, std::string>& bound,
                    std::mt19937_64& rng) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] != '{') {
      out.push_back(tmpl[i++]);
      continue;
    }
    const std::size_t close = tmpl.find('}', i);
    const std::string inner = tmpl.substr(i + 1, close - i - 1);
    const std::size_t colon = inner.find(':');
    const std::string var = inner.substr(0, colon), list = inner.substr(colon + 1);
    auto it = bound.find(var);
    if (it == bound.end()) {
      const auto& values = spec.slots.at(list);
      std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
      it = bound.emplace(var, values[pick(rng)]).first;
    }
    out += it->second;
    i = close + 1;
  }
  return out;
}

template <typename T>
const T& choose(const std::vector<T>& v, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, v.size() - 1);
  return v[pick(rng)];
}

int sample_row(const Eigen::MatrixXd& t, int row, std::mt19937_64& rng) {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  int last = 0;
  for (int b = 0; b < t.cols(); ++b) {
    if (t(row, b) <= 0.0) continue;
    acc += t(row, b);
    last = b;
    if (u < acc) return b;
  }
  return last;
}

constexpr int kMaxExchanges = 64;

std::uint64_t name_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// ---- multi-party material ----

const std::vector<std::string> kKeywords{
    "grub",     "kernel",   "wifi",     "driver",   "nvidia",   "xorg",     "apt",      "dpkg",     "partition",
    "fstab",    "sudo",     "bios",     "ssh",      "firewall", "samba",    "cron",     "systemd",  "bluetooth",
    "sound",    "pulseaudio", "gnome",  "kde",      "unity",    "compiz",   "vim",      "emacs",    "python",
    "java",     "flash",    "firefox",  "chrome",   "thunderbird", "network", "ethernet", "router", "dns",
    "proxy",    "swap",     "raid",     "lvm",      "ext4",     "ntfs",     "usb",      "printer",  "cups",
    "webcam",   "touchpad", "monitor",  "resolution", "livecd", "installer", "upgrade", "repository", "ppa",
    "keyring",  "password", "login",    "lightdm",  "terminal", "bash",     "permissions", "mount", "encryption",
    "backup",   "rsync",    "virtualbox", "wine",   "steam",    "codec",    "vlc",      "mysql",    "apache"};

// Share of replies that open by naming the parent's speaker, as in chat logs.
constexpr double kAddressRate = 0.7;
// Questions (and the opening post) draw replies this many times more often
// than statements at the same distance.
constexpr double kQuestionPull = 4.0;

bool is_question(const std::string& text) { return !text.empty() && text.back() == '?'; }

const std::vector<std::string> kRootTemplates{
    "how do i get {a} working with {b} ?",
    "anyone know why {a} breaks after updating {b} ?",
    "my {a} stopped working since i touched {b}",
    "is there a way to configure {a} without {b} ?",
    "help , {a} fails whenever {b} starts",
    "what is the best way to set up {a} and {b} ?"};

const std::vector<std::string> kReplyTemplates{
    "did you check {p} before changing {n} ?",
    "try reinstalling {p} , then look at {n}",
    "{p} needs {n} configured first",
    "i had the same {p} problem , it was {n}",
    "your {p} issue sounds like {n} to me",
    "check the {p} logs and the {n} settings",
    "{p} works fine here , maybe {n} is broken",
    "no , {p} does not depend on {n}",
    "thanks , the {p} fix with {n} worked",
    "you could remove {p} and use {n} instead",
    "does {p} still fail after you restart {n} ?",
    "which version of {p} do you have with {n} ?",
    "why would {p} need {n} at all ?"};

const std::vector<std::string> kDoubleReplyTemplates{
    "so {p} and {q} both fail with {n} ?",
    "if {p} is fine then {q} must be the problem , try {n}",
    "{p} and {q} are unrelated , look at {n}"};

std::string fill(const std::string& tmpl, const std::map<char, std::string>& values) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '{' && i + 2 < tmpl.size() && tmpl[i + 2] == '}') {
      out += values.at(tmpl[i + 1]);
      i += 2;
    } else {
      out.push_back(tmpl[i]);
    }
  }
  return out;
}

}  // namespace

void DomainSpec::validate() const {
  const int n = size();
  require(n >= 1, ErrorCode::kInvalidArgument, "domain '" + name + "' has no states");
  require(transitions.rows() == n && transitions.cols() == n, ErrorCode::kInvalidArgument,
          "domain '" + name + "': transition matrix must be " + std::to_string(n) + "x" + std::to_string(n));
  require(initial >= 0 && initial < n && terminal >= 0 && terminal < n, ErrorCode::kInvalidArgument,
          "domain '" + name + "': initial/terminal state out of range");
  std::set<std::string> names;
  for (int a = 0; a < n; ++a) {
    const StateSpec& s = states[static_cast<std::size_t>(a)];
    require(names.insert(s.name).second, ErrorCode::kInvalidArgument, "duplicate state name '" + s.name + "'");
    require(!s.system.empty(), ErrorCode::kInvalidArgument, "state '" + s.name + "' has no system template");
    double sum = 0.0;
    for (int b = 0; b < n; ++b) {
      require(transitions(a, b) >= 0.0, ErrorCode::kInvalidArgument, "negative transition from '" + s.name + "'");
      sum += transitions(a, b);
    }
    require(std::abs(sum - 1.0) < 1e-9, ErrorCode::kInvalidArgument,
            "transitions from '" + s.name + "' sum to " + std::to_string(sum));
    for (const auto* group : {&s.system, &s.user})
      for (const auto& t : *group) {
        for (std::size_t i = t.find('{'); i != std::string::npos; i = t.find('{', i + 1)) {
          const std::size_t close = t.find('}', i);
          require(close != std::string::npos, ErrorCode::kInvalidArgument, "unclosed placeholder in '" + t + "'");
          const std::string inner = t.substr(i + 1, close - i - 1);
          const std::size_t colon = inner.find(':');
          require(colon != std::string::npos, ErrorCode::kInvalidArgument,
                  "placeholder '" + inner + "' lacks a slot list");
          const auto list = slots.find(inner.substr(colon + 1));
          require(list != slots.end() && !list->second.empty(), ErrorCode::kInvalidArgument,
                  "unknown or empty slot list '" + inner.substr(colon + 1) + "'");
        }
      }
  }
}

const std::vector<std::string>& builtin_domain_names() {
  static const std::vector<std::string> names{"bus", "restaurant", "weather", "movie"};
  return names;
}

DomainSpec builtin_domain(const std::string& name) {
  if (name == "bus") return bus();
  if (name == "restaurant") return restaurant();
  if (name == "weather") return weather();
  if (name == "movie") return movie();
  fail(ErrorCode::kInvalidArgument, "unknown domain '" + name + "' (expected bus, restaurant, weather, or movie)");
}

std::vector<DialogueSession> generate_two_party(const DomainSpec& spec, std::size_t count, std::uint64_t seed) {
  spec.validate();
  std::vector<DialogueSession> out;
  out.reserve(count);
  const std::uint64_t stream = name_hash(spec.name);
  for (std::size_t i = 0; i < count; ++i) {
    std::mt19937_64 rng(derive_seed(seed, {stream, i}));
    DialogueSession s;
    char id[96];
    std::snprintf(id, sizeof id, "%s-%06zu", spec.name.c_str(), i);
    s.id = id;
    std::map<std::string, std::string> bound;
    int state = spec.initial;
    for (int step = 0;; ++step) {
      require(step < kMaxExchanges, ErrorCode::kInfeasible,
              "domain '" + spec.name + "' did not reach its terminal state");
      const StateSpec& st = spec.states[static_cast<std::size_t>(state)];
      s.gold_states.push_back(state);
      s.turns.push_back({kSystemSpeaker, realize(choose(st.system, rng), spec, bound, rng)});
      if (!st.user.empty()) s.turns.push_back({kUserSpeaker, realize(choose(st.user, rng), spec, bound, rng)});
      if (state == spec.terminal) break;
      state = sample_row(spec.transitions, state, rng);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<DialogueSession> generate_multi_party(int speakers, std::size_t count, std::uint64_t seed) {
  require(speakers >= 2, ErrorCode::kInvalidArgument, "multi-party dialogues need at least 2 speakers");
  std::vector<DialogueSession> out;
  out.reserve(count);
  for (std::size_t d = 0; d < count; ++d) {
    std::mt19937_64 rng(derive_seed(seed, {d, 0x3A9ULL}));
    DialogueSession s;
    char id[64];
    std::snprintf(id, sizeof id, "multi-%06zu", d);
    s.id = id;
    const int n = std::uniform_int_distribution<int>(kMultiPartyMinUtterances, kMultiPartyMaxUtterances)(rng);
    std::vector<int> speaker(static_cast<std::size_t>(n));
    std::vector<std::vector<std::string>> keywords(static_cast<std::size_t>(n));
    std::set<std::string> used;
    auto fresh = [&] {
      std::string k;
      do k = choose(kKeywords, rng);
      while (used.count(k) > 0);
      used.insert(k);
      return k;
    };
    for (int j = 0; j < n; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      int parent = -1;
      if (j > 0) {
        std::vector<double> w;
        for (int i = 0; i < j; ++i) {
          const bool pull = i == 0 || is_question(s.turns[static_cast<std::size_t>(i)].text);
          w.push_back((pull ? kQuestionPull : 1.0) / std::sqrt(static_cast<double>(j - i)));
        }
        parent = std::discrete_distribution<int>(w.begin(), w.end())(rng);
      }
      s.gold_parents.push_back(parent);
      if (parent < 0) {
        speaker[ju] = std::uniform_int_distribution<int>(0, speakers - 1)(rng);
        const std::string a = fresh(), b = fresh();
        keywords[ju] = {a, b};
        s.turns.push_back({"p" + std::to_string(speaker[ju] + 1), fill(choose(kRootTemplates, rng), {{'a', a}, {'b', b}})});
        continue;
      }
      const auto pu = static_cast<std::size_t>(parent);
      int who = std::uniform_int_distribution<int>(0, speakers - 2)(rng);
      if (who >= speaker[pu]) ++who;
      speaker[ju] = who;
      std::vector<std::string> from_parent = keywords[pu];
      std::shuffle(from_parent.begin(), from_parent.end(), rng);
      const std::string next = fresh();
      std::string text;
      if (from_parent.size() >= 2 && std::bernoulli_distribution(0.3)(rng)) {
        text = fill(choose(kDoubleReplyTemplates, rng), {{'p', from_parent[0]}, {'q', from_parent[1]}, {'n', next}});
      } else {
        text = fill(choose(kReplyTemplates, rng), {{'p', from_parent[0]}, {'n', next}});
      }
      keywords[ju] = {next};
      if (std::bernoulli_distribution(kAddressRate)(rng)) text = "p" + std::to_string(speaker[pu] + 1) + " : " + text;
      s.turns.push_back({"p" + std::to_string(who + 1), text});
    }
    out.push_back(std::move(s));
  }
  return out;
}

TransitionMatrix recover_truth_matrix(const std::vector<DialogueSession>& corpus, int num_states) {
  std::vector<std::vector<int>> seqs;
  seqs.reserve(corpus.size());
  for (const auto& s : corpus) {
    require(!s.gold_states.empty(), ErrorCode::kInvalidArgument, "dialogue '" + s.id + "' has no gold states");
    seqs.push_back(s.gold_states);
  }
  return estimate_transitions(seqs, num_states);
}

TransitionMatrix recover_truth_matrix(const std::vector<DialogueSession>& corpus) {
  int top = -1;
  for (const auto& s : corpus)
    for (int g : s.gold_states) top = std::max(top, g);
  require(top >= 0, ErrorCode::kInvalidArgument, "corpus has no gold states");
  return recover_truth_matrix(corpus, top + 1);
}

CorpusSplit split_corpus(const std::vector<DialogueSession>& corpus) {
  const std::size_t n = corpus.size();
  const std::size_t train = n * 8 / 10, valid = n / 10;
  CorpusSplit s;
  s.train.assign(corpus.begin(), corpus.begin() + static_cast<long>(train));
  s.valid.assign(corpus.begin() + static_cast<long>(train), corpus.begin() + static_cast<long>(train + valid));
  s.test.assign(corpus.begin() + static_cast<long>(train + valid), corpus.end());
  return s;
}

double lexical_overlap(const std::string& a, const std::string& b) {
  const auto ta = nn::tokenize(a), tb = nn::tokenize(b);
  const std::set<std::string> sa(ta.begin(), ta.end()), sb(tb.begin(), tb.end());
  std::size_t common = 0;
  for (const auto& t : sa) common += sb.count(t);
  const std::size_t uni = sa.size() + sb.size() - common;
  return uni == 0 ? 0.0 : static_cast<double>(common) / static_cast<double>(uni);
}

}  // namespace svrnn
