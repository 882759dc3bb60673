#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <string>

#include <json.hpp>

#include "common/errors.hpp"
#include "env/corpus.hpp"
#include "env/environment.hpp"
#include "fixtures.hpp"
#include "test_util.hpp"

using namespace rapo;
using namespace rapo::testing;

namespace {

struct Env {
  Vocabulary vocab = Vocabulary::standard();
  Environment env{vocab, noiseless()};
  SupporterAction act(const char* strategy, std::vector<const char*> response = {"EOT"}) const {
    SupporterAction a{vocab.id(strategy), {}};
    for (const char* r : response) a.response.push_back(vocab.id(r));
    return a;
  }
};

Persona persona(double openness, double volatility, ProblemKind kind, double threshold) {
  return Persona{openness, volatility, kind, threshold};
}

}  // namespace

TEST_CASE("reset") {
  const Env e;
  const DialogueContext a = e.env.reset(SeedStream(5));
  const DialogueContext b = e.env.reset(SeedStream(5));
  CHECK(a.history == b.history);
  CHECK(a.state == b.state);
  CHECK(a.flags == b.flags);
  std::set<int> kinds;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const DialogueContext c = e.env.reset(SeedStream::derive(1, {s}));
    CHECK(c.state.distress >= 0.6);
    CHECK(c.state.distress <= 0.9);
    CHECK(c.state.trust >= 0.1);
    CHECK(c.state.trust <= 0.4);
    CHECK(c.history.size() == 1);
    CHECK(c.flags == e.env.observable_flags(c.persona));
    kinds.insert(static_cast<int>(c.persona.problem_kind));
  }
  CHECK(kinds.size() == 3);
}

TEST_CASE("rulebook transitions") {
  const Env e;
  const Persona p = persona(0.5, 1.0, ProblemKind::work, 0.5);

  SUBCASE("template twice from fatigue 0") {
    UserState s{0.5, 0.3, 0, 0};
    const UserState s1 = e.env.transition(s, p, e.act("TEMPLATE_EMPATHY"));
    CHECK(s1.trust == doctest::Approx(0.35));
    CHECK(s1.template_fatigue == 1);
    const UserState s2 = e.env.transition(s1, p, e.act("TEMPLATE_EMPATHY"));
    CHECK(s2.trust == doctest::Approx(0.30));
    CHECK(s2.template_fatigue == 2);
    CHECK(s2.turn_index == 2);
  }
  SUBCASE("premature advice") {
    TransitionTrace tr;
    const UserState s = e.env.transition(UserState{0.5, 0.2, 0, 0}, p, e.act("SUGGEST"), &tr);
    CHECK(s.distress == doctest::Approx(0.6));
    CHECK(tr.premature_advice);
  }
  SUBCASE("received advice") {
    const UserState s = e.env.transition(UserState{0.5, 0.6, 0, 0}, p, e.act("SUGGEST"));
    CHECK(s.distress == doctest::Approx(0.3));
  }
  SUBCASE("validate needs the persona's topic") {
    const UserState hit = e.env.transition(UserState{0.5, 0.2, 0, 0}, p, e.act("VALIDATE", {"TOPIC_WORK", "EOT"}));
    const UserState miss = e.env.transition(UserState{0.5, 0.2, 0, 0}, p, e.act("VALIDATE", {"TOPIC_HEALTH", "EOT"}));
    CHECK(hit.distress == doctest::Approx(0.35));
    CHECK(miss.distress == doctest::Approx(0.5));
  }
  SUBCASE("question raises trust by openness") {
    const UserState s = e.env.transition(UserState{0.5, 0.2, 0, 0}, p, e.act("QUESTION"));
    CHECK(s.trust == doctest::Approx(0.25));
  }
  SUBCASE("clamped to [0, 1]") {
    const UserState s = e.env.transition(UserState{0.0, 0.0, 0, 0}, p, e.act("VALIDATE", {"TOPIC_WORK"}));
    CHECK(s.distress == 0.0);
    const UserState t = e.env.transition(UserState{0.0, 0.0, 3, 0}, p, e.act("TEMPLATE_EMPATHY"));
    CHECK(t.trust == 0.0);
  }
  CHECK_THROWS_AS(e.env.transition(UserState{}, p, e.act("TOPIC_WORK")), InputError);
}

TEST_CASE("state bounds and monotone fatigue over random play") {
  const Env e;
  for (std::uint64_t ep = 0; ep < 300; ++ep) {
    SeedStream s = SeedStream::derive(3, {ep});
    DialogueContext ctx = e.env.reset(s.child(0));
    int fatigue = 0;
    for (int t = 0; t < 12; ++t) {
      const SupporterAction a = scripted_action(e.env, static_cast<Behavior>(s.below(3)), ctx, s);
      const Rollout r = e.env.rollout(ctx, a, s.child(10 + t));
      CHECK(r.post_state.distress >= 0.0);
      CHECK(r.post_state.distress <= 1.0);
      CHECK(r.post_state.trust >= 0.0);
      CHECK(r.post_state.trust <= 1.0);
      CHECK(r.post_state.template_fatigue >= fatigue);
      fatigue = r.post_state.template_fatigue;
      CHECK(r.length == 1 + static_cast<int>(r.response.size()));
      for (TokenId tok : r.reaction) CHECK(e.vocab.role(tok) == TokenRole::reaction);
      // Reaction faithfulness with noise disabled.
      const bool relief = std::find(r.reaction.begin(), r.reaction.end(), e.env.relief()) != r.reaction.end();
      CHECK(relief == (r.post_state.distress - ctx.state.distress <= -0.1 + kDeltaTolerance));
      e.env.advance(ctx, r);
    }
  }
}

TEST_CASE("user reactions") {
  const Env e;
  DialogueContext ctx;
  ctx.persona = persona(0.5, 1.0, ProblemKind::work, 0.5);
  ctx.state = UserState{0.5, 0.2, 0, 0};
  ctx.flags = e.env.observable_flags(ctx.persona);
  ctx.history = {e.env.vent(ProblemKind::work)};

  const auto pushback = e.env.user_react(ctx, e.act("SUGGEST"), SeedStream(1));
  CHECK(std::count(pushback.tokens.begin(), pushback.tokens.end(), e.env.pushback()) == 1);

  // FILLER-only validate on the wrong topic changes nothing but turn_index.
  const auto none = e.env.user_react(ctx, e.act("VALIDATE", {"FILLER", "EOT"}), SeedStream(1));
  CHECK(none.tokens == TokenSeq{e.env.neutral()});

  const auto relief = e.env.user_react(ctx, e.act("VALIDATE", {"TOPIC_WORK", "EOT"}), SeedStream(1));
  CHECK(relief.tokens.front() == e.env.relief());

  ctx.state.template_fatigue = 1;
  const auto tired = e.env.user_react(ctx, e.act("TEMPLATE_EMPATHY"), SeedStream(1));
  CHECK(std::count(tired.tokens.begin(), tired.tokens.end(), e.env.disengage()) == 1);

  SUBCASE("noise is seeded") {
    const Environment noisy(e.vocab, EnvConstants{});
    DialogueContext c2 = ctx;
    c2.state.template_fatigue = 0;
    // Openness 0.5 gives a trust delta of 0.05, inside the noise band.
    std::set<std::size_t> sizes;
    for (std::uint64_t s = 0; s < 64; ++s) {
      const auto a = noisy.user_react(c2, e.act("QUESTION"), SeedStream(s));
      const auto b = noisy.user_react(c2, e.act("QUESTION"), SeedStream(s));
      CHECK(a.tokens == b.tokens);
      sizes.insert(static_cast<std::size_t>(a.tokens.front() == noisy.open_up()));
    }
    CHECK(sizes.size() == 2);
  }
}

TEST_CASE("true outcome") {
  const Env e;
  const UserState pre{0.8, 0.2, 0, 0}, post{0.6, 0.3, 0, 1};
  CHECK(e.env.true_outcome(pre, pre) == 0.0);
  CHECK(e.env.true_outcome(pre, post) == doctest::Approx(0.17));
  CHECK(e.env.true_outcome(post, pre) == doctest::Approx(-0.17));
  CHECK(e.env.true_outcome(UserState{0, 1, 0, 0}, UserState{1, 0, 0, 0}) == doctest::Approx(-1.0));
}

TEST_CASE("designed reward mismatch: template at fatigue >= 1 hurts") {
  const Env e;
  const Persona p = persona(0.5, 0.5, ProblemKind::family, 0.5);
  for (int fatigue = 1; fatigue < 5; ++fatigue) {
    const UserState pre{0.7, 0.3, fatigue, 2};
    CHECK(e.env.true_outcome(pre, e.env.transition(pre, p, e.act("TEMPLATE_EMPATHY"))) < 0.0);
  }
}

TEST_CASE("corpus generation") {
  const Env e;
  TempDir dir("corpus");
  const auto a = dir / "a.jsonl", b = dir / "b.jsonl";
  generate_corpus(e.env, 1, 9, BehaviorMix::uniform(), a);
  generate_corpus(e.env, 1, 9, BehaviorMix::uniform(), b);
  CHECK(slurp(a) == slurp(b));

  const CorpusSummary s = generate_corpus(e.env, 300, 4, BehaviorMix::uniform(), a);
  CHECK(s.dialogues == 300);
  std::ifstream in(a);
  std::string line;
  std::map<long, int> turns;
  long records = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    for (const char* k : {"dialogue_id", "turn_index", "context_tokens", "strategy", "response_tokens",
                          "reaction_tokens", "delta_distress", "delta_trust", "persona"})
      CHECK(j.contains(k));
    CHECK(j.size() == 9);
    ++turns[j["dialogue_id"].get<long>()];
    ++records;
  }
  CHECK(records == s.turns);
  for (const auto& [id, n] : turns) {
    CHECK(n >= kMinCorpusTurns);
    CHECK(n <= kMaxCorpusTurns);
  }

  const CorpusSummary heavy =
      generate_corpus(e.env, 500, 2, BehaviorMix::parse("template_heavy"), dir / "t.jsonl");
  CHECK(heavy.mean_final_fatigue >= 2.0);

  CHECK_THROWS_AS(generate_corpus(e.env, 1, 1, BehaviorMix::uniform(), dir / "no" / "such" / "x.jsonl"),
                  IoError);
  CHECK_THROWS_AS(BehaviorMix::parse("nobody=1"), ConfigError);
}
