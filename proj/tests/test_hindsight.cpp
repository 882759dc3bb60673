#include <doctest.h>

#include <fstream>
#include <set>
#include <string>

#include <json.hpp>

#include "common/errors.hpp"
#include "env/corpus.hpp"
#include "fixtures.hpp"
#include "hindsight/hindsight.hpp"
#include "test_util.hpp"

using namespace rapo;
using namespace rapo::testing;

namespace {

nlohmann::json rec(double dd, double dt) {
  return {{"dialogue_id", 3}, {"turn_index", 1}, {"delta_distress", dd}, {"delta_trust", dt}};
}

std::set<std::string> lines_of(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) out.insert(line);
  return out;
}

}  // namespace

TEST_CASE("hindsight judge") {
  const SelectionResult a = hindsight_judge(rec(-0.3, 0.0), 0.1);
  CHECK(a.selected);
  CHECK(a.reason == SelectionReason::pivotal_distress);
  CHECK(a.magnitude == doctest::Approx(0.3));
  CHECK(a.dialogue_id == 3);

  const SelectionResult b = hindsight_judge(rec(0.0, 0.0), 0.1);
  CHECK_FALSE(b.selected);
  CHECK(b.reason == SelectionReason::low_signal);

  CHECK(hindsight_judge(rec(0.1, 0.1), 0.1).selected);
  CHECK(hindsight_judge(rec(0.0, 0.2), 0.1).reason == SelectionReason::pivotal_trust);
  CHECK(hindsight_judge(rec(0.0, 0.0), 0.0).selected);

  CHECK_THROWS_AS(hindsight_judge(nlohmann::json{{"delta_trust", 0.1}}, 0.1), FormatError);
  CHECK_THROWS_AS(hindsight_judge(nlohmann::json{{"delta_distress", "x"}, {"delta_trust", 0.1}}, 0.1),
                  FormatError);
  CHECK_THROWS_AS(hindsight_judge(rec(0, 0), -1.0), ConfigError);
}

TEST_CASE("corpus selection") {
  TempDir dir("select");
  const Environment env(Vocabulary::standard());
  const auto corpus = dir / "c.jsonl";
  generate_corpus(env, 400, 8, BehaviorMix::parse("template_heavy"), corpus);

  const SelectionReport all = select_corpus(corpus, dir / "all.jsonl", 0.0);
  CHECK(all.kept == all.total);
  CHECK(slurp(dir / "all.jsonl") == slurp(corpus));
  const SelectionReport none = select_corpus(corpus, dir / "none.jsonl", 2.0);
  CHECK(none.kept == 0);
  CHECK(slurp(dir / "none.jsonl").empty());

  SUBCASE("kept fraction matches an independent single-pass filter") {
    const SelectionReport r = select_corpus(corpus, dir / "k.jsonl", 0.1);
    std::ifstream in(corpus);
    std::string line;
    long kept = 0, total = 0;
    while (std::getline(in, line)) {
      const auto j = nlohmann::json::parse(line);
      ++total;
      if (std::abs(j["delta_distress"].get<double>()) >= 0.1 || std::abs(j["delta_trust"].get<double>()) >= 0.1)
        ++kept;
    }
    CHECK(r.total == total);
    CHECK(r.kept == kept);
    CHECK(r.pivotal_distress + r.pivotal_trust == r.kept);
    CHECK(r.low_signal == r.total - r.kept);
    const auto j = r.to_json();
    CHECK(j["reasons"]["PIVOTAL_DISTRESS"] == r.pivotal_distress);
    CHECK(j["kept_fraction"].get<double>() == doctest::Approx(double(kept) / total));
    MESSAGE("kept fraction at tau 0.1 on a template-heavy corpus: " << r.kept_fraction());
  }

  SUBCASE("monotone in tau and byte-identical on rerun") {
    std::set<std::string> prev;
    bool first = true;
    for (double tau : {0.0, 0.05, 0.1, 0.2, 2.0}) {
      const auto out = dir / ("t" + std::to_string(tau) + ".jsonl");
      select_corpus(corpus, out, tau);
      const auto again = dir / ("u" + std::to_string(tau) + ".jsonl");
      select_corpus(corpus, again, tau);
      CHECK(slurp(out) == slurp(again));
      const auto kept = lines_of(out);
      if (!first)
        for (const auto& l : kept) CHECK(prev.count(l) == 1);
      prev = kept;
      first = false;
    }
  }

  SUBCASE("malformed lines") {
    const std::string body = slurp(corpus);
    spit(dir / "one_bad.jsonl", body + "{not json\n");
    const SelectionReport r = select_corpus(dir / "one_bad.jsonl", dir / "o.jsonl", 0.1);
    CHECK(r.malformed == 1);
    spit(dir / "many_bad.jsonl", "{\"delta_distress\": 0.3}\n{\"x\":1}\n" + body.substr(0, 200) + "\n");
    CHECK_THROWS_AS(select_corpus(dir / "many_bad.jsonl", dir / "o2.jsonl", 0.1), FormatError);
    CHECK_THROWS_AS(select_corpus(dir / "absent.jsonl", dir / "o3.jsonl", 0.1), IoError);
  }
}
