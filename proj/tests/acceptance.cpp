// Acceptance suite: one [PASS]/[FAIL] line per criterion, nonzero exit when
// any criterion fails.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "env/corpus.hpp"
#include "harness/config.hpp"
#include "harness/training.hpp"
#include "hindsight/hindsight.hpp"
#include "instances.hpp"
#include "optim/refined_advantage.hpp"
#include "oracle/enumeration.hpp"
#include "oracle/gradcheck.hpp"
#include "test_util.hpp"

using namespace rapo;
using namespace rapo::testing;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Outcome advantage_identities() {
  GrpoConfig cfg;
  SeedStream s(101);
  double worst_sum = 0.0, worst_std = 0.0;
  int degenerate = 0;
  bool zeros_ok = true;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> r(4);
    for (double& x : r) x = s.uniform(-1, 1);
    if (trial % 20 == 0) r.assign(4, r[0]);
    const AdvantageSet a = group_advantages(r, cfg);
    if (a.degenerate) {
      ++degenerate;
      for (double x : a.sequence) zeros_ok = zeros_ok && x == 0.0;
      continue;
    }
    double sum = 0.0, sq = 0.0;
    for (double x : a.sequence) sum += x, sq += x * x;
    worst_sum = std::max(worst_sum, std::abs(sum));
    worst_std = std::max(worst_std, std::abs(std::sqrt(sq / 4.0) - 1.0));
  }
  return {worst_sum < 1e-9 && worst_std < 1e-6 && zeros_ok && degenerate > 0,
          "max|sum| " + fmt("%.2e", worst_sum) + ", max|std-1| " + fmt("%.2e", worst_std) + ", " +
              std::to_string(degenerate) + " zero-variance groups"};
}

Outcome grpo_gradcheck() {
  TinyWorld w;
  GrpoConfig cfg;
  cfg.beta = 0.1;
  SeedStream s(202);
  int done = 0, fails = 0;
  double worst = 0.0;
  while (done < 100) {
    const PolicyParams old = random_params(w.V(), w.D(), s, 0.5);
    const PolicyParams cur = jittered(old, s, 0.3);
    const PolicyParams ref = jittered(old, s, 0.3, ParamTag::reference);
    const DialogueContext ctx = random_context(w, s);
    const auto group = sampled_group(w, old, ctx, 4, s);
    if (clip_margin(w, cur, old, group, cfg) < 1e-3) continue;
    std::vector<double> r(4);
    for (double& x : r) x = s.uniform(-1, 1);
    const AdvantageSet adv = group_advantages(r, cfg);
    const SurrogateResult res = grpo_surrogate(w.policy, cur, old, ref, group, adv, cfg);
    auto loss = [&](const PolicyParams& p) { return grpo_surrogate(w.policy, p, old, ref, group, adv, cfg).loss; };
    const GradCheckReport rep = finite_diff(loss, res.grad, cur, 1e-5, w.V() * w.D(), done, 1e-4);
    worst = std::max(worst, rep.max_rel_error);
    fails += rep.pass ? 0 : 1;
    ++done;
  }
  return {fails == 0, "100 instances, V=8, max rel error " + fmt("%.2e", worst)};
}

Outcome clip_gate() {
  TinyWorld w;
  const PolicyParams old = PolicyParams::zeros(w.V(), w.D());
  PolicyParams cur = old;
  cur.weights(w.vocab.id("S_A"), w.V()) = std::log(3.0);  // position-0 bucket
  const TokenSeq hist{w.vocab.id("C_X")};
  const int nf = Environment::kNumFlags;
  const std::vector<Rollout> group{
      tiny_rollout(hist, {w.vocab.id("S_A"), w.vocab.id("END")}, nf),
      tiny_rollout(hist, {w.vocab.id("S_A"), w.vocab.id("C_X"), w.vocab.id("END")}, nf),
      tiny_rollout(hist, {w.vocab.id("S_A"), w.vocab.id("C_X"), w.vocab.id("C_X"), w.vocab.id("END")}, nf)};
  GrpoConfig cfg;
  cfg.group_size = 3;
  cfg.eps_high = 0.28;
  cfg.beta = 0.0;
  AdvantageSet adv;
  adv.sequence = {1.0, 0.4, 0.2};
  const double rho = importance_ratios(w.policy, cur, old, group[0])[0];
  const SurrogateResult r = grpo_surrogate(w.policy, cur, old, old, group, adv, cfg);
  // Position 0 is the only one with rho != 1 and the only source of gradient
  // on strategy rows.
  const double strategy_grad = std::max(r.grad.row(w.vocab.id("S_A")).cwiseAbs().maxCoeff(),
                                        r.grad.row(w.vocab.id("S_B")).cwiseAbs().maxCoeff());
  const double hand = 3.0 / 9.0;
  const bool ok = std::abs(rho - 1.5) < 1e-14 && strategy_grad == 0.0 && r.clip_fraction() == hand &&
                  r.grad.cwiseAbs().maxCoeff() > 0.0;
  return {ok, "rho " + fmt("%.15f", rho) + ", clipped-token grad " + fmt("%g", strategy_grad) +
                  ", clip_fraction " + std::to_string(r.clipped_tokens) + "/" + std::to_string(r.total_tokens)};
}

std::vector<TokenDistribution> student_dists(const SequencePolicy& policy, const PolicyParams& p,
                                             const Rollout& r) {
  std::vector<TokenDistribution> out;
  const TokenSeq a = r.action_tokens();
  const std::span<const TokenId> all(a);
  for (std::size_t t = 0; t < a.size(); ++t) out.push_back(policy.step(p, r.context.observation(), all.first(t)));
  return out;
}

SdpoConfig uncapped(int k) {
  SdpoConfig c;
  c.top_k = k;
  c.loss_cap = kInf;
  return c;
}

Outcome sdpo_full_coverage() {
  TinyWorld w;
  SeedStream s(404);
  double worst = 0.0;
  bool zero_ok = true;
  for (int trial = 0; trial < 50; ++trial) {
    const PolicyParams st = random_params(w.V(), w.D(), s, 1.0);
    const PolicyParams te = random_params(w.V(), w.D(), s, 1.0, ParamTag::ema_teacher);
    const DialogueContext ctx = random_context(w, s);
    const Rollout r = sampled_rollout(w, st, ctx, s);
    const auto q = teacher_distributions(w.policy, te, ctx.observation(), {w.vocab.id("R_N"), w.sep(), w.vocab.id("K_1")},
                                         r.action_tokens(), w.sep());
    const auto p = student_dists(w.policy, st, r);
    double exact = 0.0;
    for (std::size_t t = 0; t < p.size(); ++t) exact += kl_exact(p[t], q[t]);
    exact /= static_cast<double>(p.size());
    worst = std::max(worst, std::abs(sdpo_topk_loss(w.policy, st, q, r, uncapped(w.V())).loss - exact));
    const SdpoResult same = sdpo_topk_loss(w.policy, st, p, r, uncapped(w.V()));
    zero_ok = zero_ok && same.loss == 0.0 && same.grad.cwiseAbs().maxCoeff() == 0.0;
  }
  return {worst < 1e-12 && zero_ok, "50 instances, max |loss - KL| " + fmt("%.2e", worst) +
                                        (zero_ok ? ", student==teacher exactly 0" : ", student==teacher NOT 0")};
}

Outcome tail_bucket() {
  const int v = 6;
  const SequencePolicy pol(FeatureMap(v, FeatureMapSpec{4, 4, 4, true}), ActionGrammar::unrestricted(v, 5));
  SeedStream s(505);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const PolicyParams st = random_params(v, pol.dimension(), s, 1.5);
    TokenSeq action;
    const int len = 1 + static_cast<int>(s.below(4));
    for (int i = 0; i < len; ++i) action.push_back(static_cast<TokenId>(s.below(v)));
    const Rollout r = tiny_rollout({0, 1}, action, 4);
    std::vector<TokenDistribution> q;
    for (int t = 0; t < len; ++t) {
      Vector z(v);
      for (int i = 0; i < v; ++i) z[i] = s.uniform(-2, 2);
      q.push_back(distribution_from_logits(z));
    }
    const auto p = student_dists(pol, st, r);
    double expect = 0.0;
    for (int t = 0; t < len; ++t) expect += coarsened_kl(p[t].probabilities, q[t].probabilities, 3);
    expect /= len;
    worst = std::max(worst, std::abs(sdpo_topk_loss(pol, st, q, r, uncapped(3)).loss - expect));
  }
  return {worst < 1e-12, "50 instances, V=6 K=3, max deviation " + fmt("%.2e", worst)};
}

Outcome stop_gradient() {
  TinyWorld w;
  SeedStream s(606);
  const PolicyParams st = random_params(w.V(), w.D(), s, 1.0);
  const DialogueContext ctx = random_context(w, s);
  const Rollout r = sampled_rollout(w, st, ctx, s);
  const TokenSeq fb{w.vocab.id("R_N"), w.sep(), w.vocab.id("K_2")};
  auto sd = [&](const PolicyParams& student, const PolicyParams& teacher) {
    return sdpo_topk_loss(w.policy, student,
                          teacher_distributions(w.policy, teacher, ctx.observation(), fb, r.action_tokens(), w.sep()),
                          r, uncapped(w.V()));
  };
  const PolicyParams constant = st;
  const SdpoResult as_params = sd(st, st);
  const SdpoResult as_constants = sd(st, constant);
  const double dgrad = (as_params.grad - as_constants.grad).cwiseAbs().maxCoeff();
  // Central-difference probes on teacher coordinates.
  double max_fd = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto idx = s.below(static_cast<std::size_t>(constant.weights.size()));
    PolicyParams up = constant, down = constant;
    up.weights.data()[idx] += 1e-5;
    down.weights.data()[idx] -= 1e-5;
    max_fd = std::max(max_fd, std::abs(sd(st, up).loss - sd(st, down).loss) / 2e-5);
  }
  const Matrix partial = numeric_gradient([&](const PolicyParams& p) { return sd(p, constant).loss; }, st, 1e-5);
  const double partial_err = (partial - as_constants.grad).cwiseAbs().maxCoeff();
  return {dgrad == 0.0 && max_fd > 0.0 && partial_err < 1e-7,
          "|dgrad| " + fmt("%g", dgrad) + ", max teacher-side dL/dtheta " + fmt("%.3g", max_fd) +
              ", student grad vs frozen-teacher FD " + fmt("%.1e", partial_err)};
}

Outcome refined_identity() {
  TinyWorld w;
  SeedStream s(707);
  double worst = 0.0, worst_gap = 0.0;
  bool collapse = true;
  for (int trial = 0; trial < 10; ++trial) {
    const PolicyParams st = random_params(w.V(), w.D(), s, 1.0);
    const PolicyParams te = random_params(w.V(), w.D(), s, 1.0, ParamTag::ema_teacher);
    const DialogueContext ctx = random_context(w, s);
    const Rollout r = sampled_rollout(w, st, ctx, s);
    const TokenSeq fb{w.vocab.id("R_N"), w.sep(), w.vocab.id("K_1")};
    const auto rep = refined_advantage_check(w.policy, st, te, r, fb, s.uniform(0.1, 2.0), w.sep(), s.uniform(-1, 1));
    worst = std::max({worst, rep.identity_discrepancy, rep.combined_discrepancy});
    const auto zero = refined_advantage_check(w.policy, st, te, r, fb, 0.0, w.sep());
    worst_gap = std::max(worst_gap, zero.macro_gap);
    collapse = collapse && zero.combined_direction == zero.macro_direction;
  }
  return {worst < 1e-8 && worst_gap == 0.0 && collapse,
          "10 instances, max discrepancy " + fmt("%.2e", worst) + ", eta=0 gap " + fmt("%g", worst_gap)};
}

Outcome enumeration_consistency() {
  const Vocabulary vocab = Vocabulary::standard();
  const Environment env(vocab, noiseless());
  const SequencePolicy policy = standard_policy(vocab);
  const DialogueContext ctx = env.reset(SeedStream(808));
  SeedStream s(809);
  const PolicyParams p = random_params(policy.vocab_size(), policy.dimension(), s, 0.7);
  const TrajectoryObjective f = [&](const DialogueContext& c, const TokenSeq& a, const Environment::Reaction& r) {
    return env.true_outcome(c.state, r.post_state) - 0.01 * static_cast<double>(a.size());
  };
  const int len = 3;
  const EnumerationResult oracle = policy_gradient_oracle(policy, p, env, ctx, len, f);
  const Matrix fd = numeric_gradient(
      [&](const PolicyParams& q) { return enumerate_expectation(policy, q, env, ctx, len, f).expectation; }, p, 1e-5);
  const double rel = (fd - oracle.gradient).norm() / std::max(fd.norm(), oracle.gradient.norm());
  const double mass_err = std::abs(oracle.total_probability - 1.0);

  SeedStream ms(810);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const TokenSeq a = sample_sequence(policy, p, ctx.observation(), len, ms);
    const double x = f(ctx, a, env.user_react(ctx, env.split_action(a), SeedStream(0)));
    sum += x, sq += x * x;
  }
  const double mean = sum / n;
  const double se = std::sqrt(std::max(sq / n - mean * mean, 0.0) / n);
  const double z = se > 0.0 ? std::abs(mean - oracle.expectation) / se : 0.0;
  return {rel < 1e-6 && mass_err < 1e-9 && z <= 3.0,
          std::to_string(oracle.trajectories) + " trajectories, gradient rel error " + fmt("%.2e", rel) +
              ", |mass-1| " + fmt("%.1e", mass_err) + ", Monte Carlo z " + fmt("%.2f", z)};
}

std::set<std::string> line_set(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) out.insert(line);
  return out;
}

Outcome hindsight_selection() {
  TempDir dir("accept_select");
  const Environment env(Vocabulary::standard());
  const auto corpus = dir / "corpus.jsonl";
  generate_corpus(env, 1000, 909, BehaviorMix::uniform(), corpus);
  bool monotone = true, rerun_ok = true;
  std::set<std::string> prev;
  std::vector<std::int64_t> kept;
  std::int64_t total = 0;
  bool first = true;
  for (double tau : {0.0, 0.05, 0.1, 0.2, 2.0}) {
    const auto out = dir / ("k" + fmt("%.2f", tau));
    const auto again = dir / ("r" + fmt("%.2f", tau));
    const SelectionReport r = select_corpus(corpus, out, tau);
    select_corpus(corpus, again, tau);
    rerun_ok = rerun_ok && slurp(out) == slurp(again);
    total = r.total;
    kept.push_back(r.kept);
    const auto lines = line_set(out);
    if (!first)
      for (const auto& l : lines) monotone = monotone && prev.count(l);
    prev = lines;
    first = false;
  }
  std::string counts;
  for (auto k : kept) counts += (counts.empty() ? "" : "/") + std::to_string(k);
  return {monotone && rerun_ok && kept.front() == total && kept.back() == 0,
          "1000 dialogues, " + std::to_string(total) + " turns, kept " + counts};
}

Outcome designed_mismatch() {
  TempDir dir("accept_arms");
  std::vector<std::vector<EvalSummary>> finals(4);
  const auto& names = preset_names();
  for (std::size_t a = 0; a < names.size(); ++a)
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      TrainConfig c = preset(names[a]);
      c.master_seed = seed;
      finals[a].push_back(run_training(c, dir.path() / (names[a] + std::to_string(seed))).final_evaluation);
    }
  auto idx = [&](const char* n) { return static_cast<std::size_t>(std::find(names.begin(), names.end(), n) - names.begin()); };
  const auto& rapo = finals[idx("rapo")];
  const auto& wo_sd = finals[idx("wo_sd")];
  const auto& rubric = finals[idx("wo_urm_sd")];
  double t_rapo = 0.0, t_rubric = 0.0;
  int wins = 0;
  std::string per_seed;
  for (int k = 0; k < 5; ++k) {
    t_rapo += rapo[k].template_rate / 5;
    t_rubric += rubric[k].template_rate / 5;
    wins += rapo[k].mean_true_outcome > wo_sd[k].mean_true_outcome;
    per_seed += fmt(" %.3f", rapo[k].mean_true_outcome) + fmt(">%.3f", wo_sd[k].mean_true_outcome);
  }
  const bool a = t_rubric >= 2.0 * t_rapo;
  const bool b = wins >= 4;
  return {a && b, "(a) template rate rubric " + fmt("%.3f", t_rubric) + " vs RAPO " + fmt("%.3f", t_rapo) +
                      (a ? " ok" : " FAIL") + "; (b) RAPO beats w/o SD in " + std::to_string(wins) +
                      "/5 seeds:" + per_seed};
}

Outcome length_table() {
  const double a = length_penalty(120, 200, 80), b = length_penalty(160, 200, 80), c = length_penalty(201, 200, 80);
  return {a == 0.0 && b == -0.5 && c == -1.0, "120->" + fmt("%g", a) + ", 160->" + fmt("%g", b) + ", 201->" + fmt("%g", c)};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RAPO_CLI) + " " + args + " >/dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

Outcome end_to_end_determinism() {
  TempDir dir("accept_cli");
  const std::string config = (std::filesystem::path(RAPO_SOURCE_DIR) / "configs" / "rapo.json").string();
  const int a = run_cli("train --config " + config + " --seed 3 --out " + (dir / "a").string());
  const int b = run_cli("train --config " + config + " --seed 3 --out " + (dir / "b").string());
  if (a != 0 || b != 0) return {false, "train exited with " + std::to_string(a) + "/" + std::to_string(b)};
  bool same = true;
  std::string diff;
  for (const char* f : {"metrics.jsonl", "entropy.svg", "reward.svg", "length.svg"}) {
    const std::string x = slurp(dir / "a" / f), y = slurp(dir / "b" / f);
    if (x.empty() || x != y) {
      same = false;
      diff += std::string(" ") + f;
    }
  }
  return {same, same ? "metrics.jsonl and 3 SVGs byte-identical" : "differs:" + diff};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
    double budget_s;  // 0 = no runtime requirement
  };
  const std::vector<Criterion> criteria{
      {1, "advantage identities", advantage_identities, 1.0},
      {2, "GRPO gradient check", grpo_gradcheck, 10.0},
      {3, "clip gate", clip_gate, 0.0},
      {4, "SD exactness at full coverage", sdpo_full_coverage, 0.0},
      {5, "tail-bucket identity", tail_bucket, 0.0},
      {6, "stop-gradient contract", stop_gradient, 0.0},
      {7, "refined-advantage identity", refined_identity, 0.0},
      {8, "enumeration consistency", enumeration_consistency, 30.0},
      {9, "hindsight selection", hindsight_selection, 0.0},
      {10, "designed-mismatch ablation", designed_mismatch, 300.0},
      {11, "length-penalty table", length_table, 0.0},
      {12, "end-to-end determinism", end_to_end_determinism, 0.0},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool pass = o.pass;
    std::string timing = fmt("%.2fs", secs);
    if (c.budget_s > 0.0) {
      timing += fmt(" (budget %gs)", c.budget_s);
      pass = pass && secs < c.budget_s;
    }
    failed += pass ? 0 : 1;
    std::printf("[%s] %2d %s: %s [%s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), timing.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
