#include <gtest/gtest.h>

#include <random>

#include "conch/sched.hpp"
#include "test_util.hpp"

using namespace conch;
using conch::testing::make_lts;
using conch::testing::random_dag;

namespace {

Action p(const char* l) { return Action::program(l); }
Action tau(const char* l) { return Action::internal(l); }

/// Every deterministic scheduler of an acyclic LTS as a trace-keyed map.
std::vector<TraceStrategy> all_strategies(const Lts& a, Semantics sem, bool suppression) {
  std::vector<TraceStrategy> out;
  Trace t;
  // extend `partial` at the given frontier of (trace, state) nodes
  std::function<void(TraceStrategy, std::vector<std::pair<Trace, StateId>>)> rec =
      [&](TraceStrategy partial, std::vector<std::pair<Trace, StateId>> frontier) {
        if (frontier.empty()) {
          out.push_back(std::move(partial));
          return;
        }
        auto [trace, s] = frontier.back();
        frontier.pop_back();
        std::vector<Decision> options;
        std::vector<Action> program;
        for (const auto& e : a.out(s)) {
          const Action& b = a.action(e.action);
          if (b.is_program()) {
            program.push_back(b);
          } else {
            options.push_back(Decision::pick(b));
          }
        }
        if (!program.empty()) {
          if (suppression) {
            for (std::uint32_t m = 1; m < (1u << program.size()); ++m) {
              std::vector<Action> sub;
              for (std::size_t i = 0; i < program.size(); ++i)
                if (m & (1u << i)) sub.push_back(program[i]);
              options.push_back(Decision::yield(sub));
            }
          } else {
            options.push_back(Decision::yield());
          }
        }
        if (a.out(s).empty() || sem == Semantics::Halting) options.push_back(Decision::stop());
        for (const auto& d : options) {
          auto next = partial;
          next[trace] = d;
          auto f = frontier;
          for (const auto& e : prescribed(a, s, d)) {
            Trace u = trace;
            u.push_back(a.action(e.action));
            f.emplace_back(std::move(u), e.target);
          }
          rec(std::move(next), std::move(f));
        }
      };
  rec({}, {{Trace{}, a.initial()}});
  return out;
}

std::set<std::set<Trace>> brute_force_sets(const Lts& a, Semantics sem, bool suppression) {
  std::set<std::set<Trace>> out;
  for (const auto& s : all_strategies(a, sem, suppression)) out.insert(project_all(consistent_traces(a, s)));
  return out;
}

/// Random maximal trace-keyed scheduler on an acyclic product.
TraceStrategy random_strategy(std::mt19937& rng, const Lts& a, std::size_t depth = SIZE_MAX) {
  TraceStrategy s;
  Trace t;
  std::function<void(StateId)> dfs = [&](StateId q) {
    std::vector<Decision> options;
    bool program = false;
    for (const auto& e : a.out(q)) {
      const Action& b = a.action(e.action);
      if (b.is_program()) {
        program = true;
      } else {
        options.push_back(Decision::pick(b));
      }
    }
    if (program) options.push_back(Decision::yield());
    if (options.empty()) options.push_back(Decision::stop());
    const Decision d = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
    s[t] = d;
    if (t.size() == depth) return;
    for (const auto& e : prescribed(a, q, d)) {
      t.push_back(a.action(e.action));
      dfs(e.target);
      t.pop_back();
    }
  };
  dfs(a.initial());
  return s;
}

std::vector<Action> program_alphabet() {
  return {Action::call("m", "_", 1), Action::ret("m", "OK", 1), Action::ret("m", "NO", 1), p("in(0)"), p("in(1)"),
          p("out")};
}

std::vector<Action> object_alphabet(const char* tag) {
  return {Action::call("m", "_", 1), Action::ret("m", "OK", 1), Action::ret("m", "NO", 1),
          Action::internal(std::string(tag) + ".a"), Action::internal(std::string(tag) + ".b")};
}

/// Naive reachability game on an acyclic LTS.
bool naive_win(const Lts& a, StateId s, const std::function<bool(StateId)>& goal) {
  if (a.out(s).empty()) return goal(s);
  bool any_program = false, all_program = true;
  for (const auto& e : a.out(s)) {
    const bool w = naive_win(a, e.target, goal);
    if (a.action(e.action).is_program()) {
      any_program = true;
      all_program &= w;
    } else if (w) {
      return true;
    }
  }
  return any_program && all_program;
}

}  // namespace

TEST(Prescribed, DecisionsSelectEdges) {
  const Lts a = make_lts(3, {{0, p("x"), 1}, {0, p("y"), 2}, {0, tau("t"), 2}});
  EXPECT_EQ(prescribed(a, 0, Decision::stop()).size(), 0u);
  EXPECT_EQ(prescribed(a, 0, Decision::yield()).size(), 2u);
  EXPECT_EQ(prescribed(a, 0, Decision::yield({p("y")})).size(), 1u);
  EXPECT_EQ(prescribed(a, 0, Decision::pick(tau("t"))).size(), 1u);
  EXPECT_THROW(prescribed(a, 0, Decision::pick(tau("u"))), ContractViolation);
  EXPECT_THROW(prescribed(a, 0, Decision::yield({tau("t")})), ContractViolation);
  EXPECT_THROW(prescribed(a, 1, Decision::yield()), ContractViolation);
}

TEST(Admission, RequiresDefinedEnabledDecisions) {
  const Lts a = make_lts(4, {{0, tau("t"), 1}, {1, p("x"), 2}, {1, p("y"), 3}});
  Strategy good{{0, Decision::pick(tau("t"))}, {1, Decision::yield()}};
  EXPECT_TRUE(is_admitted(a, good));
  EXPECT_TRUE(is_admitted(a, Strategy{{0, Decision::pick(tau("t"))}, {1, Decision::yield({p("x")})}}));
  EXPECT_FALSE(is_admitted(a, Strategy{{0, Decision::pick(tau("t"))}}));
  EXPECT_FALSE(is_admitted(a, Strategy{{0, Decision::stop()}, {1, Decision::yield()}}));
  EXPECT_FALSE(is_admitted(a, Strategy{{0, Decision::pick(p("x"))}, {1, Decision::yield()}}));
  EXPECT_EQ(consistent_traces(a, good), (std::set<Trace>{{}, {tau("t")}, {tau("t"), p("x")}, {tau("t"), p("y")}}));
}

TEST(ConsistentTraces, UndefinedDecisionAtLiveStateThrows) {
  const Lts a = make_lts(2, {{0, tau("t"), 1}});
  EXPECT_THROW(consistent_traces(a, Strategy{}), ContractViolation);
  EXPECT_EQ(consistent_traces(a, Strategy{{0, Decision::pick(tau("t"))}}).size(), 2u);
}

TEST(Adversary, SmallGame) {
  // 0 -t-> 1, 0 -u-> 2; 1 -x-> 3, 1 -y-> 4; 2 -x-> 5
  const Lts a = make_lts(6, {{0, tau("t"), 1}, {0, tau("u"), 2}, {1, p("x"), 3}, {1, p("y"), 4}, {2, p("x"), 5}});
  // forcing 3 fails: from 1 the program may take y, and 2 only leads to 5
  EXPECT_FALSE(synthesize_adversary(a, [](StateId s) { return s == 3; }));
  auto s = synthesize_adversary(a, [](StateId s) { return s == 3 || s == 4; });
  ASSERT_TRUE(s);
  EXPECT_EQ(s->at(0), Decision::pick(tau("t")));
  EXPECT_EQ(s->at(1), Decision::yield());
  EXPECT_TRUE(is_admitted(a, *s));
}

TEST(Adversary, MatchesNaiveGameAndReplaysSoundly) {
  std::mt19937 rng(31);
  const std::vector<Action> alphabet{p("x"), p("y"), tau("t"), tau("u")};
  int wins = 0, losses = 0;
  for (int i = 0; i < 300; ++i) {
    const Lts a = random_dag(rng, 7, alphabet, 0.35);
    std::vector<bool> goal_set(a.num_states());
    for (auto&& g : goal_set) g = std::bernoulli_distribution(0.5)(rng);
    auto goal = [&](StateId s) { return static_cast<bool>(goal_set[s]); };
    auto s = synthesize_adversary(a, goal);
    ASSERT_EQ(s.has_value(), naive_win(a, a.initial(), goal)) << i;
    if (!s) {
      ++losses;
      continue;
    }
    ++wins;
    EXPECT_TRUE(is_admitted(a, *s));
    for (const auto& [t, end] : maximal_traces(a, policy_of(*s))) EXPECT_TRUE(goal(end));
  }
  EXPECT_GT(wins, 30);
  EXPECT_GT(losses, 30);
}

TEST(AchievableSets, MatchStrategyEnumeration) {
  std::mt19937 rng(8);
  const std::vector<Action> alphabet{p("x"), p("y"), tau("t"), tau("u")};
  for (int i = 0; i < 60; ++i) {
    const Lts a = random_dag(rng, 5, alphabet, 0.4);
    for (auto sem : {Semantics::Maximal, Semantics::Halting})
      for (bool sup : {false, true})
        ASSERT_EQ(achievable_trace_sets(a, SIZE_MAX, sem, sup), brute_force_sets(a, sem, sup)) << i;
  }
}

TEST(AchievableSets, DepthTruncates) {
  const Lts a = make_lts(3, {{0, p("x"), 1}, {1, p("y"), 2}});
  EXPECT_EQ(achievable_trace_sets(a, 1, Semantics::Maximal), (std::set<std::set<Trace>>{{{}, {p("x")}}}));
  EXPECT_EQ(achievable_trace_sets(a, 0, Semantics::Maximal), (std::set<std::set<Trace>>{{{}}}));
}

TEST(Hyperproperty, Templates) {
  // the scheduler picks t or u, then the program reveals its input
  const Lts a = make_lts(5, {{0, tau("t"), 1}, {0, tau("u"), 2}, {1, p("in(0)"), 3}, {2, p("in(1)"), 4}});
  Hyperproperty all;
  EXPECT_TRUE(check_hyperproperty(a, all, 10).satisfied);

  Hyperproperty ni;
  ni.kind = Hyperproperty::Kind::Noninterference;
  ni.leak1 = [](StateId s) { return s == 3; };
  ni.leak2 = [](StateId) { return false; };
  auto v = check_hyperproperty(a, ni, 10);
  EXPECT_FALSE(v.satisfied);
  ASSERT_TRUE(v.strategy);
  EXPECT_EQ(v.trace_set, (std::set<Trace>{{}, {p("in(0)")}}));
  EXPECT_NE(narrate(a, *v.strategy).find("schedule 1 [in(0)]"), std::string::npos);

  Hyperproperty never_one;
  never_one.kind = Hyperproperty::Kind::AllTraces;
  never_one.predicate = [](const Trace& t) { return std::find(t.begin(), t.end(), p("in(1)")) == t.end(); };
  v = check_hyperproperty(a, never_one, 10);
  EXPECT_FALSE(v.satisfied);
  EXPECT_EQ(v.counterexample, (Trace{tau("u"), p("in(1)")}));

  Hyperproperty family;
  family.kind = Hyperproperty::Kind::TraceSetIn;
  family.family = {{{}, {p("in(0)")}}, {{}, {p("in(1)")}}};
  EXPECT_TRUE(check_hyperproperty(a, family, 10).satisfied);
  EXPECT_FALSE(check_hyperproperty(a, family, 10, Semantics::Halting).satisfied);
}

TEST(Hyperproperty, SuppressionBreaksInputFreedom) {
  // the program draws a secret bit; an adversary allowed to suppress inputs can fix it
  const Lts a = make_lts(3, {{0, p("in(0)"), 1}, {0, p("in(1)"), 2}});
  Hyperproperty ni;
  ni.kind = Hyperproperty::Kind::TraceSetIn;
  ni.family = {{{}, {p("in(0)")}, {p("in(1)")}}};
  EXPECT_TRUE(check_hyperproperty(a, ni, 5).satisfied);
  EXPECT_FALSE(check_hyperproperty(a, ni, 5, Semantics::Maximal, true).satisfied);
}

// Strong observational refinement on random acyclic program/object triples.
TEST(Preservation, SimulationImpliesTraceSetInclusion) {
  std::mt19937 rng(77);
  int tested = 0;
  for (int i = 0; i < 3000 && tested < 40; ++i) {
    const Lts prog = random_dag(rng, 5, program_alphabet(), 0.35);
    const Lts o1 = random_dag(rng, 4, object_alphabet("o1"), 0.35);
    const Lts o2 = random_dag(rng, 5, object_alphabet("o2"), 0.5);
    if (!fsim_exists(o1, o2)) continue;
    ++tested;
    const Lts po1 = product(prog, o1, ProductMode::ProgramObject);
    const Lts po2 = product(prog, o2, ProductMode::ProgramObject);
    for (bool sup : {false, true}) {
      const auto s1 = achievable_trace_sets(po1, SIZE_MAX, Semantics::Halting, sup);
      const auto s2 = achievable_trace_sets(po2, SIZE_MAX, Semantics::Halting, sup);
      EXPECT_TRUE(std::includes(s2.begin(), s2.end(), s1.begin(), s1.end())) << i;
      Hyperproperty phi;
      phi.kind = Hyperproperty::Kind::TraceSetIn;
      phi.family = s2;
      EXPECT_TRUE(check_hyperproperty(po1, phi, SIZE_MAX, Semantics::Halting, sup).satisfied);
    }
  }
  EXPECT_EQ(tested, 40);
}

TEST(SchedulerFromFsim, ReproducesProgramTraceSets) {
  std::mt19937 rng(1234);
  int tested = 0;
  for (int i = 0; i < 3000 && tested < 60; ++i) {
    const Lts prog = random_dag(rng, 5, program_alphabet(), 0.4);
    const Lts o1 = random_dag(rng, 4, object_alphabet("o1"), 0.4);
    const Lts o2 = random_dag(rng, 5, object_alphabet("o2"), 0.5);
    auto f = fsim_exists(o1, o2);
    if (!f) continue;
    const ProductLts po1 = product_with_components(prog, o1, ProductMode::ProgramObject);
    const ProductLts po2 = product_with_components(prog, o2, ProductMode::ProgramObject);
    if (po1.lts.num_transitions() < 3) continue;
    ++tested;
    const std::size_t depth = tested % 3 == 0 ? 3 : SIZE_MAX;
    const TraceStrategy s1 = random_strategy(rng, po1.lts, depth);
    const TraceStrategy s2 = scheduler_from_fsim(po1, po2, o1, o2, *f, s1, depth);
    EXPECT_EQ(project_all(consistent_traces(po1.lts, s1, depth)), project_all(consistent_traces(po2.lts, s2))) << i;
  }
  EXPECT_EQ(tested, 60);
}

TEST(SchedulerFromFsim, RejectsNonSimulation) {
  const Lts prog = make_lts(1, {});
  const Lts o1 = make_lts(2, {{0, Action::call("m", "_", 1), 1}});
  const Lts o2 = make_lts(1, {});
  SimRelation f;
  f.pairs = {{0, 0}, {1, 0}};
  const auto po1 = product_with_components(prog, o1, ProductMode::ProgramObject);
  const auto po2 = product_with_components(prog, o2, ProductMode::ProgramObject);
  EXPECT_THROW(scheduler_from_fsim(po1, po2, o1, o2, f, {}, 4), ContractViolation);
}

TEST(Adversary, SuppressionLetsTheSchedulerChooseInputs) {
  const Lts a = make_lts(3, {{0, p("in(0)"), 1}, {0, p("in(1)"), 2}});
  auto goal = [](StateId s) { return s == 1; };
  EXPECT_FALSE(synthesize_adversary(a, goal));
  auto s = synthesize_adversary(a, goal, true);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->at(0), Decision::yield({p("in(0)")}));
  EXPECT_TRUE(is_admitted(a, *s));

  Hyperproperty ni;
  ni.kind = Hyperproperty::Kind::Noninterference;
  ni.leak1 = goal;
  ni.leak2 = [](StateId) { return false; };
  EXPECT_TRUE(check_hyperproperty(a, ni, 5).satisfied);
  EXPECT_FALSE(check_hyperproperty(a, ni, 5, Semantics::Maximal, true).satisfied);
}
