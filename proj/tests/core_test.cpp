#include <gtest/gtest.h>

#include <random>

#include "conch/lts.hpp"
#include "test_util.hpp"

using namespace conch;
using conch::testing::E;
using conch::testing::make_lts;

namespace {

const Action c1 = Action::call("m", "a", 1);
const Action r1 = Action::ret("m", "OK", 1);
const Action tau = Action::internal("obj.step(1)");
const Action p = Action::program("coin(0)");

bool accepts(const Lts& a, const Trace& t) {
  // deterministic acceptance by simulation of a set of states
  std::vector<StateId> cur{a.initial()};
  for (const auto& x : t) {
    std::vector<StateId> next;
    for (auto s : cur)
      for (const auto& e : a.out(s))
        if (a.action(e.action) == x) next.push_back(e.target);
    if (next.empty()) return false;
    cur = std::move(next);
  }
  return true;
}

}  // namespace

TEST(Symbol, InterningAndOrdering) {
  Symbol a("alpha"), b("beta"), a2(std::string("alp") + "ha");
  EXPECT_EQ(a, a2);
  EXPECT_EQ(a.id(), a2.id());
  EXPECT_LT(a, b);
  EXPECT_EQ(a.str(), "alpha");
  EXPECT_TRUE(Symbol().empty());
}

TEST(Action, ToStringAndKinds) {
  EXPECT_EQ(c1.to_string(), "call(m,a,1)");
  EXPECT_TRUE(c1.is_call());
  EXPECT_TRUE(r1.is_return());
  EXPECT_TRUE(tau.is_internal());
  EXPECT_TRUE(p.is_program());
  EXPECT_NE(c1, r1);
  EXPECT_EQ(Action::call("m", "a", 1), c1);
}

TEST(Gamma, Membership) {
  const auto cr = Gamma::calls_returns();
  EXPECT_TRUE(cr.contains(c1));
  EXPECT_TRUE(cr.contains(r1));
  EXPECT_FALSE(cr.contains(tau));
  EXPECT_FALSE(cr.contains(p));
  EXPECT_TRUE(Gamma::all().contains(tau));
  EXPECT_FALSE(Gamma::none().contains(c1));
  EXPECT_TRUE((Gamma::program() | Gamma::of(ActionKind::Internal)).contains(tau));
}

TEST(Projection, IdempotentAndDistributive) {
  std::mt19937 rng(7);
  const std::vector<Action> pool{c1, r1, tau, p};
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1), len(0, 8);
  for (int round = 0; round < 200; ++round) {
    Trace t, u;
    for (std::size_t i = len(rng); i > 0; --i) t.push_back(pool[pick(rng)]);
    for (std::size_t i = len(rng); i > 0; --i) u.push_back(pool[pick(rng)]);
    for (auto g : {Gamma::calls_returns(), Gamma::program(), Gamma::all(), Gamma::none()}) {
      EXPECT_EQ(project(project(t, g), g), project(t, g));
      Trace tu = t;
      tu.insert(tu.end(), u.begin(), u.end());
      Trace pt = project(t, g), pu = project(u, g);
      pt.insert(pt.end(), pu.begin(), pu.end());
      EXPECT_EQ(project(tu, g), pt);
    }
  }
}

TEST(LtsBuilder, RejectsBadEndpointsAndEmpty) {
  LtsBuilder b;
  b.add_state("a");
  EXPECT_THROW(b.add_transition(0, c1, 3), ContractViolation);
  EXPECT_THROW(LtsBuilder().build(), ContractViolation);
  LtsBuilder c;
  c.add_state("x");
  c.set_initial(4);
  EXPECT_THROW(std::move(c).build(), ContractViolation);
}

TEST(LtsBuilder, DeduplicatesEdgesAndStates) {
  LtsBuilder b;
  auto s = b.add_state("s");
  EXPECT_EQ(b.add_state("s"), s);
  auto t = b.add_state("t");
  b.add_transition(s, c1, t);
  b.add_transition(s, c1, t);
  Lts a = std::move(b).build();
  EXPECT_EQ(a.num_transitions(), 1u);
  EXPECT_TRUE(a.is_deterministic());
  EXPECT_EQ(a.step(s, c1), t);
  EXPECT_FALSE(a.step(t, c1));
  EXPECT_EQ(a.find_state("t"), t);
  EXPECT_FALSE(a.find_state("nope"));
}

TEST(Lts, NondeterminismDetected) {
  Lts a = make_lts(3, {{0, tau, 1}, {0, tau, 2}});
  EXPECT_FALSE(a.is_deterministic());
}

TEST(Traces, PrefixClosedAtEveryDepth) {
  std::mt19937 rng(11);
  for (int round = 0; round < 30; ++round) {
    Lts a = conch::testing::random_lts(rng, 4, {c1, r1, tau}, 0.5);
    for (std::size_t d = 0; d <= 5; ++d) {
      auto ts = traces(a, d);
      EXPECT_TRUE(ts.count(Trace{}));
      for (const auto& t : ts) {
        EXPECT_LE(t.size(), d);
        if (!t.empty()) {
          EXPECT_TRUE(ts.count(Trace(t.begin(), t.end() - 1)));
        }
      }
    }
  }
}

TEST(Traces, BudgetIsEnforced) {
  Lts loop = make_lts(1, {{0, tau, 0}, {0, p, 0}});
  Budget tight;
  tight.max_traces = 10;
  EXPECT_THROW(traces(loop, 20, tight), BudgetExceeded);
}

TEST(Explore, BudgetIsEnforced) {
  struct Counter {
    using State = int;
    int initial() const { return 0; }
    std::vector<std::pair<Action, int>> successors(int s) const { return {{Action::internal("inc"), s + 1}}; }
    std::string key(int s) const { return std::to_string(s); }
  };
  Budget tight;
  tight.max_states = 50;
  EXPECT_THROW(explore(Counter{}, tight), BudgetExceeded);
}

TEST(Product, TraceLawOnSharedAlphabet) {
  std::mt19937 rng(3);
  const Action x = Action::program("x"), y = Action::program("y"), s = Action::program("s");
  const std::vector<Action> alpha1{x, s}, alpha2{y, s}, all{x, y, s};
  for (int round = 0; round < 25; ++round) {
    Lts a1 = conch::testing::random_lts(rng, 4, alpha1, 0.6);
    Lts a2 = conch::testing::random_lts(rng, 4, alpha2, 0.6);
    auto pr = product(a1, a2, ProductMode::SharedLabels);
    // only labels in both alphabets synchronize
    auto both = [&](const Action& a) {
      auto l = a1.alphabet(), r = a2.alphabet();
      return std::count(l.begin(), l.end(), a) && std::count(r.begin(), r.end(), a);
    };
    auto in1 = [&](const Action& a) { auto l = a1.alphabet(); return std::count(l.begin(), l.end(), a) > 0; };
    auto in2 = [&](const Action& a) { auto r = a2.alphabet(); return std::count(r.begin(), r.end(), a) > 0; };
    (void)both;
    std::vector<Trace> words{{}};
    for (std::size_t d = 0; d < 6; ++d) {
      std::vector<Trace> longer;
      for (const auto& w : words)
        if (w.size() == d)
          for (const auto& a : all) {
            Trace u = w;
            u.push_back(a);
            longer.push_back(std::move(u));
          }
      words.insert(words.end(), longer.begin(), longer.end());
    }
    for (const auto& w : words) {
      bool in_alphabets = std::all_of(w.begin(), w.end(), [&](const Action& a) { return in1(a) || in2(a); });
      if (!in_alphabets) continue;
      const bool lhs = accepts(pr, w);
      const bool rhs = accepts(a1, project(w, in1)) && accepts(a2, project(w, in2));
      EXPECT_EQ(lhs, rhs) << to_string(w);
    }
  }
}

TEST(Product, ProgramObjectModeSynchronizesCallsOnly) {
  Lts prog = make_lts(3, {{0, c1, 1}, {1, r1, 2}, {0, p, 0}});
  Lts obj = make_lts(3, {{0, c1, 1}, {1, tau, 2}, {2, r1, 0}});
  auto pr = product_with_components(prog, obj, ProductMode::ProgramObject);
  EXPECT_TRUE(accepts(pr.lts, {p, c1, tau, r1}));
  EXPECT_FALSE(accepts(pr.lts, {c1, r1}));
  for (StateId q = 0; q < pr.lts.num_states(); ++q) {
    auto [l, r] = split_product_name(pr.lts.name(q));
    EXPECT_EQ(l, prog.name(pr.components[q].first));
    EXPECT_EQ(r, obj.name(pr.components[q].second));
  }
}

TEST(Product, InterleaveRejectsSharedPrivateLabels) {
  Lts a = make_lts(2, {{0, tau, 1}});
  EXPECT_THROW(product(a, a, ProductMode::Interleave), ContractViolation);
}

TEST(SilentClosure, FollowsOnlySilentEdges) {
  Lts a = make_lts(4, {{0, tau, 1}, {1, tau, 2}, {2, c1, 3}, {3, tau, 0}});
  SilentClosure cl(a, Gamma::calls_returns());
  EXPECT_EQ(cl.of(0), (std::vector<StateId>{0, 1, 2}));
  EXPECT_EQ(cl.of(3), (std::vector<StateId>{0, 1, 2, 3}));
  EXPECT_EQ(macro_post(cl, cl.of(0), c1), (std::vector<StateId>{0, 1, 2, 3}));
  EXPECT_TRUE(macro_post(cl, cl.of(0), r1).empty());
}

TEST(GammaDeterminism, SilentBranchingBreaksIt) {
  // two silent moves to states that differ on later calls
  Lts a = make_lts(3, {{0, tau, 1}, {0, Action::internal("obj.other(1)"), 2}, {1, c1, 1}});
  EXPECT_FALSE(is_gamma_deterministic(a, Gamma::calls_returns()));
  EXPECT_TRUE(is_gamma_deterministic(a, Gamma::all()));
  Lts line = make_lts(3, {{0, c1, 1}, {1, r1, 2}});
  EXPECT_TRUE(is_gamma_deterministic(line, Gamma::calls_returns()));
}

TEST(Refinement, CounterexampleIsShortestMissingTrace) {
  Lts spec = make_lts(3, {{0, c1, 1}, {1, r1, 2}});
  Lts impl = make_lts(4, {{0, c1, 1}, {1, tau, 2}, {2, r1, 3}, {3, c1, 3}});
  EXPECT_TRUE(refines_bounded(impl, spec, Gamma::calls_returns(), 3).holds);
  auto r = refines_bounded(impl, spec, Gamma::calls_returns(), 4);
  EXPECT_FALSE(r.holds);
  EXPECT_EQ(r.counterexample, (Trace{c1, tau, r1, c1}));
  EXPECT_TRUE(refines_bounded(spec, impl, Gamma::calls_returns(), 10).holds);
}

// Depth bounds the concrete side's raw trace length, so the middle LTS must be
// checked without a bound for the chain to compose.
TEST(Refinement, TransitiveWithUnboundedMiddleStep) {
  std::mt19937 rng(5);
  const std::vector<Action> alphabet{c1, r1, tau};
  int chains = 0;
  for (int round = 0; round < 300; ++round) {
    Lts a1 = conch::testing::random_lts(rng, 3, alphabet, 0.45);
    Lts a2 = conch::testing::random_lts(rng, 3, alphabet, 0.55);
    Lts a3 = conch::testing::random_lts(rng, 3, alphabet, 0.65);
    const auto g = Gamma::calls_returns();
    for (std::size_t d : {2u, 4u}) {
      if (refines_bounded(a1, a2, g, d).holds && refines_bounded(a2, a3, g, SIZE_MAX).holds) {
        ++chains;
        EXPECT_TRUE(refines_bounded(a1, a3, g, d).holds);
      }
    }
  }
  EXPECT_GT(chains, 10);
}

TEST(Refinement, FixedDepthChainCanBreak) {
  Lts a1 = make_lts(2, {{0, c1, 1}});
  Lts a2 = make_lts(3, {{0, tau, 1}, {1, c1, 2}});
  Lts a3 = make_lts(1, {});
  const auto g = Gamma::calls_returns();
  EXPECT_TRUE(refines_bounded(a1, a2, g, 1).holds);
  EXPECT_TRUE(refines_bounded(a2, a3, g, 1).holds);
  EXPECT_FALSE(refines_bounded(a1, a3, g, 1).holds);
  EXPECT_FALSE(refines_bounded(a2, a3, g, 2).holds);
}

TEST(Refinement, AgreesWithTraceEnumeration) {
  std::mt19937 rng(9);
  const std::vector<Action> alphabet{c1, r1, tau};
  const auto g = Gamma::calls_returns();
  for (int round = 0; round < 100; ++round) {
    Lts a1 = conch::testing::random_lts(rng, 3, alphabet, 0.5);
    Lts a2 = conch::testing::random_lts(rng, 3, alphabet, 0.5);
    const std::size_t d = 5;
    auto closure = [&](std::set<StateId> set) {
      bool grew = true;
      while (grew) {
        grew = false;
        for (auto s : std::set<StateId>(set))
          for (const auto& e : a2.out(s))
            if (!g.contains(a2.action(e.action))) grew |= set.insert(e.target).second;
      }
      return set;
    };
    auto member = [&](const Trace& w) {
      std::set<StateId> cur = closure({a2.initial()});
      for (const auto& x : w) {
        std::set<StateId> next;
        for (auto s : cur)
          for (const auto& e : a2.out(s))
            if (a2.action(e.action) == x) next.insert(e.target);
        cur = closure(next);
        if (cur.empty()) return false;
      }
      return true;
    };
    bool included = true;
    for (const auto& t : traces(a1, d)) included &= member(project(t, g));
    EXPECT_EQ(refines_bounded(a1, a2, g, d).holds, included);
  }
}

TEST(Relabel, RenamesEveryEdge) {
  Lts a = make_lts(2, {{0, c1, 1}, {1, r1, 0}});
  Lts b = relabel(a, [](const Action& x) { return Action::internal("hidden." + x.to_string()); });
  EXPECT_EQ(b.num_transitions(), 2u);
  for (const auto& x : b.alphabet()) EXPECT_TRUE(x.is_internal());
}
