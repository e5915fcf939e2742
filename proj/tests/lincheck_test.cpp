#include <gtest/gtest.h>

#include <random>

#include "conch/lincheck.hpp"
#include "lin_oracle.hpp"

using namespace conch;

namespace {

Action call(const char* m, const char* v, OpId k) { return Action::call(m, v, k); }
Action ret(const char* m, const char* v, OpId k) { return Action::ret(m, v, k); }

History seq(std::initializer_list<std::tuple<const char*, const char*, const char*>> ops) {
  History h;
  OpId k = 1;
  for (const auto& [m, a, r] : ops) {
    h.push_back(Action::call(m, a, k));
    h.push_back(Action::ret(m, r, k));
    ++k;
  }
  return h;
}

const SequentialSpec kStack = specs::stack_spec({"0", "1", "2"});
const SequentialSpec kRegister = specs::register_spec({"0", "1"});

}  // namespace

TEST(History, WellFormedness) {
  EXPECT_TRUE(is_well_formed({}));
  EXPECT_TRUE(is_well_formed({call("push", "1", 1), call("pop", "_", 2), ret("push", "OK", 1)}));
  EXPECT_FALSE(is_well_formed({ret("push", "OK", 1)}));
  EXPECT_FALSE(is_well_formed({call("push", "1", 1), call("pop", "_", 1)}));
  EXPECT_FALSE(is_well_formed({call("push", "1", 1), ret("pop", "1", 1)}));
  EXPECT_FALSE(is_well_formed({call("push", "1", 1), ret("push", "OK", 1), ret("push", "OK", 1)}));
  EXPECT_FALSE(is_well_formed({call("push", "1", 0)}));
  EXPECT_FALSE(is_well_formed({Action::internal("x")}));
  EXPECT_THROW(require_well_formed({ret("push", "OK", 1)}), InputError);
}

TEST(History, Sequential) {
  EXPECT_TRUE(is_sequential({}));
  EXPECT_TRUE(is_sequential(seq({{"push", "1", "OK"}, {"pop", "_", "1"}})));
  EXPECT_FALSE(is_sequential({call("push", "1", 1)}));
  EXPECT_FALSE(is_sequential({call("push", "1", 1), call("pop", "_", 2), ret("push", "OK", 1), ret("pop", "1", 2)}));
}

TEST(History, HistProjectsCallsAndReturns) {
  Trace t{call("push", "1", 1), Action::internal("s.a(1)"), Action::program("p"), ret("push", "OK", 1)};
  EXPECT_EQ(hist(t), (History{call("push", "1", 1), ret("push", "OK", 1)}));
}

TEST(HistoryParse, RoundTripAndComments) {
  const std::string text = "# header\ncall push 1 1\n\ncall pop _ 2   # overlapping\nret push OK 1\nret pop 1 2\n";
  History h = parse_history(text);
  ASSERT_EQ(h.size(), 4u);
  EXPECT_EQ(h[3], ret("pop", "1", 2));
  EXPECT_EQ(parse_history(format_history(h)), h);
}

TEST(HistoryParse, ErrorsCarryLineNumbers) {
  auto line_of = [](const std::string& text) {
    try {
      parse_history(text);
    } catch (const InputError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  EXPECT_EQ(line_of("call push 1 1\nbogus push 1 2\n"), 2u);
  EXPECT_EQ(line_of("call push 1 1\n\n\ncall push 1 x\n"), 4u);
  EXPECT_EQ(line_of("call push 1\n"), 1u);
  EXPECT_EQ(line_of("call push 1 1 extra\n"), 1u);
  EXPECT_EQ(line_of("call push 1 1\nret pop 1 1\n"), 2u);
  EXPECT_EQ(line_of("call push 1 -3\n"), 1u);
  EXPECT_EQ(line_of("ret push OK 1\n"), 1u);
}

TEST(Linearizes, IdentityOnSequential) {
  History h = seq({{"push", "1", "OK"}, {"pop", "_", "1"}});
  auto w = linearizes(h, h);
  ASSERT_TRUE(w);
  EXPECT_EQ(w->order(), (std::vector<OpId>{1, 2}));
  EXPECT_EQ(w->completion, h);
}

TEST(Linearizes, OverlappingPushPop) {
  History h1{call("push", "2", 3), call("pop", "_", 4), ret("push", "OK", 3), ret("pop", "2", 4)};
  History h2{call("push", "2", 3), ret("push", "OK", 3), call("pop", "_", 4), ret("pop", "2", 4)};
  EXPECT_TRUE(linearizes(h1, h2));
  History swapped{call("pop", "_", 4), ret("pop", "2", 4), call("push", "2", 3), ret("push", "OK", 3)};
  EXPECT_TRUE(linearizes(h1, swapped));  // ⊑ ignores legality
}

TEST(Linearizes, RespectsReturnBeforeCall) {
  History h1 = seq({{"push", "1", "OK"}, {"pop", "_", "EMPTY"}});
  History h2{call("pop", "_", 2), ret("pop", "EMPTY", 2), call("push", "1", 1), ret("push", "OK", 1)};
  EXPECT_FALSE(linearizes(h1, h2));
  EXPECT_FALSE(is_linearizable(h1, kStack));
}

TEST(Linearizes, PendingCallsMayBeCompletedOrDropped) {
  History h1{call("push", "1", 1), call("pop", "_", 2), ret("pop", "1", 2)};
  EXPECT_TRUE(linearizes(h1, seq({{"push", "1", "OK"}, {"pop", "_", "1"}})));
  History dropped{call("pop", "_", 2), ret("pop", "1", 2)};
  EXPECT_TRUE(linearizes(h1, dropped));
  History foreign{call("push", "1", 1), ret("push", "OK", 1), call("pop", "_", 2), ret("pop", "1", 2),
                  call("pop", "_", 9), ret("pop", "EMPTY", 9)};
  EXPECT_FALSE(linearizes(h1, foreign));
}

TEST(Linearizes, ReturnedOpsMustKeepTheirValues) {
  History h1 = seq({{"pop", "_", "1"}});
  EXPECT_FALSE(linearizes(h1, seq({{"pop", "_", "2"}})));
  EXPECT_FALSE(linearizes(h1, {}));
}

TEST(Linearizes, ContractErrors) {
  History overlapping{call("push", "1", 1), call("pop", "_", 2), ret("push", "OK", 1), ret("pop", "1", 2)};
  EXPECT_THROW(linearizes(overlapping, overlapping), ContractViolation);
  EXPECT_THROW(linearizes({ret("pop", "1", 1)}, {}), InputError);
}

TEST(IsLinearizable, Examples) {
  EXPECT_TRUE(is_linearizable({}, kStack));
  // all pushes complete, pops overlap with the last push
  History fig2{call("push", "0", 1), call("push", "1", 2), ret("push", "OK", 1), ret("push", "OK", 2),
               call("pop", "_", 3), call("pop", "_", 4), call("push", "2", 5), ret("push", "OK", 5),
               ret("pop", "1", 3), ret("pop", "2", 4)};
  auto w = is_linearizable(fig2, kStack);
  ASSERT_TRUE(w);
  EXPECT_TRUE(is_sequential(w->sequential));
  EXPECT_TRUE(is_legal_sequential(kStack, w->sequential));
  EXPECT_TRUE(linearizes(fig2, w->sequential));
  History stale_read{call("write", "1", 1), ret("write", "OK", 1), call("read", "_", 2), ret("read", "0", 2)};
  EXPECT_FALSE(is_linearizable(stale_read, kRegister));
}

TEST(IsLinearizable, PendingOpsAreCompletedInWitness) {
  History h{call("push", "1", 1), call("pop", "_", 2), ret("pop", "1", 2), call("push", "2", 3)};
  auto w = is_linearizable(h, kStack);
  ASSERT_TRUE(w);
  EXPECT_EQ(w->sequential.size(), 6u);
  EXPECT_EQ(w->completion.size(), h.size() + 2);
  EXPECT_TRUE(is_legal_sequential(kStack, w->sequential));
}

TEST(IsLinearizable, WitnessIsLexicographicallyLeast) {
  History h{call("push", "1", 1), call("push", "2", 2), ret("push", "OK", 1), ret("push", "OK", 2)};
  auto w = is_linearizable(h, kStack);
  ASSERT_TRUE(w);
  EXPECT_EQ(w->order(), (std::vector<OpId>{1, 2}));
}

TEST(IsLinearizable, RejectsTooManyOps) {
  History h;
  for (OpId k = 1; k <= 65; ++k) h.push_back(call("pop", "_", k));
  EXPECT_THROW(is_linearizable(h, kStack), ContractViolation);
}

TEST(LinOracle, CheckerMatchesBruteForceOnRandomHistories) {
  std::mt19937 rng(17);
  const SequentialSpec queue = specs::queue_spec({"1", "2"});
  const std::vector<std::pair<const SequentialSpec*, std::vector<std::array<const char*, 2>>>> cases{
      {&kRegister, {{"write", "0"}, {"write", "1"}, {"read", "_"}}},
      {&queue, {{"enq", "1"}, {"enq", "2"}, {"deq", "_"}}},
  };
  for (const auto& [spec, methods] : cases) {
    LinChecker checker(*spec);
    int linearizable = 0;
    for (int round = 0; round < 1500; ++round) {
      History h;
      std::vector<std::pair<OpId, std::array<const char*, 2>>> open;
      OpId next = 1;
      std::uniform_int_distribution<int> nops(0, 5);
      const int total = nops(rng);
      while (static_cast<int>(next) <= total || (!open.empty() && rng() % 3)) {
        if (static_cast<int>(next) <= total && (open.empty() || rng() % 2)) {
          auto m = methods[rng() % methods.size()];
          h.push_back(Action::call(m[0], m[1], next));
          open.emplace_back(next++, m);
        } else {
          const auto i = rng() % open.size();
          const auto& rv = spec->return_values;
          h.push_back(Action::ret(Symbol(open[i].second[0]), rv[rng() % rv.size()], open[i].first));
          open.erase(open.begin() + static_cast<long>(i));
        }
      }
      const bool expected = oracle::brute_force_linearizable(h, *spec);
      linearizable += expected;
      auto w = checker.check(h);
      EXPECT_EQ(w.has_value(), expected) << format_history(h);
      if (w) {
        EXPECT_TRUE(is_legal_sequential(*spec, w->sequential));
        EXPECT_TRUE(linearizes(h, w->sequential));
      }
    }
    EXPECT_GT(linearizable, 50);
  }
}

// Exhaustive at up to four operations over every event interleaving; the
// acceptance binary covers six operations per precedence class.
TEST(LinOracle, StackAllShapesUpToFourOps) {
  const SequentialSpec stack = specs::stack_spec({"0", "1"});
  LinChecker checker(stack);
  std::size_t histories = 0, positives = 0;
  for (std::size_t n = 0; n <= 4; ++n) {
    for (const auto& shape : oracle::all_shapes(n)) {
      const auto expected = oracle::linearizable_labelings(shape);
      for (std::size_t i = 0; i < expected.size(); ++i) {
        const History h = oracle::StackLabels::history(shape, oracle::StackLabels::digits(shape, i));
        ++histories;
        positives += expected[i];
        ASSERT_EQ(checker.linearizable(h), expected[i]) << format_history(h);
      }
    }
  }
  EXPECT_GT(positives, 1000u);
  EXPECT_GT(histories, 100000u);
}

TEST(LinOracle, GeneratingOracleMatchesPerHistoryBruteForce) {
  const SequentialSpec stack = specs::stack_spec({"0", "1"});
  std::mt19937 rng(23);
  for (std::size_t n = 1; n <= 4; ++n) {
    auto shapes = oracle::representative_shapes(n);
    for (int round = 0; round < 40; ++round) {
      const auto& shape = shapes[rng() % shapes.size()];
      const auto expected = oracle::linearizable_labelings(shape);
      const std::size_t i = rng() % expected.size();
      const History h = oracle::StackLabels::history(shape, oracle::StackLabels::digits(shape, i));
      EXPECT_EQ(oracle::brute_force_linearizable(h, stack), expected[i]) << format_history(h);
    }
  }
}

TEST(LinOracle, LinearizesMatchesBruteForce) {
  for (std::size_t n = 0; n <= 4; ++n) {
    for (const auto& shape : oracle::all_shapes(n)) {
      std::vector<std::size_t> digits(n);
      for (std::size_t op = 0; op < n; ++op) digits[op] = op % 3;
      const History h1 = oracle::StackLabels::history(shape, digits);
      // candidate h2: every subset of ops in every order, with returns taken from h1 or defaulted
      for (std::uint32_t keep = 0; keep < (1u << n); ++keep) {
        std::vector<std::size_t> kept;
        for (std::size_t op = 0; op < n; ++op)
          if (keep & (1u << op)) kept.push_back(op);
        do {
          History h2;
          for (auto op : kept) {
            const Action& c = *std::find_if(h1.begin(), h1.end(), [&](const Action& a) {
              return a.is_call() && a.op == op + 1;
            });
            auto r = std::find_if(h1.begin(), h1.end(), [&](const Action& a) { return a.is_return() && a.op == op + 1; });
            h2.push_back(c);
            h2.push_back(r != h1.end() ? *r : Action::ret(c.method, values::empty(), c.op));
          }
          EXPECT_EQ(linearizes(h1, h2).has_value(), oracle::brute_force_linearizes(h1, h2));
        } while (std::next_permutation(kept.begin(), kept.end()));
      }
    }
  }
}
