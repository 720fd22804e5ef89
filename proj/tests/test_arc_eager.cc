#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "scramble/arc_eager.h"
#include "scramble/projective.h"
#include "support.h"

using namespace scramble;
using testing::make_tree;

namespace {

DepTree three_token() { return make_tree({2, 0, 2}, {"nsubj", "root", "obj"}); }

Configuration replay(int n, const std::vector<Transition>& seq) {
  Configuration c = initial_config(n);
  for (const auto& t : seq) c.apply(t);
  return c;
}

}  // namespace

TEST_CASE("initial configuration") {
  Configuration c = initial_config(3);
  CHECK(c.stack() == std::vector<int>{0});
  CHECK(c.buffer() == std::vector<int>{1, 2, 3});
  CHECK(c.arcs().empty());
  CHECK(initial_config(1).buffer() == std::vector<int>{1});
  CHECK_THROWS_AS(initial_config(0), Error);
}

TEST_CASE("legal transitions") {
  LegalSet init = legal_transitions(initial_config(2));
  CHECK(init.shift);
  CHECK(init.right_arc);
  CHECK(!init.left_arc);
  CHECK(!init.reduce);

  Configuration c = initial_config(1);
  c.apply(Transition::right_arc("root"));
  LegalSet end = legal_transitions(c);
  CHECK(!end.shift);
  CHECK(!end.left_arc);
  CHECK(!end.right_arc);
  CHECK(end.reduce);
}

TEST_CASE("apply") {
  Configuration c = initial_config(2);
  c.apply(Transition::shift());
  CHECK(c.stack() == std::vector<int>{0, 1});
  CHECK(c.buffer() == std::vector<int>{2});

  Configuration d = initial_config(2);
  d.apply(Transition::shift());
  try {
    d.apply(Transition::reduce());
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("no head") != std::string::npos);
  }
  CHECK_THROWS_AS(initial_config(2).apply(Transition::left_arc("x")), Error);
  // The free-function form leaves its input untouched.
  Configuration e = initial_config(2);
  Configuration f = apply(e, Transition::shift());
  CHECK(e.stack().size() == 1);
  CHECK(f.stack().size() == 2);
}

TEST_CASE("hand-simulated four-step sequence") {
  std::vector<Transition> seq = {Transition::shift(), Transition::left_arc("nsubj"),
                                 Transition::right_arc("root"), Transition::right_arc("obj")};
  Configuration c = initial_config(3);
  CHECK(!is_terminal(c));
  c.apply(seq[0]);
  c.apply(seq[1]);
  CHECK(c.head_of(1) == 2);
  CHECK(c.stack() == std::vector<int>{0});
  c.apply(seq[2]);
  CHECK(c.head_of(2) == 0);
  c.apply(seq[3]);
  CHECK(c.head_of(3) == 2);
  CHECK(is_terminal(c));
  CHECK(tree_from_config(three_token(), c) == three_token());
  CHECK(static_oracle(three_token()) == seq);
  CHECK(format_sequence(seq) == "SH LA:nsubj RA:root RA:obj");
  CHECK(parse_sequence("SH LA:nsubj RA:root RA:obj") == seq);
  CHECK(static_oracle(make_tree({0})) == std::vector<Transition>{Transition::right_arc("root")});
}

TEST_CASE("mnemonics") {
  CHECK(to_mnemonic(Transition::reduce()) == "RE");
  CHECK(from_mnemonic("LA:obj") == Transition::left_arc("obj"));
  CHECK_THROWS_AS(from_mnemonic("XX"), Error);
  CHECK_THROWS_AS(from_mnemonic("LA:"), Error);
}

TEST_CASE("oracle rejects non-projective trees") {
  CHECK_THROWS_AS(static_oracle(make_tree({3, 0, 2, 2})), Error);
}

TEST_CASE("oracle round trip and length bound on random projective trees") {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 500; ++i) {
    int n = std::uniform_int_distribution<int>(1, 25)(rng);
    DepTree t = testing::random_projective_tree(n, rng);
    REQUIRE(testing::crossing_free(t));
    auto seq = static_oracle(t);
    CHECK(static_cast<int>(seq.size()) <= 2 * n);
    Configuration c = initial_config(n);
    for (const auto& tr : seq) {
      CHECK(legal_transitions(c).allows(tr.kind));
      c.apply(tr);
      // Partition: every token is on the stack, in the buffer, or attached
      // and popped, and never on both stack and buffer.
      std::vector<int> seen(n + 1, 0);
      for (int s : c.stack()) ++seen[s];
      for (int b : c.buffer()) ++seen[b];
      for (int k = 1; k <= n; ++k) {
        if (seen[k] == 0) CHECK(c.has_head(k));
        CHECK(seen[k] <= 1);
      }
    }
    CHECK(is_terminal(c));
    CHECK(tree_from_config(t, c) == t);
  }
}

TEST_CASE("random legal decoding terminates with a valid tree") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 300; ++i) {
    int n = std::uniform_int_distribution<int>(1, 20)(rng);
    Configuration c = initial_config(n);
    int steps = 0;
    while (!is_terminal(c)) {
      LegalSet s = legal_transitions(c);
      std::vector<Transition> options;
      if (s.shift) options.push_back(Transition::shift());
      if (s.reduce) options.push_back(Transition::reduce());
      if (s.left_arc) options.push_back(Transition::left_arc("l"));
      if (s.right_arc) options.push_back(Transition::right_arc("r"));
      REQUIRE(!options.empty());
      c.apply(options[rng() % options.size()]);
      ++steps;
    }
    CHECK(steps <= 3 * n);
    DepTree words = make_tree(std::vector<int>(n, 0));
    DepTree out = tree_from_config(words, c);
    CHECK(validate_tree(out).empty());
  }
}
