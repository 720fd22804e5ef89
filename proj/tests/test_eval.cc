#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "json.hpp"
#include "scramble/eval.h"
#include "scramble/parser.h"
#include "scramble/synthetic.h"
#include "support.h"

using namespace scramble;
using testing::make_tree;

namespace {

Treebank one(DepTree t) {
  Treebank tb;
  tb.trees.push_back(std::move(t));
  return tb;
}

}  // namespace

TEST_CASE("identical trees score 100") {
  DepTree g = make_tree({2, 0, 2}, {"nsubj", "root", "obj"});
  ParseScore s = score(one(g), one(g));
  CHECK(s.las == 100.0);
  CHECK(s.uas == 100.0);
  CHECK(s.tokens_scored == 3);
}

TEST_CASE("right heads with wrong labels") {
  DepTree g = make_tree({2, 0, 2}, {"nsubj", "root", "obj"});
  DepTree p = make_tree({2, 0, 2}, {"obj", "dep", "nsubj"});
  ParseScore s = score(one(g), one(p));
  CHECK(s.uas == 100.0);
  CHECK(s.las == 0.0);
}

TEST_CASE("ten tokens, seven heads and six labels right") {
  std::vector<int> heads = {2, 0, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<std::string> labels(10, "dep");
  labels[1] = "root";
  DepTree g = make_tree(heads, labels);
  auto ph = heads;
  auto pl = labels;
  ph[7] = 1;
  ph[8] = 1;
  ph[9] = 1;  // three wrong heads
  pl[6] = "x";  // one wrong label on a right head
  ParseScore s = score(one(g), one(make_tree(ph, pl)));
  CHECK(s.uas == doctest::Approx(70.0));
  CHECK(s.las == doctest::Approx(60.0));
}

TEST_CASE("punctuation handling") {
  DepTree g = make_tree({2, 0, 2}, {"nsubj", "root", "punct"}, {}, {"NOUN", "VERB", "PUNCT"});
  DepTree p = make_tree({2, 0, 1}, {"nsubj", "root", "punct"});
  CHECK(score(one(g), one(p)).las == 100.0);
  CHECK(score(one(g), one(p)).tokens_scored == 2);
  ParseScore with = score(one(g), one(p), false);
  CHECK(with.tokens_scored == 3);
  CHECK(with.uas == doctest::Approx(200.0 / 3));
  CHECK(!with.punctuation_excluded);
}

TEST_CASE("sums over sentences, not averages") {
  Treebank gold, pred;
  gold.trees.push_back(make_tree({0}));
  pred.trees.push_back(make_tree({0}));
  gold.trees.push_back(make_tree({0, 1, 1}));
  pred.trees.push_back(make_tree({2, 0, 2}));
  // 1 of 1 plus 0 of 3 (token 3 has head 1 in gold, 2 in pred).
  CHECK(score(gold, pred).uas == doctest::Approx(25.0));
}

TEST_CASE("misalignment names the sentence") {
  Treebank gold, pred;
  gold.trees.push_back(make_tree({0}));
  pred.trees.push_back(make_tree({0}));
  DepTree g = make_tree({0, 1});
  g.set_sentence_id("s-two");
  gold.trees.push_back(g);
  pred.trees.push_back(make_tree({0}));
  try {
    score(gold, pred);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("s-two") != std::string::npos);
  }
  pred.trees.pop_back();
  CHECK_THROWS_AS(score(gold, pred), Error);
}

TEST_CASE("tagging accuracy") {
  DepTree g = make_tree({2, 0}, {}, {}, {"NOUN", "VERB"});
  CHECK(pos_accuracy(one(g), {{"NOUN", "VERB"}}) == 100.0);
  CHECK(pos_accuracy(one(g), {{"NOUN", "NOUN"}}) == 50.0);
  CHECK_THROWS_AS(pos_accuracy(one(g), {{"NOUN"}}), Error);
}

TEST_CASE("scores by order class") {
  const auto m = DeprelMapping::universal();
  Treebank gold, pred;
  auto sov = make_tree({3, 3, 0}, {"nsubj", "obj", "root"});
  auto svo = make_tree({2, 0, 2}, {"nsubj", "root", "obj"});
  gold.trees = {sov, svo, sov};
  pred.trees = {sov, make_tree({2, 0, 1}, {"nsubj", "root", "obj"}), make_tree({3, 3, 0})};
  auto by = score_by_order(gold, pred, m);
  CHECK(by.size() == 2);
  CHECK(by[OrderLabel::kSOV].tokens_scored == 6);
  CHECK(by[OrderLabel::kSOV].uas == 100.0);
  CHECK(by[OrderLabel::kSOV].las == doctest::Approx(400.0 / 6));
  CHECK(by[OrderLabel::kSVO].uas == doctest::Approx(200.0 / 3));
  CHECK(by.count(OrderLabel::kOSV) == 0);
}

TEST_CASE("report formats") {
  LearningCurve c;
  ParseScore a;
  a.las = 50;
  a.uas = 62.5;
  a.tokens_scored = 8;
  c.points.emplace_back(200, a);
  CHECK(format_curve(c) == "size\tLAS\tUAS\n200\t50.00\t62.50\n");

  std::map<OrderLabel, ParseScore> by = {{OrderLabel::kSOV, a}};
  double pos = 97.5;
  auto j = nlohmann::json::parse(evaluation_record(a, by, &pos));
  CHECK(j["las"] == 50.0);
  CHECK(j["uas"] == 62.5);
  CHECK(j["n_tokens"] == 8);
  CHECK(j["by_order"]["SOV"]["las"] == 50.0);
  CHECK(j["pos_accuracy"] == 97.5);
  auto bare = nlohmann::json::parse(evaluation_record(a, {}));
  CHECK(!bare.contains("pos_accuracy"));
  CHECK(evaluation_table(a, by, &pos).find("50.00") != std::string::npos);
}

TEST_CASE("learning curve argument checks and shape") {
  Treebank train = gen_synthetic(SyntheticGrammar::hindi_like(), 12, 1);
  ParserConfig cfg;
  cfg.word_dim = 4;
  cfg.tag_dim = 2;
  cfg.char_dim = 2;
  cfg.char_hidden = 2;
  cfg.lstm_hidden = 4;
  cfg.mlp_hidden = 4;
  cfg.epochs = 1;
  CHECK_THROWS_AS(learning_curve(train, train, {6, 6}, cfg), Error);
  CHECK_THROWS_AS(learning_curve(train, train, {20}, cfg), Error);
  auto c = learning_curve(train, train, {4, 12}, cfg);
  REQUIRE(c.points.size() == 2);
  CHECK(c.points[0].first == 4);
  CHECK(c.points[1].second.tokens_scored > 0);
}
