#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>

#include "gradcheck.h"
#include "scramble/eval.h"
#include "scramble/parser.h"
#include "scramble/projective.h"
#include "scramble/synthetic.h"
#include "support.h"

using namespace scramble;

namespace {

ParserConfig tiny_config() {
  ParserConfig cfg;
  cfg.word_dim = 6;
  cfg.tag_dim = 3;
  cfg.char_dim = 3;
  cfg.char_hidden = 3;
  cfg.lstm_hidden = 4;
  cfg.mlp_hidden = 5;
  cfg.epochs = 2;
  return cfg;
}

ParserConfig small_config() {
  ParserConfig cfg;
  cfg.word_dim = 16;
  cfg.tag_dim = 8;
  cfg.char_dim = 8;
  cfg.char_hidden = 16;
  cfg.lstm_hidden = 24;
  cfg.mlp_hidden = 48;
  return cfg;
}

Treebank corpus(int n, std::uint64_t seed) {
  SyntheticGrammar g = SyntheticGrammar::hindi_like();
  g.order_probs = {0.5, 0.3, 0.05, 0.05, 0.05, 0.05};
  return gen_synthetic(g, n, seed);
}

bool same_params(const nn::ParameterSet& a, const nn::ParameterSet& b) {
  auto pa = a.all();
  auto pb = b.all();
  if (pa.size() != pb.size()) return false;
  for (size_t i = 0; i < pa.size(); ++i) {
    if (pa[i]->name != pb[i]->name || pa[i]->value != pb[i]->value) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("vocabulary") {
  Vocab v;
  CHECK(v.size() == 3);
  CHECK(v.id("<pad>") == Vocab::kPad);
  CHECK(v.id("<unk>") == Vocab::kUnk);
  CHECK(v.id("<null>") == Vocab::kNull);
  CHECK(v.add("x") == 3);
  CHECK(v.add("x") == 3);
  CHECK(v.id("nope") == Vocab::kUnk);
  Vocab copy(v.items());
  CHECK(copy.id("x") == 3);
  CHECK_THROWS_AS(Vocab(std::vector<std::string>{"a"}), Error);
}

TEST_CASE("code points") {
  auto cps = utf8_code_points("kitAb");
  CHECK(cps.size() == 5);
  auto dev = utf8_code_points("किताब");
  CHECK(dev.size() == 5);
  CHECK(dev[0] == "क");
  CHECK(utf8_code_points("∥a").size() == 2);
  CHECK(utf8_code_points("").empty());
}

TEST_CASE("config round trip and files") {
  ParserConfig cfg;
  cfg.set("epochs", "7");
  cfg.set("word_dropout", "0.25");
  cfg.set("pseudo_projective", "false");
  ParserConfig back = ParserConfig::from_map(cfg.to_map());
  CHECK(back.epochs == 7);
  CHECK(back.word_dropout == 0.25);
  CHECK(!back.pseudo_projective);
  CHECK(back.to_map() == cfg.to_map());
  CHECK_THROWS_AS(cfg.set("nope", "1"), Error);
  CHECK_THROWS_AS(cfg.set("epochs", "x"), Error);
  CHECK_THROWS_AS(cfg.set("word_dropout", "1e"), Error);

  ParserConfig defaults;
  CHECK(defaults.word_dim == 64);
  CHECK(defaults.tag_dim == 32);
  CHECK(defaults.char_hidden == 64);
  CHECK(defaults.lstm_hidden == 128);
  CHECK(defaults.lstm_layers == 2);
  CHECK(defaults.mlp_hidden == 128);
  CHECK(defaults.word_dropout == 0.1);
  CHECK(defaults.hidden_dropout == 0.5);
  CHECK(defaults.epochs == 20);
  CHECK(defaults.learning_rate == 0.01);
  CHECK(defaults.momentum == 0.9);
  CHECK(defaults.l2 == 1e-6);
  CHECK(defaults.max_chars == 32);
  CHECK(defaults.seed == 42);

  {
    std::ofstream out("parser_cfg_tmp.txt");
    out << "# comment\nepochs = 3\n\nlstm_hidden=16  # trailing\n";
  }
  auto kv = read_key_values("parser_cfg_tmp.txt");
  CHECK(kv.size() == 2);
  CHECK(kv["lstm_hidden"] == "16");
  CHECK(ParserConfig::from_map(kv).epochs == 3);
  std::remove("parser_cfg_tmp.txt");
  CHECK(format_key_values({{"a", "1"}}) == "a = 1\n");
}

TEST_CASE("pre-trained embeddings") {
  {
    std::ofstream out("emb_tmp.txt");
    out << "rAma 1 2 3 4 5 6\nnewword 0 0 0 0 0 1\n";
  }
  auto e = read_embeddings("emb_tmp.txt", 6);
  CHECK(e.size() == 2);
  CHECK(e["rAma"][5] == 6.0);
  CHECK_THROWS_AS(read_embeddings("emb_tmp.txt", 5), Error);
  ParserConfig cfg = tiny_config();
  cfg.embeddings = "emb_tmp.txt";
  ParserModel m = ParserModel::create(corpus(5, 1), cfg);
  CHECK(m.word_vocab().contains("newword"));
  const auto& emb = m.params().get("parser.enc.word_emb").value;
  CHECK(emb(5, m.word_vocab().id("rAma")) == 6.0);
  std::remove("emb_tmp.txt");
}

TEST_CASE("encoder shapes, word dropout rate and OOV words") {
  Treebank tb = corpus(20, 2);
  ParserModel m = ParserModel::create(tb, tiny_config());
  const auto& enc = m.encoder();
  auto in = m.make_input(tb.trees[0].forms(), tb.trees[0].upos_tags());
  nn::Matrix ctx = enc.forward(in, 0.0, nullptr, nullptr);
  CHECK(ctx.rows() == enc.output_size());
  CHECK(ctx.cols() == tb.trees[0].size() + 1);
  CHECK_THROWS_AS(enc.forward(SentenceEncoder::Input{}, 0.0, nullptr, nullptr), Error);

  // Word dropout frequency.
  nn::Rng rng(3);
  long dropped = 0, total = 0;
  while (total < 10000) {
    SentenceEncoder::Trace trace;
    enc.forward(in, 0.1, &rng, &trace);
    for (bool d : trace.word_dropped) dropped += d ? 1 : 0;
    total += static_cast<long>(trace.word_dropped.size());
  }
  CHECK(std::abs(static_cast<double>(dropped) / total - 0.1) < 0.01);

  // An unknown word is represented exactly like a dropped word.
  auto words = tb.trees[0].forms();
  words[0] = "neverseen";
  auto oov = m.make_input(words, tb.trees[0].upos_tags());
  CHECK(oov.words[0] == Vocab::kUnk);
  SentenceEncoder::Trace a, b;
  enc.forward(oov, 0.0, nullptr, &a);
  nn::Rng all(1);
  auto known = in;
  known.chars = oov.chars;
  // Dropout 0.999999 drops every word with this seed.
  enc.forward(known, 0.999999, &all, &b);
  CHECK(b.word_dropped[0]);
  CHECK(a.input.col(0) == b.input.col(0));
}

TEST_CASE("feature selectors") {
  Configuration init = initial_config(3);
  FeatureNodes f = feature_nodes(init);
  CHECK(f[0] == 0);
  CHECK(f[3] == 1);
  int present = 0;
  for (int k = 0; k < kFeatureCount; ++k) present += f[k] >= 0 ? 1 : 0;
  CHECK(present == 2);

  Configuration c = initial_config(3);
  for (const auto& t : parse_sequence("SH LA:nsubj RA:root RA:obj")) c = apply(c, t);
  FeatureNodes end = feature_nodes(c);
  CHECK(end[3] == -1);
  CHECK(end[10] == -1);
  CHECK(end[0] == 3);
  CHECK(end[1] == 2);
  CHECK(end[2] == 0);
  CHECK(end[6] == 1);  // leftmost child of the verb
  CHECK(end[7] == 3);  // rightmost child of the verb
  CHECK(end[9] == 2);  // rightmost child of ROOT

  nn::Matrix ctx = nn::Matrix::Random(4, 4);
  nn::Vector null = nn::Vector::Constant(4, 9.0);
  nn::Vector x0 = featurize(init, ctx, null);
  nn::Vector x1 = featurize(c, ctx, null);
  CHECK(x0.size() == 44);
  CHECK(x1.size() == 44);
  CHECK(x0.segment(0, 4) == ctx.col(3));  // ROOT sits in the last column
  CHECK(x0.segment(12, 4) == ctx.col(0));
  CHECK(x0.segment(4, 4) == null);
}

TEST_CASE("transition classes") {
  ParserModel m = ParserModel::create(corpus(10, 4), tiny_config());
  CHECK(m.class_count() == 2 + 2 * static_cast<int>(m.labels().size()));
  for (int c = 0; c < m.class_count(); ++c) {
    CHECK(m.transition_class(m.class_transition(c)) == c);
  }
  CHECK(m.transition_class(Transition::shift()) == 0);
  CHECK(m.transition_class(Transition::reduce()) == 1);
  CHECK_THROWS_AS(m.transition_class(Transition::left_arc("unseen")), Error);
}

TEST_CASE("end-to-end parser gradient on two sentences") {
  Treebank tb = corpus(2, 5);
  ParserConfig cfg = tiny_config();
  ParserModel m = ParserModel::create(tb, cfg);
  // Non-zero UNK rows would only matter for OOV words; randomise the rest
  // so every path carries gradient.
  nn::Rng rng(6);
  for (auto* p : m.params().all()) nn::uniform_init(*p, 0.3, rng);
  auto loss = [&] {
    double total = 0;
    for (const auto& t : tb.trees) total += m.accumulate_gradients(t, nullptr, false);
    return total;
  };
  // The summed loss is large, so a wider step keeps roundoff below the tolerance.
  auto report = testing::check_params(m.params(), loss, loss, 25, 1e-4);
  CHECK_MESSAGE(report.worst < 1e-4, report.where);
  CHECK(report.checked > 200);
}

TEST_CASE("parse always yields a valid tree") {
  Treebank tb = corpus(30, 7);
  ParserModel m = ParserModel::create(tb, tiny_config());
  std::mt19937_64 rng(8);
  for (int i = 0; i < 50; ++i) {
    int n = 1 + static_cast<int>(rng() % 15);
    std::vector<std::string> words, tags;
    for (int k = 0; k < n; ++k) {
      words.push_back(rng() % 2 ? tb.trees[0].token(1).form : "zz" + std::to_string(rng() % 100));
      tags.push_back(rng() % 2 ? "NOUN" : "WEIRD");
    }
    DepTree out = m.parse(words, tags);
    CHECK(out.size() == n);
    CHECK(validate_tree(out).empty());
    CHECK(m.decode_transitions(words, tags).size() <= static_cast<size_t>(3 * n));
  }
  DepTree one = m.parse({"calo"}, {"VERB"});
  CHECK(one.head(1) == 0);
  CHECK_THROWS_AS(m.parse(DepTree{}), Error);
}

TEST_CASE("training guards, determinism and checkpoints") {
  Treebank tb = corpus(12, 9);
  ParserConfig cfg = tiny_config();
  CHECK_THROWS_AS(train_parser(Treebank{}, Treebank{}, cfg), Error);
  Treebank bad = tb;
  bad.trees.push_back(testing::make_tree({3, 0, 2, 2}));
  CHECK_THROWS_AS(train_parser(bad, Treebank{}, cfg), Error);

  std::vector<EpochLog> logs;
  ParserModel a = train_parser(tb, tb, cfg, [&](const EpochLog& l) { logs.push_back(l); });
  ParserModel b = train_parser(tb, tb, cfg);
  CHECK(logs.size() == 2);
  CHECK(logs[0].dev_las >= 0);
  CHECK(same_params(a.params(), b.params()));

  a.save("parser_tmp.bin", "unit");
  ParserModel c = ParserModel::load("parser_tmp.bin");
  CHECK(same_params(a.params(), c.params()));
  CHECK(c.labels() == a.labels());
  for (const auto& t : tb.trees) CHECK(c.parse(t) == a.parse(t));
  std::remove("parser_tmp.bin");
  CHECK_THROWS_AS(ParserModel::load("/nonexistent/model.bin"), Error);
}

TEST_CASE("loss falls monotonically over the first ten epochs on 20 sentences") {
  // Default hyperparameters; the loss is measured without dropout after each epoch.
  Treebank tb = corpus(20, 10);
  ParserConfig cfg;
  cfg.epochs = 10;
  std::vector<double> losses;
  train_parser(tb, Treebank{}, cfg, [&](const EpochLog& l) {
    double total = 0;
    for (const auto& t : tb.trees) total += l.model->loss(t);
    losses.push_back(total);
  });
  REQUIRE(losses.size() == 10);
  for (size_t i = 1; i < losses.size(); ++i) {
    CHECK_MESSAGE(losses[i] < losses[i - 1], "epoch " << i + 1);
  }
}

TEST_CASE("loss agrees with the gradient pass") {
  Treebank tb = corpus(3, 12);
  ParserModel m = ParserModel::create(tb, tiny_config());
  for (const auto& t : tb.trees) {
    const double a = m.loss(t);
    CHECK(m.accumulate_gradients(t, nullptr, false) == doctest::Approx(a).epsilon(1e-12));
  }
}

TEST_CASE("tagger") {
  Treebank tb = corpus(15, 11);
  ParserConfig cfg = tiny_config();
  CHECK_THROWS_AS(train_tagger(Treebank{}, Treebank{}, cfg), Error);
  TaggerModel t = train_tagger(tb, Treebank{}, cfg);
  auto tags = t.tag({"qqq", "zzz", "kitAb"});
  CHECK(tags.size() == 3);
  TaggerModel t2 = train_tagger(tb, Treebank{}, cfg);
  CHECK(t2.tag(tb.trees[0].forms()) == t.tag(tb.trees[0].forms()));

  Treebank single = tb;
  for (auto& tree : single.trees) {
    for (auto& tok : tree.tokens()) tok.upos = "X";
  }
  TaggerModel one = train_tagger(single, Treebank{}, cfg);
  CHECK(one.tagset().size() == 1);
  CHECK(tagging_accuracy(one, single) == 100.0);

  t.save("tagger_tmp.bin");
  TaggerModel back = TaggerModel::load("tagger_tmp.bin");
  CHECK(back.tag(tb.trees[1].forms()) == t.tag(tb.trees[1].forms()));
  CHECK_THROWS_AS(ParserModel::load("tagger_tmp.bin"), Error);
  std::remove("tagger_tmp.bin");
}
