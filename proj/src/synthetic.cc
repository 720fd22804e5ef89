#include "scramble/synthetic.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "scramble/error.h"

namespace scramble {

SyntheticGrammar SyntheticGrammar::hindi_like() {
  SyntheticGrammar g;
  g.subjects = {"rAma",  "sItA",   "larakA", "larakI", "mAz",     "pitA",  "bhAI",
                "bahana", "dosta", "adhyApaka", "chAtra", "neVtA", "kisAna", "rAjA",
                "rAnI",  "baccA",  "aurata", "AdamI",  "dAktara", "sipAhI"};
  g.objects = {"kitAba", "patra", "khAnA", "seba", "kapadZA", "ghadZI", "gAdZI",
               "KilOnA", "Kata",  "ghara", "pEsA", "phUla",   "dUdha",  "rotI",
               "cAya",   "kursI", "mEja",  "gIta", "kahAnI",  "tasvIra"};
  g.indirect_objects = {"mitra", "baccoM", "garIba", "mAlika", "guru", "padZosI"};
  g.adjuncts = {"bAjZAra", "ghara", "skUla", "dilli", "gAzva", "bagIce", "kamare", "sadZaka"};
  g.adjectives = {"baDZA", "choTA", "acchA", "purAnA", "nayA", "lAla", "sundara", "mIThA"};
  g.verbs = {"padZA", "likhA", "KAyA", "xiyA",  "liyA",  "becA",  "kharIxA",
             "xeKA",  "bheja", "banAyA", "sunA", "rAKA", "uTAyA", "khojA"};
  g.auxiliaries = {"hE", "WA", "gayA"};
  return g;
}

void SyntheticGrammar::check() const {
  double sum = 0.0;
  for (double p : order_probs) {
    if (p < 0.0) throw Error("cli", "negative order probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error("cli", "order probabilities must sum to 1");
  auto need = [](const std::vector<std::string>& v, const char* role, bool used) {
    if (used && v.empty()) throw Error("cli", std::string("empty vocabulary for ") + role);
  };
  need(subjects, "subjects", true);
  need(objects, "objects", true);
  need(verbs, "verbs", true);
  need(indirect_objects, "indirect objects", indirect_prob > 0);
  need(adjuncts, "adjuncts", adjunct_prob > 0);
  need(adjectives, "adjectives", adjective_prob > 0);
  need(auxiliaries, "auxiliaries", aux_prob > 0);
}

void SyntheticGrammar::set_orders(const std::string& spec) {
  std::array<double, 6> probs{};
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw Error("cli", "bad order spec '" + item + "'");
    OrderLabel label = parse_order_label(item.substr(0, eq));
    auto it = std::find(kTransitiveOrders.begin(), kTransitiveOrders.end(), label);
    if (it == kTransitiveOrders.end()) throw Error("cli", "bad order spec '" + item + "'");
    double p = 0.0;
    try {
      p = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw Error("cli", "bad order probability in '" + item + "'");
    }
    probs[it - kTransitiveOrders.begin()] = p;
  }
  order_probs = probs;
  check();
}

namespace {

struct Piece {
  std::string form;
  std::string upos;
  int head = -1;  // position within the clause, -1 for the root
  std::string deprel;
};

// A noun phrase as (adjective) noun (marker); the noun heads it.
struct Phrase {
  std::vector<Piece> pieces;
  int head = 0;  // offset of the head within pieces
};

template <typename T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
  std::uniform_int_distribution<size_t> d(0, v.size() - 1);
  return v[d(rng)];
}

bool coin(double p, std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

Phrase noun_phrase(const SyntheticGrammar& g, const std::vector<std::string>& nouns,
                   const std::string& label, const std::string& marker, bool marked,
                   std::mt19937_64& rng) {
  Phrase ph;
  if (!g.adjectives.empty() && coin(g.adjective_prob, rng)) {
    ph.pieces.push_back({pick(g.adjectives, rng), "ADJ", 1, "amod"});
    ph.head = 1;
  }
  ph.pieces.push_back({pick(nouns, rng), "NOUN", -1, label});
  if (marked) ph.pieces.push_back({marker, "ADP", ph.head, "case"});
  return ph;
}

}  // namespace

DepTree synthetic_tree(const SyntheticGrammar& g, OrderLabel order, std::mt19937_64& rng) {
  Phrase subj = noun_phrase(g, g.subjects, "nsubj", g.subject_marker,
                            coin(g.subject_marked, rng), rng);
  Phrase obj = noun_phrase(g, g.objects, "obj", g.object_marker, coin(g.object_marked, rng), rng);
  Phrase verb;
  verb.pieces.push_back({pick(g.verbs, rng), "VERB", -1, "root"});
  if (!g.auxiliaries.empty() && coin(g.aux_prob, rng)) {
    verb.pieces.push_back({pick(g.auxiliaries, rng), "AUX", 0, "aux"});
  }
  std::vector<Phrase> extra_before_obj;
  if (!g.indirect_objects.empty() && coin(g.indirect_prob, rng)) {
    extra_before_obj.push_back(
        noun_phrase(g, g.indirect_objects, "iobj", g.indirect_marker, true, rng));
  }

  // Lay out S, O, V; an indirect object rides just before the object.
  std::vector<Phrase> units;
  const std::string name = to_string(order);
  for (char c : name) {
    if (c == 'S') units.push_back(subj);
    if (c == 'O') {
      for (auto& e : extra_before_obj) units.push_back(e);
      units.push_back(obj);
    }
    if (c == 'V') units.push_back(verb);
  }
  if (!g.adjuncts.empty() && coin(g.adjunct_prob, rng)) {
    Phrase adj = noun_phrase(g, g.adjuncts, "obl", g.adjunct_marker, true, rng);
    std::uniform_int_distribution<size_t> gap(0, units.size() - 1);
    units.insert(units.begin() + static_cast<std::ptrdiff_t>(gap(rng)), adj);
  }

  // Flatten; phrase heads attach to the verb.
  std::vector<Token> tokens;
  int verb_pos = 0;
  std::vector<std::pair<int, int>> phrase_heads;  // token index, is verb
  for (const auto& ph : units) {
    const int base = static_cast<int>(tokens.size()) + 1;
    for (size_t k = 0; k < ph.pieces.size(); ++k) {
      const auto& pc = ph.pieces[k];
      Token t;
      t.index = base + static_cast<int>(k);
      t.form = pc.form;
      t.lemma = pc.form;
      t.upos = pc.upos;
      t.deprel = pc.deprel;
      t.head = pc.head < 0 ? -1 : base + pc.head;
      if (pc.deprel == "root") verb_pos = t.index;
      tokens.push_back(std::move(t));
    }
  }
  for (auto& t : tokens) {
    if (t.head == -1) t.head = t.deprel == "root" ? 0 : verb_pos;
  }
  Token punct;
  punct.index = static_cast<int>(tokens.size()) + 1;
  punct.form = g.final_punct;
  punct.lemma = g.final_punct;
  punct.upos = "PUNCT";
  punct.head = verb_pos;
  punct.deprel = "punct";
  tokens.push_back(std::move(punct));
  return DepTree(std::move(tokens));
}

Treebank gen_synthetic(const SyntheticGrammar& g, int n, std::uint64_t seed) {
  g.check();
  if (n < 0) throw Error("cli", "negative tree count");
  std::mt19937_64 rng(seed);
  std::discrete_distribution<int> pick_order(g.order_probs.begin(), g.order_probs.end());
  Treebank tb;
  tb.source_name = "synthetic";
  tb.trees.reserve(n);
  for (int i = 0; i < n; ++i) {
    DepTree t = synthetic_tree(g, kTransitiveOrders[pick_order(rng)], rng);
    t.set_sentence_id("synth-" + std::to_string(i + 1));
    tb.trees.push_back(std::move(t));
  }
  return tb;
}

std::vector<std::vector<std::string>> synthetic_text(const Treebank& tb) {
  std::vector<std::vector<std::string>> out;
  out.reserve(tb.trees.size());
  for (const auto& t : tb.trees) out.push_back(t.forms());
  return out;
}

}  // namespace scramble
