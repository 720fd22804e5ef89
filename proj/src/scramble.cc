#include "scramble/scramble.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>

#include "scramble/ngram.h"
#include "scramble/projective.h"

namespace scramble {

std::string to_string(OrderLabel label) {
  switch (label) {
    case OrderLabel::kSOV: return "SOV";
    case OrderLabel::kOSV: return "OSV";
    case OrderLabel::kOVS: return "OVS";
    case OrderLabel::kSVO: return "SVO";
    case OrderLabel::kVOS: return "VOS";
    case OrderLabel::kVSO: return "VSO";
    case OrderLabel::kNonTransitive: return "NONTRANSITIVE";
  }
  return "?";
}

OrderLabel parse_order_label(const std::string& text) {
  std::string upper;
  for (char ch : text) upper += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  for (auto l : kTransitiveOrders) {
    if (to_string(l) == upper) return l;
  }
  if (upper == "NONTRANSITIVE") return OrderLabel::kNonTransitive;
  throw Error("scramble-gen", "unknown order label '" + text + "'");
}

DeprelMapping DeprelMapping::universal() {
  DeprelMapping m;
  m.subject_labels = {"nsubj"};
  m.object_labels = {"obj", "dobj"};
  m.frozen_labels = {"punct"};
  m.verb_group_labels = {"aux", "aux:pass", "auxpass", "cop", "compound:prt", "compound:lvc"};
  return m;
}

DeprelMapping DeprelMapping::paninian() {
  DeprelMapping m;
  m.subject_labels = {"k1"};
  m.object_labels = {"k2"};
  m.frozen_labels = {"rsym"};
  m.verb_group_labels = {"lwg__vaux", "lwg__neg", "pof", "lwg__vaux_cont"};
  return m;
}

DeprelMapping DeprelMapping::preset(const std::string& name) {
  if (name == "ud") return universal();
  if (name == "pg") return paninian();
  throw Error("scramble-gen", "unknown label preset '" + name + "' (expected ud or pg)");
}

bool DeprelMapping::is_subject(const std::string& label) const {
  return subject_labels.count(base_label(label)) > 0;
}
bool DeprelMapping::is_object(const std::string& label) const {
  return object_labels.count(base_label(label)) > 0;
}
bool DeprelMapping::is_frozen(const std::string& label) const {
  return frozen_labels.count(base_label(label)) > 0;
}
bool DeprelMapping::is_verb_group(const std::string& label) const {
  return verb_group_labels.count(base_label(label)) > 0;
}
bool DeprelMapping::is_permutable(const std::string& label) const {
  const std::string b = base_label(label);
  if (frozen_labels.count(b) || verb_group_labels.count(b)) return false;
  return !permutable_labels || permutable_labels->count(b) > 0;
}

void DeprelMapping::check() const {
  for (const auto& s : subject_labels) {
    if (object_labels.count(s)) {
      throw Error("scramble-gen", "label '" + s + "' is both subject and object");
    }
  }
}

std::map<int, std::pair<int, int>> VerbalProjection::span_map() const {
  std::map<int, std::pair<int, int>> out;
  for (const auto& u : units) out[u.root] = {u.first, u.last};
  return out;
}

bool Variant::is_identity() const {
  for (size_t i = 0; i < permutation.size(); ++i) {
    if (permutation[i] != static_cast<int>(i)) return false;
  }
  return true;
}

bool is_verbal_head(const DepTree& tree, int index, const DeprelMapping& m,
                    const std::vector<std::vector<int>>& children) {
  if (children[index].empty()) return false;
  const std::string& upos = tree.token(index).upos;
  if (upos == "VERB" || upos == "AUX") return true;
  for (int c : children[index]) {
    if (m.is_subject(tree.deprel(c)) || m.is_object(tree.deprel(c))) return true;
  }
  return false;
}

namespace {

struct Spans {
  std::vector<int> first;
  std::vector<int> last;
};

Spans subtree_spans(const DepTree& tree) {
  const int n = tree.size();
  Spans s{std::vector<int>(n + 1), std::vector<int>(n + 1)};
  for (int i = 0; i <= n; ++i) s.first[i] = s.last[i] = i;
  for (int d = 1; d <= n; ++d) {
    for (int a = tree.head(d), steps = 0; steps <= n; a = tree.head(a), ++steps) {
      s.first[a] = std::min(s.first[a], d);
      s.last[a] = std::max(s.last[a], d);
      if (a == 0) break;
    }
  }
  return s;
}

}  // namespace

std::vector<VerbalProjection> extract_projections(const DepTree& tree, const DeprelMapping& m) {
  std::vector<VerbalProjection> out;
  const auto kids = tree.children();
  const Spans spans = subtree_spans(tree);

  for (int v = 1; v <= tree.size(); ++v) {
    if (!is_verbal_head(tree, v, m, kids)) continue;

    std::vector<int> group;
    std::vector<int> frozen;
    std::vector<Unit> units;
    for (int c : kids[v]) {
      const std::string& label = tree.deprel(c);
      if (m.is_frozen(label)) {
        frozen.push_back(c);
      } else if (!m.is_permutable(label)) {
        group.push_back(c);
      } else {
        units.push_back({c, spans.first[c], spans.last[c], false});
      }
    }

    Unit verb{v, v, v, true};
    std::vector<bool> absorbed(group.size(), false);
    for (bool grew = true; grew;) {
      grew = false;
      for (size_t k = 0; k < group.size(); ++k) {
        if (absorbed[k]) continue;
        const int c = group[k];
        if (spans.last[c] == verb.first - 1) {
          verb.first = spans.first[c];
        } else if (spans.first[c] == verb.last + 1) {
          verb.last = spans.last[c];
        } else {
          continue;
        }
        absorbed[k] = grew = true;
      }
    }
    for (size_t k = 0; k < group.size(); ++k) {
      if (!absorbed[k]) units.push_back({group[k], spans.first[group[k]], spans.last[group[k]], false});
    }
    units.push_back(verb);
    std::sort(units.begin(), units.end(),
              [](const Unit& a, const Unit& b) { return a.first < b.first; });

    // Frozen dependents inside the region travel with the unit before them;
    // those at the periphery stay where they are.
    const int region_first = units.front().first;
    const int region_last = units.back().last;
    for (int f : frozen) {
      if (spans.first[f] < region_first || spans.last[f] > region_last) continue;
      for (auto& u : units) {
        if (u.last == spans.first[f] - 1) {
          u.last = spans.last[f];
          break;
        }
      }
    }

    VerbalProjection p;
    p.verb_index = v;
    p.units = std::move(units);
    for (const auto& u : p.units) {
      if (!u.is_verb) p.constituent_roots.push_back(u.root);
    }
    out.push_back(std::move(p));
  }
  return out;
}

DepTree apply_permutation(const DepTree& tree, const VerbalProjection& p,
                          const std::vector<int>& permutation) {
  const int n = tree.size();
  if (permutation.size() != p.units.size()) {
    throw Error("scramble-gen", "permutation size does not match unit count");
  }
  std::vector<int> new_index(n + 1, 0);
  for (int i = 0; i <= n; ++i) new_index[i] = i;
  int next = p.units.front().first;
  for (int src : permutation) {
    const Unit& u = p.units.at(src);
    for (int i = u.first; i <= u.last; ++i) new_index[i] = next++;
  }

  std::vector<Token> tokens(n);
  for (int i = 1; i <= n; ++i) {
    Token tok = tree.token(i);
    tok.index = new_index[i];
    tok.head = new_index[tok.head];
    tokens[tok.index - 1] = std::move(tok);
  }
  DepTree out(std::move(tokens));
  out.set_sentence_id(tree.sentence_id());
  for (const auto& c : tree.comments()) {
    if (c.rfind("scramble_order=", 0) != 0) out.comments().push_back(c);
  }
  return out;
}

std::string provenance_comment(OrderLabel order, const std::vector<int>& permutation) {
  std::string s = "scramble_order=" + to_string(order) + " perm=";
  for (size_t i = 0; i < permutation.size(); ++i) {
    if (i > 0) s += ',';
    s += std::to_string(permutation[i]);
  }
  return s;
}

PermutationBatch permute_projection(const DepTree& tree, const VerbalProjection& p,
                                    const DeprelMapping& m, std::optional<int> limit,
                                    std::uint64_t seed) {
  const int units = p.unit_count();
  if (units < 1) throw Error("scramble-gen", "projection has no units");
  if (limit && *limit < 1) throw Error("scramble-gen", "permutation limit must be positive");
  if (!limit && units > kMaxUnenumeratedUnits) {
    throw Error("scramble-gen", "refusing to enumerate " + std::to_string(units) +
                                    "! orderings; pass an explicit limit");
  }
  double total = 1;
  for (int k = 2; k <= units; ++k) total *= k;

  std::vector<int> identity(units);
  std::iota(identity.begin(), identity.end(), 0);
  std::vector<std::vector<int>> perms;
  if (limit && total > *limit) {
    std::mt19937_64 rng(seed);
    std::set<std::vector<int>> sampled;
    while (static_cast<int>(sampled.size()) + 1 < *limit) {
      std::vector<int> perm = identity;
      std::shuffle(perm.begin(), perm.end(), rng);
      if (perm != identity) sampled.insert(perm);
    }
    perms.push_back(identity);
    perms.insert(perms.end(), sampled.begin(), sampled.end());
  } else {
    std::vector<int> perm = identity;
    do {
      perms.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }

  PermutationBatch batch;
  batch.source = tree;
  batch.unit_count = units;
  batch.variants.reserve(perms.size());
  for (auto& perm : perms) {
    Variant v;
    v.tree = apply_permutation(tree, p, perm);
    v.order = classify_order(v.tree, m);
    v.tree.comments().push_back(provenance_comment(v.order, perm));
    v.permutation = std::move(perm);
    batch.variants.push_back(std::move(v));
  }
  return batch;
}

OrderLabel classify_order(const DepTree& tree, const DeprelMapping& m) {
  const auto kids = tree.children();
  int main = 0;
  int main_depth = std::numeric_limits<int>::max();
  for (int v = 1; v <= tree.size(); ++v) {
    if (!is_verbal_head(tree, v, m, kids)) continue;
    int depth = 0;
    for (int a = v; a != 0 && depth <= tree.size(); a = tree.head(a)) ++depth;
    if (depth < main_depth) {
      main = v;
      main_depth = depth;
    }
  }
  if (main == 0) return OrderLabel::kNonTransitive;

  int subject = 0, object = 0, n_subj = 0, n_obj = 0;
  for (int c : kids[main]) {
    if (m.is_subject(tree.deprel(c))) {
      subject = c;
      ++n_subj;
    } else if (m.is_object(tree.deprel(c))) {
      object = c;
      ++n_obj;
    }
  }
  if (n_subj != 1 || n_obj != 1) return OrderLabel::kNonTransitive;

  std::array<std::pair<int, char>, 3> seq{{{subject, 'S'}, {object, 'O'}, {main, 'V'}}};
  std::sort(seq.begin(), seq.end());
  std::string key{seq[0].second, seq[1].second, seq[2].second};
  return parse_order_label(key);
}

std::map<OrderLabel, int> order_counts(const Treebank& tb, const DeprelMapping& m) {
  std::map<OrderLabel, int> counts;
  for (const auto& t : tb.trees) ++counts[classify_order(t, m)];
  return counts;
}

OrderDistribution order_distribution(const Treebank& tb, const DeprelMapping& m) {
  auto counts = order_counts(tb, m);
  int transitive = 0;
  for (auto l : kTransitiveOrders) transitive += counts[l];
  if (transitive == 0) throw Error("scramble-gen", "no transitive sentences in treebank");
  OrderDistribution dist;
  for (auto l : kTransitiveOrders) dist[l] = 100.0 * counts[l] / transitive;
  return dist;
}

double order_skew(const std::map<OrderLabel, int>& counts) {
  int total = 0;
  for (auto l : kTransitiveOrders) {
    auto it = counts.find(l);
    total += it == counts.end() ? 0 : it->second;
  }
  if (total == 0) return 0.0;
  double lo = 100.0, hi = 0.0;
  for (auto l : kTransitiveOrders) {
    auto it = counts.find(l);
    double pct = 100.0 * (it == counts.end() ? 0 : it->second) / total;
    lo = std::min(lo, pct);
    hi = std::max(hi, pct);
  }
  return hi - lo;
}

Treebank select_representative(const Treebank& tb, int n, std::uint64_t seed,
                               Diagnostics* diag) {
  if (n < 0) throw Error("scramble-gen", "subset size must be non-negative");
  if (n >= tb.size()) {
    if (n > tb.size()) {
      warn(diag, "requested " + std::to_string(n) + " trees but treebank has " +
                     std::to_string(tb.size()) + "; returning all");
    }
    return tb;
  }
  std::vector<int> idx(tb.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first n slots become the sample.
  for (int i = 0; i < n; ++i) {
    std::uniform_int_distribution<int> pick(i, tb.size() - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  Treebank out;
  out.source_name = tb.source_name;
  for (int i : idx) out.trees.push_back(tb.trees[i]);
  return out;
}

PermutationBatch filter_by_perplexity(const PermutationBatch& batch, const NGramModel& lm,
                                      std::optional<int> k) {
  PermutationBatch out = batch;
  for (auto& v : out.variants) v.perplexity = perplexity(lm, v.tree.forms());
  std::stable_sort(out.variants.begin(), out.variants.end(),
                   [](const Variant& a, const Variant& b) {
                     if (*a.perplexity != *b.perplexity) return *a.perplexity < *b.perplexity;
                     return a.permutation < b.permutation;
                   });
  const int keep = k.value_or(batch.unit_count);
  if (keep < static_cast<int>(out.variants.size())) out.variants.resize(std::max(keep, 0));
  return out;
}

Treebank balance_orders(const std::vector<PermutationBatch>& batches, int budget) {
  struct Entry {
    double perplexity;
    int batch;
    int variant;
  };
  constexpr int kClasses = 7;
  std::array<std::vector<Entry>, kClasses> pool;
  for (int b = 0; b < static_cast<int>(batches.size()); ++b) {
    const auto& vs = batches[b].variants;
    for (int v = 0; v < static_cast<int>(vs.size()); ++v) {
      double ppl = vs[v].perplexity.value_or(std::numeric_limits<double>::infinity());
      pool[static_cast<int>(vs[v].order)].push_back({ppl, b, v});
    }
  }
  for (auto& cls : pool) {
    std::stable_sort(cls.begin(), cls.end(),
                     [](const Entry& a, const Entry& b) { return a.perplexity < b.perplexity; });
  }

  Treebank out;
  std::array<size_t, kClasses> taken{};
  while (static_cast<int>(out.trees.size()) < budget) {
    int best = -1;
    for (int c = 0; c < kClasses; ++c) {
      if (taken[c] >= pool[c].size()) continue;
      if (best < 0 || taken[c] < taken[best]) best = c;
    }
    if (best < 0) break;
    const Entry& e = pool[best][taken[best]++];
    out.trees.push_back(batches[e.batch].variants[e.variant].tree);
  }
  return out;
}

}  // namespace scramble
