#pragma once

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "scramble/treebank.h"

namespace testing {

using scramble::DepTree;
using scramble::Token;

// heads[i] is the head of token i+1. Labels default to "dep", forms to w1..wn.
inline DepTree make_tree(const std::vector<int>& heads, std::vector<std::string> labels = {},
                         std::vector<std::string> forms = {}, std::vector<std::string> upos = {}) {
  std::vector<Token> tokens;
  for (size_t i = 0; i < heads.size(); ++i) {
    Token t;
    t.index = static_cast<int>(i) + 1;
    t.form = i < forms.size() ? forms[i] : "w" + std::to_string(i + 1);
    t.upos = i < upos.size() ? upos[i] : "X";
    t.head = heads[i];
    t.deprel = i < labels.size() ? labels[i] : (heads[i] == 0 ? "root" : "dep");
    tokens.push_back(t);
  }
  return DepTree(std::move(tokens));
}

// Attaches the tokens of [lo, hi] under `head` as a sequence of contiguous
// subtrees, which keeps every arc projective.
inline void grow_projective(std::vector<int>& heads, int lo, int hi, int head, std::mt19937_64& rng,
                            bool single_child) {
  while (lo <= hi) {
    int end = single_child ? hi : std::uniform_int_distribution<int>(lo, hi)(rng);
    int root = std::uniform_int_distribution<int>(lo, end)(rng);
    heads[root - 1] = head;
    grow_projective(heads, lo, root - 1, root, rng, false);
    grow_projective(heads, root + 1, end, root, rng, false);
    lo = end + 1;
  }
}

inline DepTree random_projective_tree(int n, std::mt19937_64& rng,
                                      const std::vector<std::string>& label_pool = {"nsubj", "obj",
                                                                                    "amod", "case",
                                                                                    "obl"}) {
  std::vector<int> heads(n, 0);
  grow_projective(heads, 1, n, 0, rng, true);
  std::vector<std::string> labels(n);
  std::uniform_int_distribution<size_t> pick(0, label_pool.size() - 1);
  for (int i = 0; i < n; ++i) labels[i] = heads[i] == 0 ? "root" : label_pool[pick(rng)];
  return make_tree(heads, labels);
}

// Projective iff no two arcs cross and no arc covers the root.
inline bool crossing_free(const DepTree& t) {
  std::vector<std::pair<int, int>> arcs;
  for (int i = 1; i <= t.size(); ++i) {
    arcs.emplace_back(std::min(i, t.head(i)), std::max(i, t.head(i)));
  }
  for (auto [a, b] : arcs) {
    for (auto [c, d] : arcs) {
      if (a < c && c < b && b < d) return false;
    }
  }
  return true;
}

// (head form, dependent form, label) multiset; root heads read "ROOT".
inline std::multiset<std::tuple<std::string, std::string, std::string>> arc_multiset(
    const DepTree& t) {
  std::multiset<std::tuple<std::string, std::string, std::string>> out;
  for (int i = 1; i <= t.size(); ++i) {
    const int h = t.head(i);
    out.emplace(h == 0 ? "ROOT" : t.token(h).form, t.token(i).form, t.deprel(i));
  }
  return out;
}

}  // namespace testing
