#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "scramble/scramble.h"
#include "scramble/treebank.h"

namespace scramble {

// A toy Hindi-like clause grammar: case-marked noun phrases around a verb
// group, with UD labels and tags. Orders of subject, object and verb are drawn
// from `order_probs` (indexed like kTransitiveOrders).
struct SyntheticGrammar {
  std::vector<std::string> subjects;
  std::vector<std::string> objects;
  std::vector<std::string> indirect_objects;
  std::vector<std::string> adjuncts;
  std::vector<std::string> adjectives;
  std::vector<std::string> verbs;
  std::vector<std::string> auxiliaries;

  std::string subject_marker = "ne";
  std::string object_marker = "ko";
  std::string indirect_marker = "ko";
  std::string adjunct_marker = "meM";
  std::string final_punct = "|";

  std::array<double, 6> order_probs = {1, 0, 0, 0, 0, 0};

  // Per-clause options.
  double subject_marked = 0.6;
  double object_marked = 0.5;
  double adjective_prob = 0.3;
  double indirect_prob = 0.1;
  double adjunct_prob = 0.3;
  double aux_prob = 0.5;

  static SyntheticGrammar hindi_like();

  // Throws on probabilities that do not sum to 1 or an empty used role.
  void check() const;

  // "sov=0.9,osv=0.1"; unnamed orders get 0. Throws on bad input.
  void set_orders(const std::string& spec);
};

// One clause in the given transitive order.
DepTree synthetic_tree(const SyntheticGrammar& g, OrderLabel order, std::mt19937_64& rng);

// n clauses, each order drawn from the grammar's distribution.
Treebank gen_synthetic(const SyntheticGrammar& g, int n, std::uint64_t seed = 42);

// Sentences of the same grammar as plain token lists, for language-model
// training.
std::vector<std::vector<std::string>> synthetic_text(const Treebank& tb);

}  // namespace scramble
