#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "scramble/treebank.h"

namespace scramble {

class NGramModel;

enum class OrderLabel { kSOV, kOSV, kOVS, kSVO, kVOS, kVSO, kNonTransitive };

// The six transitive orders in reporting order.
inline constexpr std::array<OrderLabel, 6> kTransitiveOrders = {
    OrderLabel::kSOV, OrderLabel::kOSV, OrderLabel::kOVS,
    OrderLabel::kSVO, OrderLabel::kVOS, OrderLabel::kVSO};

std::string to_string(OrderLabel label);
// Case-insensitive; throws on unknown names.
OrderLabel parse_order_label(const std::string& text);

// Maps treebank labels onto the roles used for scrambling.
struct DeprelMapping {
  std::set<std::string> subject_labels;
  std::set<std::string> object_labels;
  // nullopt means every label not frozen or in the verb group.
  std::optional<std::set<std::string>> permutable_labels;
  // Never moved when at the clause periphery (sentence-final punctuation).
  std::set<std::string> frozen_labels;
  // Dependents that travel with the verb when adjacent to it (auxiliaries).
  std::set<std::string> verb_group_labels;

  static DeprelMapping universal();  // nsubj -> S, obj/dobj -> O
  static DeprelMapping paninian();   // k1 -> S, k2 -> O
  static DeprelMapping preset(const std::string& name);

  bool is_subject(const std::string& label) const;
  bool is_object(const std::string& label) const;
  bool is_frozen(const std::string& label) const;
  bool is_verb_group(const std::string& label) const;
  bool is_permutable(const std::string& label) const;
  // Throws if subject and object labels overlap.
  void check() const;
};

// A contiguous block of tokens that moves as a whole.
struct Unit {
  int root = 0;
  int first = 0;
  int last = 0;
  bool is_verb = false;

  int length() const { return last - first + 1; }
  friend bool operator==(const Unit&, const Unit&) = default;
};

struct VerbalProjection {
  int verb_index = 0;
  std::vector<int> constituent_roots;
  // All units, verb included, in source linear order. Their union is the
  // contiguous region [units.front().first, units.back().last].
  std::vector<Unit> units;

  int unit_count() const { return static_cast<int>(units.size()); }
  std::map<int, std::pair<int, int>> span_map() const;
};

struct Variant {
  DepTree tree;
  OrderLabel order = OrderLabel::kNonTransitive;
  std::optional<double> perplexity;
  // permutation[k] = source position of the unit placed k-th.
  std::vector<int> permutation;

  bool is_identity() const;
};

struct PermutationBatch {
  DepTree source;
  int unit_count = 0;
  std::vector<Variant> variants;
};

// Heads that anchor a verbal projection: VERB tokens, AUX tokens with
// dependents, and any token with a subject or object dependent.
bool is_verbal_head(const DepTree& tree, int index, const DeprelMapping& m,
                    const std::vector<std::vector<int>>& children);

// Expects a projective tree.
std::vector<VerbalProjection> extract_projections(const DepTree& tree, const DeprelMapping& m);

inline constexpr int kMaxUnenumeratedUnits = 8;

// Enumerates every ordering of the projection's units (m!), or `limit`
// orderings sampled without replacement when m! exceeds it. The identity
// ordering is always first. Throws when m > 8 and no limit is given.
PermutationBatch permute_projection(const DepTree& tree, const VerbalProjection& p,
                                    const DeprelMapping& m, std::optional<int> limit = {},
                                    std::uint64_t seed = 42);

// Rebuilds `tree` with the projection's units laid out in `permutation`.
DepTree apply_permutation(const DepTree& tree, const VerbalProjection& p,
                          const std::vector<int>& permutation);

// Order of subject, object, and verb in the main clause.
OrderLabel classify_order(const DepTree& tree, const DeprelMapping& m);

using OrderDistribution = std::map<OrderLabel, double>;

// Percentages over transitive sentences; throws when there are none.
OrderDistribution order_distribution(const Treebank& tb, const DeprelMapping& m);

// max - min percentage over the six transitive orders; 0 for no transitive trees.
double order_skew(const std::map<OrderLabel, int>& counts);
std::map<OrderLabel, int> order_counts(const Treebank& tb, const DeprelMapping& m);

inline constexpr int kDefaultRepresentativeCount = 4000;

// Seeded uniform sample without replacement, returned in source order.
Treebank select_representative(const Treebank& tb, int n = kDefaultRepresentativeCount,
                               std::uint64_t seed = 42, Diagnostics* diag = nullptr);

// Ranks variants by perplexity (ascending, ties by permutation) and keeps k.
// k defaults to the batch's unit count.
PermutationBatch filter_by_perplexity(const PermutationBatch& batch, const NGramModel& lm,
                                      std::optional<int> k = {});

// Round-robin over order classes: repeatedly takes the lowest-perplexity
// unused variant of the least represented class until `budget` trees are
// taken or the pool runs dry.
Treebank balance_orders(const std::vector<PermutationBatch>& batches, int budget);

// "scramble_order=<LABEL> perm=<i,j,...>"
std::string provenance_comment(OrderLabel order, const std::vector<int>& permutation);

}  // namespace scramble
