#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scramble/eval.h"
#include "scramble/ngram.h"
#include "scramble/parser.h"
#include "scramble/scramble.h"
#include "scramble/treebank.h"

// Sentence-level kernels. Each has a serial reference with the same output;
// `jobs` <= 0 means the OpenMP default. Output order is input order.
namespace scramble {

std::vector<double> perplexities_serial(const NGramModel& lm,
                                        const std::vector<std::vector<std::string>>& sentences);
std::vector<double> perplexities(const NGramModel& lm,
                                 const std::vector<std::vector<std::string>>& sentences,
                                 int jobs = 0);

Treebank parse_serial(const ParserModel& model, const Treebank& input);
Treebank parse_batch(const ParserModel& model, const Treebank& input, int jobs = 0);

AttachmentCounts score_counts_serial(const Treebank& gold, const Treebank& pred,
                                     bool exclude_punct = true);
AttachmentCounts score_counts(const Treebank& gold, const Treebank& pred,
                              bool exclude_punct = true, int jobs = 0);

struct AugmentOptions {
  // Trees kept after balancing.
  int budget = 9000;
  // Survivors per projection; defaults to its unit count.
  std::optional<int> k;
  // Orderings sampled per projection when m! is larger.
  int permutation_limit = 720;
  bool keep_identity = false;
  std::uint64_t seed = 42;
};

struct AugmentStats {
  int sentences = 0;
  int lifted_arcs = 0;
  int projections = 0;
  int generated = 0;
  int filtered = 0;
  int kept = 0;
};

// projectivize -> extract -> permute -> LM filter -> balance -> deprojectivize.
// Every output tree carries a provenance comment naming its source sentence.
std::vector<PermutationBatch> permute_serial(const Treebank& tb, const NGramModel& lm,
                                             const DeprelMapping& mapping,
                                             const AugmentOptions& opt, AugmentStats* stats);
std::vector<PermutationBatch> permute_batch(const Treebank& tb, const NGramModel& lm,
                                            const DeprelMapping& mapping,
                                            const AugmentOptions& opt, AugmentStats* stats,
                                            int jobs = 0);

Treebank augment(const Treebank& tb, const NGramModel& lm, const DeprelMapping& mapping,
                 const AugmentOptions& opt = {}, AugmentStats* stats = nullptr, int jobs = 0);

}  // namespace scramble
