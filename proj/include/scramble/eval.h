#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "scramble/scramble.h"
#include "scramble/treebank.h"

namespace scramble {

struct ParserConfig;

struct ParseScore {
  double las = 0.0;
  double uas = 0.0;
  int tokens_scored = 0;
  bool punctuation_excluded = true;
};

// Raw counts behind a ParseScore; sums across sentences.
struct AttachmentCounts {
  long heads = 0;
  long labeled = 0;
  long total = 0;

  AttachmentCounts& operator+=(const AttachmentCounts& o) {
    heads += o.heads;
    labeled += o.labeled;
    total += o.total;
    return *this;
  }
  ParseScore to_score(bool punct_excluded) const;
};

bool is_punctuation(const Token& gold);

// Throws if the trees do not have the same number of tokens.
AttachmentCounts count_attachments(const DepTree& gold, const DepTree& pred, bool exclude_punct);

// Throws naming the first sentence whose length differs.
ParseScore score(const Treebank& gold, const Treebank& pred, bool exclude_punct = true);

double pos_accuracy(const Treebank& gold, const std::vector<std::vector<std::string>>& pred_tags);

// Sentences grouped by the order class of their gold tree. Classes without
// sentences are absent.
std::map<OrderLabel, ParseScore> score_by_order(const Treebank& gold, const Treebank& pred,
                                                const DeprelMapping& m,
                                                bool exclude_punct = true);

struct LearningCurve {
  std::vector<std::pair<int, ParseScore>> points;
};

// Trains one parser per size on a seeded, nested subset of `train` and scores
// it on `dev`. Sizes must be strictly increasing and no larger than |train|.
LearningCurve learning_curve(const Treebank& train, const Treebank& dev,
                             const std::vector<int>& sizes, const ParserConfig& cfg);

// "size\tLAS\tUAS" header plus one row per point, two decimals.
std::string format_curve(const LearningCurve& curve);

// One-line JSON record with las, uas, n_tokens, by_order and, when given,
// pos_accuracy.
std::string evaluation_record(const ParseScore& overall,
                              const std::map<OrderLabel, ParseScore>& by_order,
                              const double* pos_accuracy = nullptr);

// Plain-text report of the same numbers.
std::string evaluation_table(const ParseScore& overall,
                             const std::map<OrderLabel, ParseScore>& by_order,
                             const double* pos_accuracy = nullptr);

}  // namespace scramble
