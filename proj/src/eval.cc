#include "scramble/eval.h"

#include <cstdio>

#include "json.hpp"
#include "scramble/parser.h"
#include "scramble/projective.h"

namespace scramble {

ParseScore AttachmentCounts::to_score(bool punct_excluded) const {
  ParseScore s;
  s.tokens_scored = static_cast<int>(total);
  s.punctuation_excluded = punct_excluded;
  if (total > 0) {
    s.uas = 100.0 * static_cast<double>(heads) / static_cast<double>(total);
    s.las = 100.0 * static_cast<double>(labeled) / static_cast<double>(total);
  }
  return s;
}

bool is_punctuation(const Token& gold) { return gold.upos == "PUNCT" || gold.deprel == "punct"; }

AttachmentCounts count_attachments(const DepTree& gold, const DepTree& pred, bool exclude_punct) {
  if (gold.size() != pred.size()) {
    throw Error("eval-metrics", "token counts differ (" + std::to_string(gold.size()) + " vs " +
                                    std::to_string(pred.size()) + ")");
  }
  AttachmentCounts c;
  for (int i = 1; i <= gold.size(); ++i) {
    const Token& g = gold.token(i);
    if (exclude_punct && is_punctuation(g)) continue;
    const Token& p = pred.token(i);
    ++c.total;
    if (g.head == p.head) {
      ++c.heads;
      if (g.deprel == p.deprel) ++c.labeled;
    }
  }
  return c;
}

namespace {

void check_aligned(const Treebank& gold, const Treebank& pred) {
  if (gold.size() != pred.size()) {
    throw Error("eval-metrics", "gold has " + std::to_string(gold.size()) +
                                    " sentences, prediction has " + std::to_string(pred.size()));
  }
  for (int s = 0; s < gold.size(); ++s) {
    if (gold.trees[s].size() != pred.trees[s].size()) {
      throw Error("eval-metrics", describe(gold.trees[s], s + 1) + " is misaligned (" +
                                      std::to_string(gold.trees[s].size()) + " vs " +
                                      std::to_string(pred.trees[s].size()) + " tokens)");
    }
  }
}

}  // namespace

ParseScore score(const Treebank& gold, const Treebank& pred, bool exclude_punct) {
  check_aligned(gold, pred);
  AttachmentCounts c;
  for (int s = 0; s < gold.size(); ++s) {
    c += count_attachments(gold.trees[s], pred.trees[s], exclude_punct);
  }
  return c.to_score(exclude_punct);
}

double pos_accuracy(const Treebank& gold, const std::vector<std::vector<std::string>>& pred_tags) {
  if (static_cast<int>(pred_tags.size()) != gold.size()) {
    throw Error("eval-metrics", "tag sequences do not match sentence count");
  }
  long right = 0, total = 0;
  for (int s = 0; s < gold.size(); ++s) {
    const DepTree& t = gold.trees[s];
    if (static_cast<int>(pred_tags[s].size()) != t.size()) {
      throw Error("eval-metrics", describe(t, s + 1) + " has a misaligned tag sequence");
    }
    for (int i = 1; i <= t.size(); ++i) {
      ++total;
      if (t.token(i).upos == pred_tags[s][i - 1]) ++right;
    }
  }
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(right) / static_cast<double>(total);
}

std::map<OrderLabel, ParseScore> score_by_order(const Treebank& gold, const Treebank& pred,
                                                const DeprelMapping& m, bool exclude_punct) {
  check_aligned(gold, pred);
  std::map<OrderLabel, AttachmentCounts> counts;
  for (int s = 0; s < gold.size(); ++s) {
    counts[classify_order(gold.trees[s], m)] +=
        count_attachments(gold.trees[s], pred.trees[s], exclude_punct);
  }
  std::map<OrderLabel, ParseScore> out;
  for (const auto& [label, c] : counts) out[label] = c.to_score(exclude_punct);
  return out;
}

LearningCurve learning_curve(const Treebank& train, const Treebank& dev,
                             const std::vector<int>& sizes, const ParserConfig& cfg) {
  LearningCurve curve;
  int prev = 0;
  for (int size : sizes) {
    if (size <= prev) throw Error("eval-metrics", "curve sizes must be strictly increasing");
    if (size > train.size()) {
      throw Error("eval-metrics", "curve size " + std::to_string(size) + " exceeds training set");
    }
    prev = size;
    Treebank subset = select_representative(train, size, cfg.seed);
    if (cfg.pseudo_projective) subset = projectivize_treebank(subset);
    ParserModel model = train_parser(subset, Treebank{}, cfg);
    Treebank pred;
    for (const auto& t : dev.trees) pred.trees.push_back(model.parse(t));
    curve.points.emplace_back(size, score(dev, pred, cfg.exclude_punct));
  }
  return curve;
}

std::string format_curve(const LearningCurve& curve) {
  std::string out = "size\tLAS\tUAS\n";
  char buf[96];
  for (const auto& [size, s] : curve.points) {
    std::snprintf(buf, sizeof buf, "%d\t%.2f\t%.2f\n", size, s.las, s.uas);
    out += buf;
  }
  return out;
}

namespace {

nlohmann::json score_json(const ParseScore& s) {
  return {{"las", s.las}, {"uas", s.uas}, {"n_tokens", s.tokens_scored}};
}

}  // namespace

std::string evaluation_record(const ParseScore& overall,
                              const std::map<OrderLabel, ParseScore>& by_order,
                              const double* pos_accuracy) {
  nlohmann::json j = score_json(overall);
  j["punct_excluded"] = overall.punctuation_excluded;
  nlohmann::json orders = nlohmann::json::object();
  for (const auto& [label, s] : by_order) orders[to_string(label)] = score_json(s);
  j["by_order"] = orders;
  if (pos_accuracy != nullptr) j["pos_accuracy"] = *pos_accuracy;
  return j.dump();
}

std::string evaluation_table(const ParseScore& overall,
                             const std::map<OrderLabel, ParseScore>& by_order,
                             const double* pos_accuracy) {
  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-14s %8s %8s %8s\n", "Order", "LAS", "UAS", "Tokens");
  out += buf;
  for (const auto& [label, s] : by_order) {
    std::snprintf(buf, sizeof buf, "%-14s %8.2f %8.2f %8d\n", to_string(label).c_str(), s.las,
                  s.uas, s.tokens_scored);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "%-14s %8.2f %8.2f %8d\n", "ALL", overall.las, overall.uas,
                overall.tokens_scored);
  out += buf;
  if (pos_accuracy != nullptr) {
    std::snprintf(buf, sizeof buf, "POS accuracy   %8.2f\n", *pos_accuracy);
    out += buf;
  }
  return out;
}

}  // namespace scramble
