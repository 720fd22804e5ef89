#include "scramble/parallel.h"

#include <exception>
#include <mutex>

#include <omp.h>

#include "scramble/projective.h"

namespace scramble {

namespace {

int thread_count(int jobs) { return jobs > 0 ? jobs : omp_get_max_threads(); }

// Runs body(i) for i in [0, n) and rethrows the first exception by index.
template <typename Body>
void parallel_for(int n, int jobs, Body body) {
  std::exception_ptr first;
  int first_index = n;
  std::mutex mu;
#pragma omp parallel for schedule(dynamic) num_threads(thread_count(jobs))
  for (int i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (i < first_index) {
        first_index = i;
        first = std::current_exception();
      }
    }
  }
  if (first) std::rethrow_exception(first);
}

std::vector<PermutationBatch> permute_one(const DepTree& source, int index, const NGramModel& lm,
                                          const DeprelMapping& mapping, const AugmentOptions& opt,
                                          AugmentStats& st) {
  std::vector<PermutationBatch> out;
  ProjectivizeResult proj = projectivize(source);
  st.lifted_arcs += static_cast<int>(proj.lifts.size());
  const std::string origin = source.sentence_id() ? *source.sentence_id()
                                                  : "sentence " + std::to_string(index + 1);
  for (const auto& p : extract_projections(proj.tree, mapping)) {
    ++st.projections;
    std::optional<int> limit;
    if (p.unit_count() > 5) limit = opt.permutation_limit;
    PermutationBatch batch = permute_projection(proj.tree, p, mapping, limit,
                                                opt.seed + static_cast<std::uint64_t>(index));
    st.generated += static_cast<int>(batch.variants.size());
    batch = filter_by_perplexity(batch, lm, opt.k);
    st.filtered += static_cast<int>(batch.variants.size());
    if (!opt.keep_identity) {
      std::erase_if(batch.variants, [](const Variant& v) { return v.is_identity(); });
    }
    for (auto& v : batch.variants) {
      Diagnostics quiet;
      v.tree = deprojectivize(v.tree, {}, &quiet);
      v.tree.comments().push_back("augmented_from = " + origin);
    }
    out.push_back(std::move(batch));
  }
  return out;
}

void add_stats(AugmentStats& into, const AugmentStats& s) {
  into.lifted_arcs += s.lifted_arcs;
  into.projections += s.projections;
  into.generated += s.generated;
  into.filtered += s.filtered;
}

}  // namespace

std::vector<double> perplexities_serial(const NGramModel& lm,
                                        const std::vector<std::vector<std::string>>& sentences) {
  std::vector<double> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(perplexity(lm, s));
  return out;
}

std::vector<double> perplexities(const NGramModel& lm,
                                 const std::vector<std::vector<std::string>>& sentences, int jobs) {
  std::vector<double> out(sentences.size());
  parallel_for(static_cast<int>(sentences.size()), jobs,
               [&](int i) { out[i] = perplexity(lm, sentences[i]); });
  return out;
}

Treebank parse_serial(const ParserModel& model, const Treebank& input) {
  Treebank out;
  out.source_name = input.source_name;
  for (const auto& t : input.trees) out.trees.push_back(model.parse(t));
  return out;
}

Treebank parse_batch(const ParserModel& model, const Treebank& input, int jobs) {
  Treebank out;
  out.source_name = input.source_name;
  out.trees.resize(input.trees.size());
  parallel_for(input.size(), jobs, [&](int i) { out.trees[i] = model.parse(input.trees[i]); });
  return out;
}

namespace {

void check_aligned(const Treebank& gold, const Treebank& pred) {
  if (gold.size() != pred.size()) {
    throw Error("eval-metrics", "gold has " + std::to_string(gold.size()) +
                                    " sentences, prediction has " + std::to_string(pred.size()));
  }
}

}  // namespace

AttachmentCounts score_counts_serial(const Treebank& gold, const Treebank& pred,
                                     bool exclude_punct) {
  check_aligned(gold, pred);
  AttachmentCounts total;
  for (int i = 0; i < gold.size(); ++i) {
    total += count_attachments(gold.trees[i], pred.trees[i], exclude_punct);
  }
  return total;
}

AttachmentCounts score_counts(const Treebank& gold, const Treebank& pred, bool exclude_punct,
                              int jobs) {
  check_aligned(gold, pred);
  std::vector<AttachmentCounts> parts(gold.trees.size());
  parallel_for(gold.size(), jobs, [&](int i) {
    parts[i] = count_attachments(gold.trees[i], pred.trees[i], exclude_punct);
  });
  AttachmentCounts total;
  for (const auto& p : parts) total += p;
  return total;
}

std::vector<PermutationBatch> permute_serial(const Treebank& tb, const NGramModel& lm,
                                             const DeprelMapping& mapping,
                                             const AugmentOptions& opt, AugmentStats* stats) {
  mapping.check();
  AugmentStats st;
  st.sentences = tb.size();
  std::vector<PermutationBatch> out;
  for (int i = 0; i < tb.size(); ++i) {
    for (auto& b : permute_one(tb.trees[i], i, lm, mapping, opt, st)) out.push_back(std::move(b));
  }
  if (stats != nullptr) *stats = st;
  return out;
}

std::vector<PermutationBatch> permute_batch(const Treebank& tb, const NGramModel& lm,
                                            const DeprelMapping& mapping,
                                            const AugmentOptions& opt, AugmentStats* stats,
                                            int jobs) {
  mapping.check();
  std::vector<std::vector<PermutationBatch>> per(tb.trees.size());
  std::vector<AugmentStats> per_stats(tb.trees.size());
  parallel_for(tb.size(), jobs, [&](int i) {
    per[i] = permute_one(tb.trees[i], i, lm, mapping, opt, per_stats[i]);
  });
  AugmentStats st;
  st.sentences = tb.size();
  std::vector<PermutationBatch> out;
  for (size_t i = 0; i < per.size(); ++i) {
    add_stats(st, per_stats[i]);
    for (auto& b : per[i]) out.push_back(std::move(b));
  }
  if (stats != nullptr) *stats = st;
  return out;
}

Treebank augment(const Treebank& tb, const NGramModel& lm, const DeprelMapping& mapping,
                 const AugmentOptions& opt, AugmentStats* stats, int jobs) {
  if (opt.budget < 0) throw Error("scramble-gen", "negative budget");
  AugmentStats st;
  auto batches = jobs == 1 ? permute_serial(tb, lm, mapping, opt, &st)
                           : permute_batch(tb, lm, mapping, opt, &st, jobs);
  Treebank out = balance_orders(batches, opt.budget);
  out.source_name = tb.source_name;
  st.kept = out.size();
  if (stats != nullptr) *stats = st;
  return out;
}

}  // namespace scramble
