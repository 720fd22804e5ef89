#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "scramble/error.h"

namespace scramble {

// Interpolated Witten-Bell n-gram model over surface tokens.
//
//   P(w | h) = (c(h w) + T(h) * P(w | h')) / (c(h) + T(h))
//
// where T(h) is the number of distinct continuations of h and h' drops the
// oldest token of h. Contexts never seen fall through to the shorter context.
// The recursion bottoms out in a uniform distribution over the predictable
// vocabulary (every training word plus </s> and <unk>; <s> is never
// predicted). Word types seen exactly once additionally contribute one count
// each to <unk> at the unigram level, which reserves mass for unseen words.
class NGramModel {
 public:
  static constexpr const char* kBos = "<s>";
  static constexpr const char* kEos = "</s>";
  static constexpr const char* kUnk = "<unk>";

  NGramModel() = default;

  // Throws on an empty corpus or order outside [1, 5].
  static NGramModel train(std::span<const std::vector<std::string>> corpus, int order);

  // A model with no counts: every predictable token gets 1 / vocab_size().
  static NGramModel uniform(std::span<const std::string> words, int order = 1);

  int order() const { return order_; }
  // Number of predictable outcomes (training words + </s> + <unk>).
  int vocab_size() const { return static_cast<int>(words_.size()) - 1; }
  const std::vector<std::string>& words() const { return words_; }

  // Id used for scoring; unknown strings map to <unk>.
  int id(const std::string& word) const;
  int bos_id() const { return 0; }
  int eos_id() const { return 1; }
  int unk_id() const { return 2; }

  // `context` holds up to order-1 ids, oldest first.
  double probability(int word, std::span<const int> context) const;
  double probability(const std::string& word, const std::vector<std::string>& context) const;

  // Unsmoothed relative frequency c(h w) / c(h); 0 when c(h) == 0.
  double ml_probability(int word, std::span<const int> context) const;

  std::string serialize() const;
  static NGramModel deserialize(const std::string& bytes);
  void save(const std::string& path) const;
  static NGramModel load(const std::string& path);

  // Free-form provenance stored with the model.
  std::string provenance;

 private:
  struct ContextStats {
    std::map<int, double> next;
    double total = 0;
  };
  struct ContextHash {
    std::size_t operator()(const std::vector<int>& v) const noexcept;
  };

  const ContextStats* find(std::span<const int> context) const;
  int add_word(const std::string& w);

  int order_ = 1;
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> ids_;
  // Keyed by the context ids, one map per context length 0..order-1.
  std::vector<std::unordered_map<std::vector<int>, ContextStats, ContextHash>> stats_;
};

// exp(-(1/N) sum log P(w_i | h_i)) with N = tokens + 1 for </s>.
double perplexity(const NGramModel& model, std::span<const std::string> sentence);

// Whitespace-tokenized, one sentence per line.
std::vector<std::vector<std::string>> read_token_corpus(const std::string& path);

}  // namespace scramble
