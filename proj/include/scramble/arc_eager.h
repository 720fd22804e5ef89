#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "scramble/treebank.h"

namespace scramble {

enum class TransitionKind { kShift, kLeftArc, kRightArc, kReduce };

struct Transition {
  TransitionKind kind = TransitionKind::kShift;
  std::string label;

  static Transition shift() { return {TransitionKind::kShift, {}}; }
  static Transition reduce() { return {TransitionKind::kReduce, {}}; }
  static Transition left_arc(std::string l) { return {TransitionKind::kLeftArc, std::move(l)}; }
  static Transition right_arc(std::string l) { return {TransitionKind::kRightArc, std::move(l)}; }

  friend bool operator==(const Transition&, const Transition&) = default;
};

struct Arc {
  int head;
  int dependent;
  std::string label;

  friend bool operator==(const Arc&, const Arc&) = default;
};

// Arc-eager parser state over a sentence of n tokens. The buffer is always a
// suffix [front, n] of the sentence, so it is stored as its front index.
class Configuration {
 public:
  explicit Configuration(int n);

  int sentence_length() const { return n_; }
  const std::vector<int>& stack() const { return stack_; }
  std::vector<int> buffer() const;

  bool buffer_empty() const { return front_ > n_; }
  int buffer_front() const { return buffer_empty() ? -1 : front_; }
  int stack_top() const { return stack_.back(); }
  // i-th element from the top, or -1.
  int stack_at(int depth) const;

  bool has_head(int token) const { return heads_[token] >= 0; }
  int head_of(int token) const { return heads_[token]; }
  const std::string& label_of(int token) const { return labels_[token]; }
  int leftmost_child(int token) const { return leftmost_[token]; }
  int rightmost_child(int token) const { return rightmost_[token]; }

  std::vector<Arc> arcs() const;

  // Throws Error("transition-system", ...) when `t` is illegal here.
  void apply(const Transition& t);

 private:
  void add_arc(int head, int dep, const std::string& label);

  int n_;
  std::vector<int> stack_;
  int front_;
  std::vector<int> heads_;
  std::vector<std::string> labels_;
  std::vector<int> leftmost_;
  std::vector<int> rightmost_;
};

Configuration initial_config(int n);

struct LegalSet {
  bool shift = false;
  bool left_arc = false;
  bool right_arc = false;
  bool reduce = false;

  bool allows(TransitionKind k) const;
  bool any() const { return shift || left_arc || right_arc || reduce; }
  friend bool operator==(const LegalSet&, const LegalSet&) = default;
};

LegalSet legal_transitions(const Configuration& c);

// Empty string when legal, otherwise the violated precondition.
std::string illegal_reason(const Configuration& c, TransitionKind k);

// Throws Error("transition-system", ...) naming the violated precondition.
Configuration apply(const Configuration& c, const Transition& t);

bool is_terminal(const Configuration& c);

// Throws if the tree is not projective.
std::vector<Transition> static_oracle(const DepTree& tree);

// Writes the arcs of `c` into a copy of `words_tree`; unattached tokens go to
// the root with `default_label`.
DepTree tree_from_config(const DepTree& words_tree, const Configuration& c,
                         const std::string& default_label = "dep");

std::string to_mnemonic(const Transition& t);
Transition from_mnemonic(std::string_view text);
std::string format_sequence(const std::vector<Transition>& seq);
std::vector<Transition> parse_sequence(std::string_view text);

}  // namespace scramble
