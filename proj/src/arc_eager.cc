#include "scramble/arc_eager.h"

#include <sstream>

#include "scramble/projective.h"

namespace scramble {

Configuration::Configuration(int n)
    : n_(n),
      stack_{0},
      front_(1),
      heads_(n + 1, -1),
      labels_(n + 1),
      leftmost_(n + 1, -1),
      rightmost_(n + 1, -1) {}

std::vector<int> Configuration::buffer() const {
  std::vector<int> out;
  for (int i = front_; i <= n_; ++i) out.push_back(i);
  return out;
}

int Configuration::stack_at(int depth) const {
  int idx = static_cast<int>(stack_.size()) - 1 - depth;
  return idx >= 0 ? stack_[idx] : -1;
}

std::vector<Arc> Configuration::arcs() const {
  std::vector<Arc> out;
  for (int d = 1; d <= n_; ++d) {
    if (heads_[d] >= 0) out.push_back({heads_[d], d, labels_[d]});
  }
  return out;
}

void Configuration::add_arc(int head, int dep, const std::string& label) {
  heads_[dep] = head;
  labels_[dep] = label;
  if (leftmost_[head] < 0 || dep < leftmost_[head]) leftmost_[head] = dep;
  if (rightmost_[head] < 0 || dep > rightmost_[head]) rightmost_[head] = dep;
}

void Configuration::apply(const Transition& t) {
  std::string reason = illegal_reason(*this, t.kind);
  if (!reason.empty()) throw Error("transition-system", to_mnemonic(t) + " illegal: " + reason);
  if ((t.kind == TransitionKind::kLeftArc || t.kind == TransitionKind::kRightArc) &&
      t.label.empty()) {
    throw Error("transition-system", "arc transition without a label");
  }
  switch (t.kind) {
    case TransitionKind::kShift:
      stack_.push_back(front_++);
      break;
    case TransitionKind::kLeftArc:
      add_arc(front_, stack_.back(), t.label);
      stack_.pop_back();
      break;
    case TransitionKind::kRightArc:
      add_arc(stack_.back(), front_, t.label);
      stack_.push_back(front_++);
      break;
    case TransitionKind::kReduce:
      stack_.pop_back();
      break;
  }
}

Configuration initial_config(int n) {
  if (n < 1) throw Error("transition-system", "sentence must have at least one token");
  return Configuration(n);
}

bool LegalSet::allows(TransitionKind k) const {
  switch (k) {
    case TransitionKind::kShift: return shift;
    case TransitionKind::kLeftArc: return left_arc;
    case TransitionKind::kRightArc: return right_arc;
    case TransitionKind::kReduce: return reduce;
  }
  return false;
}

std::string illegal_reason(const Configuration& c, TransitionKind k) {
  const bool empty_stack = c.stack().empty();
  switch (k) {
    case TransitionKind::kShift:
      if (c.buffer_empty()) return "buffer is empty";
      return {};
    case TransitionKind::kLeftArc:
      if (c.buffer_empty()) return "buffer is empty";
      if (empty_stack || c.stack_top() == 0) return "stack top is ROOT";
      if (c.has_head(c.stack_top())) return "stack top already has a head";
      return {};
    case TransitionKind::kRightArc:
      if (c.buffer_empty()) return "buffer is empty";
      if (empty_stack) return "stack is empty";
      return {};
    case TransitionKind::kReduce:
      if (empty_stack || c.stack_top() == 0) return "stack top is ROOT";
      if (!c.has_head(c.stack_top())) return "stack top has no head";
      return {};
  }
  return "unknown transition";
}

LegalSet legal_transitions(const Configuration& c) {
  LegalSet s;
  s.shift = illegal_reason(c, TransitionKind::kShift).empty();
  s.left_arc = illegal_reason(c, TransitionKind::kLeftArc).empty();
  s.right_arc = illegal_reason(c, TransitionKind::kRightArc).empty();
  s.reduce = illegal_reason(c, TransitionKind::kReduce).empty();
  return s;
}

Configuration apply(const Configuration& c, const Transition& t) {
  Configuration next = c;
  next.apply(t);
  return next;
}

bool is_terminal(const Configuration& c) { return c.buffer_empty(); }

std::vector<Transition> static_oracle(const DepTree& tree) {
  if (!is_projective(tree)) {
    throw Error("transition-system",
                "static oracle needs a projective tree; run projectivize first");
  }
  const int n = tree.size();
  Configuration c = initial_config(n);
  std::vector<Transition> seq;
  // pending[h] = gold dependents of h not yet attached.
  std::vector<int> pending(n + 1, 0);
  for (int d = 1; d <= n; ++d) ++pending[tree.head(d)];

  while (!is_terminal(c)) {
    const int s = c.stack_top();
    const int b = c.buffer_front();
    Transition t;
    if (s != 0 && tree.head(s) == b) {
      t = Transition::left_arc(tree.deprel(s));
      --pending[b];
    } else if (tree.head(b) == s) {
      t = Transition::right_arc(tree.deprel(b));
      --pending[s];
    } else if (s != 0 && c.has_head(s) && pending[s] == 0) {
      t = Transition::reduce();
    } else {
      t = Transition::shift();
    }
    c.apply(t);
    seq.push_back(std::move(t));
  }
  for (int d = 1; d <= n; ++d) {
    if (c.head_of(d) != tree.head(d)) {
      throw Error("transition-system",
                  "oracle failed to reconstruct token " + std::to_string(d));
    }
  }
  return seq;
}

DepTree tree_from_config(const DepTree& words_tree, const Configuration& c,
                         const std::string& default_label) {
  DepTree out = words_tree;
  for (int d = 1; d <= out.size(); ++d) {
    Token& tok = out.token(d);
    if (c.has_head(d)) {
      tok.head = c.head_of(d);
      tok.deprel = c.label_of(d);
    } else {
      tok.head = 0;
      tok.deprel = default_label;
    }
  }
  return out;
}

std::string to_mnemonic(const Transition& t) {
  switch (t.kind) {
    case TransitionKind::kShift: return "SH";
    case TransitionKind::kReduce: return "RE";
    case TransitionKind::kLeftArc: return "LA:" + t.label;
    case TransitionKind::kRightArc: return "RA:" + t.label;
  }
  return "?";
}

Transition from_mnemonic(std::string_view text) {
  if (text == "SH") return Transition::shift();
  if (text == "RE") return Transition::reduce();
  if (text.size() > 3 && text.substr(0, 3) == "LA:") {
    return Transition::left_arc(std::string(text.substr(3)));
  }
  if (text.size() > 3 && text.substr(0, 3) == "RA:") {
    return Transition::right_arc(std::string(text.substr(3)));
  }
  throw Error("transition-system", "bad transition mnemonic '" + std::string(text) + "'");
}

std::string format_sequence(const std::vector<Transition>& seq) {
  std::string out;
  for (const auto& t : seq) {
    if (!out.empty()) out += ' ';
    out += to_mnemonic(t);
  }
  return out;
}

std::vector<Transition> parse_sequence(std::string_view text) {
  std::vector<Transition> out;
  std::istringstream is{std::string(text)};
  std::string word;
  while (is >> word) out.push_back(from_mnemonic(word));
  return out;
}

}  // namespace scramble
