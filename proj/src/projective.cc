#include "scramble/projective.h"

#include <algorithm>
#include <cstdlib>
#include <deque>

namespace scramble {

bool is_projective_arc(const DepTree& tree, int dependent) {
  const int h = tree.head(dependent);
  const int lo = std::min(h, dependent);
  const int hi = std::max(h, dependent);
  for (int k = lo + 1; k < hi; ++k) {
    if (!tree.dominates(h, k)) return false;
  }
  return true;
}

int count_nonprojective_arcs(const DepTree& tree) {
  int count = 0;
  for (int d = 1; d <= tree.size(); ++d) {
    if (!is_projective_arc(tree, d)) ++count;
  }
  return count;
}

bool is_projective(const DepTree& tree) {
  for (int d = 1; d <= tree.size(); ++d) {
    if (!is_projective_arc(tree, d)) return false;
  }
  return true;
}

double nonprojective_arc_ratio(const Treebank& treebank) {
  if (treebank.empty()) throw Error("tree-transform", "empty treebank");
  long nonproj = 0;
  long arcs = 0;
  for (const auto& t : treebank.trees) {
    nonproj += count_nonprojective_arcs(t);
    arcs += t.size();
  }
  if (arcs == 0) return 0.0;
  return static_cast<double>(nonproj) / static_cast<double>(arcs);
}

namespace {

void erase_all(std::string& s, const std::string& needle) {
  if (needle.empty()) return;
  for (size_t pos = s.find(needle); pos != std::string::npos; pos = s.find(needle, pos)) {
    s.erase(pos, needle.size());
  }
}

bool has_marker(const std::string& label, const LiftEncoding& enc) {
  return !enc.path_marker.empty() && label.find(enc.path_marker) != std::string::npos;
}

// Target label stored after the separator, without markers; empty if the
// label carries no encoding.
std::string encoded_target(const std::string& label, const LiftEncoding& enc) {
  size_t pos = label.find(enc.head_separator);
  if (pos == std::string::npos) return {};
  std::string target = label.substr(pos + enc.head_separator.size());
  erase_all(target, enc.path_marker);
  return target;
}

bool is_encoded(const std::string& label, const LiftEncoding& enc) {
  return label.find(enc.head_separator) != std::string::npos;
}

}  // namespace

std::string base_label(const std::string& label, const LiftEncoding& enc) {
  std::string out = label;
  erase_all(out, enc.path_marker);
  size_t pos = out.find(enc.head_separator);
  if (pos != std::string::npos) out.erase(pos);
  return out;
}

ProjectivizeResult projectivize(const DepTree& tree, const LiftEncoding& enc) {
  if (enc.scheme == LiftEncoding::Scheme::kPath) {
    throw Error("tree-transform", "path-only encoding is not supported");
  }
  const bool mark_path = enc.scheme == LiftEncoding::Scheme::kHeadPath;
  ProjectivizeResult result{tree, {}};
  DepTree& t = result.tree;
  std::vector<int> record_of(t.size() + 1, -1);

  while (true) {
    // Lift the shortest non-projective arc first; ties go to the leftmost.
    int best = 0;
    int best_len = 0;
    for (int d = 1; d <= t.size(); ++d) {
      if (is_projective_arc(t, d)) continue;
      int len = std::abs(t.head(d) - d);
      if (best == 0 || len < best_len) {
        best = d;
        best_len = len;
      }
    }
    if (best == 0) break;

    const int head = t.head(best);
    Token& dep = t.token(best);
    if (record_of[best] < 0) {
      record_of[best] = static_cast<int>(result.lifts.size());
      LiftRecord rec;
      rec.dependent = best;
      rec.original_head = head;
      dep.deprel = base_label(dep.deprel, enc) + enc.head_separator +
                   base_label(t.deprel(head), enc) +
                   (has_marker(dep.deprel, enc) ? enc.path_marker : "");
      result.lifts.push_back(rec);
    }
    if (mark_path && !has_marker(t.deprel(head), enc)) {
      t.token(head).deprel += enc.path_marker;
    }
    dep.head = t.head(head);
  }
  for (auto& rec : result.lifts) {
    rec.lifted_head = t.head(rec.dependent);
    rec.encoded_label = t.deprel(rec.dependent);
  }
  return result;
}

DepTree deprojectivize(const DepTree& tree, const LiftEncoding& enc, Diagnostics* diag) {
  DepTree t = tree;
  const int n = t.size();

  // Top-down, leftmost-first visiting order of the input tree.
  std::vector<int> order;
  {
    auto kids = t.children();
    std::deque<int> queue{0};
    while (!queue.empty()) {
      int node = queue.front();
      queue.pop_front();
      if (node != 0) order.push_back(node);
      for (int c : kids[node]) queue.push_back(c);
    }
  }

  for (int d : order) {
    const std::string label = t.deprel(d);
    if (!is_encoded(label, enc)) continue;
    const std::string target = encoded_target(label, enc);
    const int current = t.head(d);
    auto kids = t.children();

    auto search = [&](bool marked_only) -> int {
      std::deque<int> queue{current};
      while (!queue.empty()) {
        int node = queue.front();
        queue.pop_front();
        for (int c : kids[node]) {
          if (c == d) continue;
          if (marked_only && !has_marker(t.deprel(c), enc)) continue;
          if (base_label(t.deprel(c), enc) == target) return c;
          queue.push_back(c);
        }
      }
      return -1;
    };

    int found = -1;
    if (enc.scheme == LiftEncoding::Scheme::kHeadPath) found = search(true);
    if (found < 0) found = search(false);

    Token& tok = t.token(d);
    std::string cleaned = label.substr(0, label.find(enc.head_separator));
    if (has_marker(label, enc) && !has_marker(cleaned, enc)) cleaned += enc.path_marker;
    tok.deprel = cleaned;
    if (found >= 0) {
      tok.head = found;
    } else {
      warn(diag, "deprojectivize: no node labelled '" + target + "' below token " +
                     std::to_string(current) + " for token " + std::to_string(d) +
                     "; keeping attachment");
    }
  }
  for (int d = 1; d <= n; ++d) erase_all(t.token(d).deprel, enc.path_marker);
  return t;
}

}  // namespace scramble

namespace scramble {

Treebank projectivize_treebank(const Treebank& tb, int* lifts, const LiftEncoding& enc) {
  Treebank out;
  out.source_name = tb.source_name;
  int total = 0;
  for (const auto& t : tb.trees) {
    auto r = projectivize(t, enc);
    total += static_cast<int>(r.lifts.size());
    out.trees.push_back(std::move(r.tree));
  }
  if (lifts != nullptr) *lifts = total;
  return out;
}

Treebank deprojectivize_treebank(const Treebank& tb, Diagnostics* diag, const LiftEncoding& enc) {
  Treebank out;
  out.source_name = tb.source_name;
  for (const auto& t : tb.trees) out.trees.push_back(deprojectivize(t, enc, diag));
  return out;
}

}  // namespace scramble
