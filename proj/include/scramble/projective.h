#pragma once

#include <string>
#include <utility>
#include <vector>

#include "scramble/treebank.h"

namespace scramble {

// Pseudo-projective label encoding. A lifted dependent with original label
// "obj" whose syntactic head had label "nsubj" is relabelled "obj∥nsubj";
// arcs along the lifting path get the path marker appended.
struct LiftEncoding {
  enum class Scheme { kHeadPath, kHead, kPath };

  Scheme scheme = Scheme::kHeadPath;
  std::string head_separator = "∥";  // ∥
  std::string path_marker = "†";     // †
};

struct LiftRecord {
  int dependent = 0;
  int original_head = 0;
  int lifted_head = 0;
  std::string encoded_label;
};

bool is_projective(const DepTree& tree);

// Whether the arc into `dependent` spans a token its head does not dominate.
bool is_projective_arc(const DepTree& tree, int dependent);
int count_nonprojective_arcs(const DepTree& tree);

// Throws on an empty treebank.
double nonprojective_arc_ratio(const Treebank& treebank);

struct ProjectivizeResult {
  DepTree tree;
  std::vector<LiftRecord> lifts;
};

ProjectivizeResult projectivize(const DepTree& tree, const LiftEncoding& enc = {});

// Inverse transformation. Encoded arcs are reattached by breadth-first search
// below their current head; arcs whose target cannot be found keep their
// attachment, lose the encoding, and produce a warning.
DepTree deprojectivize(const DepTree& tree, const LiftEncoding& enc = {},
                       Diagnostics* diag = nullptr);

// Strips the head encoding and path markers from a label.
std::string base_label(const std::string& label, const LiftEncoding& enc = {});

}  // namespace scramble

namespace scramble {

// Projectivizes every tree; returns the number of lifted arcs through `lifts`.
Treebank projectivize_treebank(const Treebank& tb, int* lifts = nullptr,
                               const LiftEncoding& enc = {});
Treebank deprojectivize_treebank(const Treebank& tb, Diagnostics* diag = nullptr,
                                 const LiftEncoding& enc = {});

}  // namespace scramble
