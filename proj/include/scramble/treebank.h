#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scramble/error.h"

namespace scramble {

// One CoNLL-U token line. `head` is 0 for the artificial root.
struct Token {
  int index = 0;
  std::string form;
  std::string lemma = "_";
  std::string upos = "_";
  std::string xpos = "_";
  std::string feats = "_";
  int head = 0;
  std::string deprel;
  std::string misc = "_";

  friend bool operator==(const Token&, const Token&) = default;
};

class DepTree {
 public:
  DepTree() = default;
  explicit DepTree(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  int size() const { return static_cast<int>(tokens_.size()); }
  bool empty() const { return tokens_.empty(); }

  // 1-based access; index 0 is the artificial root and has no Token.
  const Token& token(int index) const { return tokens_[index - 1]; }
  Token& token(int index) { return tokens_[index - 1]; }
  int head(int index) const { return tokens_[index - 1].head; }
  const std::string& deprel(int index) const { return tokens_[index - 1].deprel; }

  const std::vector<Token>& tokens() const { return tokens_; }
  std::vector<Token>& tokens() { return tokens_; }

  std::vector<std::string> forms() const;
  std::vector<std::string> upos_tags() const;

  // children[h] lists dependents of h in ascending index order, h in 0..n.
  std::vector<std::vector<int>> children() const;

  // Whether `node` lies in the subtree rooted at `ancestor` (inclusive).
  bool dominates(int ancestor, int node) const;

  const std::optional<std::string>& sentence_id() const { return sentence_id_; }
  void set_sentence_id(std::optional<std::string> id) { sentence_id_ = std::move(id); }

  // Comment lines without the leading "# ".
  const std::vector<std::string>& comments() const { return comments_; }
  std::vector<std::string>& comments() { return comments_; }

  friend bool operator==(const DepTree&, const DepTree&) = default;

 private:
  std::vector<Token> tokens_;
  std::optional<std::string> sentence_id_;
  std::vector<std::string> comments_;
};

struct Treebank {
  std::vector<DepTree> trees;
  std::string source_name;

  int size() const { return static_cast<int>(trees.size()); }
  bool empty() const { return trees.empty(); }
  int token_count() const;
};

struct ValidationOptions {
  bool single_root = false;
};

// Empty result means the tree is well formed.
std::vector<std::string> validate_tree(const DepTree& tree,
                                       const ValidationOptions& options = {});

// Throws ParseError on malformed lines and ValidationError on trees that are
// not rooted trees. Multiword ranges and empty nodes are skipped with a warning.
Treebank parse_conllu(std::string_view text, Diagnostics* diag = nullptr);
std::string write_conllu(const Treebank& treebank);
std::string write_conllu(const DepTree& tree);

Treebank read_conllu_file(const std::string& path, Diagnostics* diag = nullptr);
void write_conllu_file(const std::string& path, const Treebank& treebank);

// Human readable sentence name used in error messages.
std::string describe(const DepTree& tree, int position);

}  // namespace scramble
