#include "scramble/treebank.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>

namespace scramble {

void Diagnostics::warn(const std::string& message) { warnings.push_back(message); }

void warn(Diagnostics* diag, const std::string& message) {
  if (diag != nullptr) {
    diag->warn(message);
  } else {
    std::cerr << "warning: " << message << "\n";
  }
}

std::vector<std::string> DepTree::forms() const {
  std::vector<std::string> out;
  out.reserve(tokens_.size());
  for (const auto& t : tokens_) out.push_back(t.form);
  return out;
}

std::vector<std::string> DepTree::upos_tags() const {
  std::vector<std::string> out;
  out.reserve(tokens_.size());
  for (const auto& t : tokens_) out.push_back(t.upos);
  return out;
}

std::vector<std::vector<int>> DepTree::children() const {
  std::vector<std::vector<int>> out(tokens_.size() + 1);
  for (const auto& t : tokens_) {
    if (t.head >= 0 && t.head <= size()) out[t.head].push_back(t.index);
  }
  return out;
}

bool DepTree::dominates(int ancestor, int node) const {
  // Bounded walk so that malformed input cannot loop forever.
  for (int steps = 0; steps <= size() + 1; ++steps) {
    if (node == ancestor) return true;
    if (node == 0) return false;
    node = head(node);
  }
  return false;
}

int Treebank::token_count() const {
  int n = 0;
  for (const auto& t : trees) n += t.size();
  return n;
}

std::vector<std::string> validate_tree(const DepTree& tree,
                                       const ValidationOptions& options) {
  std::vector<std::string> violations;
  const int n = tree.size();
  bool heads_in_range = true;
  int roots = 0;
  for (int i = 1; i <= n; ++i) {
    const Token& tok = tree.token(i);
    const std::string where = "token " + std::to_string(i) + ": ";
    if (tok.index != i) {
      violations.push_back(where + "index " + std::to_string(tok.index) +
                           " breaks the 1..n sequence");
    }
    if (tok.form.empty()) violations.push_back(where + "empty form");
    if (tok.deprel.empty()) violations.push_back(where + "empty deprel");
    if (tok.head == i) {
      violations.push_back(where + "self-loop");
      heads_in_range = false;
    } else if (tok.head < 0 || tok.head > n) {
      violations.push_back(where + "head " + std::to_string(tok.head) + " out of range");
      heads_in_range = false;
    }
    if (tok.head == 0) ++roots;
  }
  if (!heads_in_range) return violations;

  if (options.single_root && roots > 1) violations.push_back("multiple roots");

  // 0 = unvisited, 1 = on current path, 2 = known to reach the root.
  std::vector<int> state(n + 1, 0);
  state[0] = 2;
  for (int start = 1; start <= n; ++start) {
    std::vector<int> path;
    int node = start;
    while (state[node] == 0) {
      state[node] = 1;
      path.push_back(node);
      node = tree.head(node);
    }
    if (state[node] == 1) {
      std::vector<int> cycle;
      auto it = std::find(path.begin(), path.end(), node);
      cycle.assign(it, path.end());
      std::sort(cycle.begin(), cycle.end());
      std::string msg = "cycle involving ";
      for (size_t k = 0; k < cycle.size(); ++k) {
        if (k > 0) msg += ",";
        msg += std::to_string(cycle[k]);
      }
      violations.push_back(msg);
    }
    for (int p : path) state[p] = 2;
  }
  return violations;
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

bool parse_int(std::string_view s, int& value) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  return ec == std::errc() && ptr == s.data() + s.size();
}

struct PendingTree {
  DepTree tree;
  int first_line = 0;
  bool has_tokens = false;
};

void finish_tree(PendingTree& pending, Treebank& out) {
  if (!pending.has_tokens) {
    pending = {};
    return;
  }
  DepTree& tree = pending.tree;
  for (const auto& c : tree.comments()) {
    if (c.rfind("sent_id", 0) == 0) {
      auto eq = c.find('=');
      if (eq != std::string::npos) {
        std::string id = c.substr(eq + 1);
        id.erase(0, id.find_first_not_of(' '));
        tree.set_sentence_id(id);
      }
    }
  }
  auto violations = validate_tree(tree);
  if (!violations.empty()) {
    throw ValidationError("treebank-io",
                          describe(tree, out.size() + 1) + " (line " +
                              std::to_string(pending.first_line) + "): " + violations.front());
  }
  out.trees.push_back(std::move(tree));
  pending = {};
}

}  // namespace

std::string describe(const DepTree& tree, int position) {
  if (tree.sentence_id()) return "sentence '" + *tree.sentence_id() + "'";
  return "sentence #" + std::to_string(position);
}

Treebank parse_conllu(std::string_view text, Diagnostics* diag) {
  Treebank out;
  PendingTree pending;
  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (line.empty()) {
      finish_tree(pending, out);
      if (end == text.size()) break;
      continue;
    }
    if (pending.first_line == 0) pending.first_line = line_no;
    if (line.front() == '#') {
      std::string_view body = line.substr(1);
      if (!body.empty() && body.front() == ' ') body.remove_prefix(1);
      pending.tree.comments().emplace_back(body);
      if (end == text.size()) break;
      continue;
    }
    auto cols = split(line, '\t');
    if (cols.size() != 10) {
      throw ParseError(line_no, "expected 10 tab-separated columns, found " +
                                    std::to_string(cols.size()));
    }
    if (cols[0].find('-') != std::string_view::npos ||
        cols[0].find('.') != std::string_view::npos) {
      warn(diag, "line " + std::to_string(line_no) + ": skipping multiword/empty node " +
                     std::string(cols[0]));
      if (end == text.size()) break;
      continue;
    }
    Token tok;
    if (!parse_int(cols[0], tok.index)) {
      throw ParseError(line_no, "bad token id '" + std::string(cols[0]) + "'");
    }
    if (!parse_int(cols[6], tok.head)) {
      throw ParseError(line_no, "bad head '" + std::string(cols[6]) + "'");
    }
    tok.form = cols[1];
    tok.lemma = cols[2];
    tok.upos = cols[3];
    tok.xpos = cols[4];
    tok.feats = cols[5];
    tok.deprel = cols[7];
    tok.misc = cols[9];
    pending.tree.tokens().push_back(std::move(tok));
    pending.has_tokens = true;
    if (end == text.size()) break;
  }
  finish_tree(pending, out);
  return out;
}

std::string write_conllu(const DepTree& tree) {
  std::ostringstream os;
  bool has_id_comment = false;
  for (const auto& c : tree.comments()) {
    if (c.rfind("sent_id", 0) == 0) has_id_comment = true;
  }
  if (tree.sentence_id() && !has_id_comment) {
    os << "# sent_id = " << *tree.sentence_id() << "\n";
  }
  for (const auto& c : tree.comments()) os << "# " << c << "\n";
  for (const auto& t : tree.tokens()) {
    os << t.index << '\t' << t.form << '\t' << t.lemma << '\t' << t.upos << '\t' << t.xpos
       << '\t' << t.feats << '\t' << t.head << '\t' << t.deprel << '\t' << '_' << '\t'
       << t.misc << '\n';
  }
  os << '\n';
  return os.str();
}

std::string write_conllu(const Treebank& treebank) {
  std::string out;
  for (const auto& t : treebank.trees) out += write_conllu(t);
  return out;
}

Treebank read_conllu_file(const std::string& path, Diagnostics* diag) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("treebank-io", "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  Treebank tb = parse_conllu(buf.str(), diag);
  tb.source_name = path;
  return tb;
}

void write_conllu_file(const std::string& path, const Treebank& treebank) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("treebank-io", "cannot write " + path);
  out << write_conllu(treebank);
}

}  // namespace scramble
