#include "scramble/parser.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "scramble/eval.h"
#include "scramble/projective.h"

namespace scramble {

using nn::Matrix;
using nn::Vector;

// ---------------------------------------------------------------- vocab

Vocab::Vocab() {
  add("<pad>");
  add("<unk>");
  add("<null>");
}

Vocab::Vocab(const std::vector<std::string>& items) {
  for (const auto& s : items) add(s);
  if (size() < 3) throw Error("parser-trainer", "vocabulary lacks reserved entries");
}

int Vocab::add(const std::string& s) {
  auto [it, inserted] = index_.emplace(s, size());
  if (inserted) items_.push_back(s);
  return it->second;
}

int Vocab::id(const std::string& s) const {
  auto it = index_.find(s);
  return it == index_.end() ? kUnk : it->second;
}

std::vector<std::string> utf8_code_points(const std::string& text) {
  std::vector<std::string> out;
  for (size_t i = 0; i < text.size();) {
    const auto lead = static_cast<unsigned char>(text[i]);
    size_t len = 1;
    if (lead >= 0xF0) {
      len = 4;
    } else if (lead >= 0xE0) {
      len = 3;
    } else if (lead >= 0xC0) {
      len = 2;
    }
    len = std::min(len, text.size() - i);
    out.push_back(text.substr(i, len));
    i += len;
  }
  return out;
}

// ---------------------------------------------------------------- config

namespace {

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw Error("parser-trainer", "bad integer for " + key + ": '" + v + "'");
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw Error("parser-trainer", "bad number for " + key + ": '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw Error("parser-trainer", "bad boolean for " + key + ": '" + v + "'");
}

std::string fmt_double(double d) {
  std::ostringstream os;
  os.precision(17);
  os << d;
  return os.str();
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

void ParserConfig::set(const std::string& key, const std::string& value) {
  if (key == "word_dim") word_dim = to_int(key, value);
  else if (key == "tag_dim") tag_dim = to_int(key, value);
  else if (key == "char_dim") char_dim = to_int(key, value);
  else if (key == "char_hidden") char_hidden = to_int(key, value);
  else if (key == "lstm_hidden") lstm_hidden = to_int(key, value);
  else if (key == "lstm_layers") lstm_layers = to_int(key, value);
  else if (key == "mlp_hidden") mlp_hidden = to_int(key, value);
  else if (key == "max_chars") max_chars = to_int(key, value);
  else if (key == "word_dropout") word_dropout = to_double(key, value);
  else if (key == "hidden_dropout") hidden_dropout = to_double(key, value);
  else if (key == "epochs") epochs = to_int(key, value);
  else if (key == "learning_rate") learning_rate = to_double(key, value);
  else if (key == "momentum") momentum = to_double(key, value);
  else if (key == "l2") l2 = to_double(key, value);
  else if (key == "clip") clip = to_double(key, value);
  else if (key == "seed") seed = std::stoull(value);
  else if (key == "pseudo_projective") pseudo_projective = to_bool(key, value);
  else if (key == "exclude_punct") exclude_punct = to_bool(key, value);
  else if (key == "embeddings") embeddings = value;
  else throw Error("parser-trainer", "unknown hyperparameter '" + key + "'");
}

std::map<std::string, std::string> ParserConfig::to_map() const {
  return {{"word_dim", std::to_string(word_dim)},
          {"tag_dim", std::to_string(tag_dim)},
          {"char_dim", std::to_string(char_dim)},
          {"char_hidden", std::to_string(char_hidden)},
          {"lstm_hidden", std::to_string(lstm_hidden)},
          {"lstm_layers", std::to_string(lstm_layers)},
          {"mlp_hidden", std::to_string(mlp_hidden)},
          {"max_chars", std::to_string(max_chars)},
          {"word_dropout", fmt_double(word_dropout)},
          {"hidden_dropout", fmt_double(hidden_dropout)},
          {"epochs", std::to_string(epochs)},
          {"learning_rate", fmt_double(learning_rate)},
          {"momentum", fmt_double(momentum)},
          {"l2", fmt_double(l2)},
          {"clip", fmt_double(clip)},
          {"seed", std::to_string(seed)},
          {"pseudo_projective", pseudo_projective ? "true" : "false"},
          {"exclude_punct", exclude_punct ? "true" : "false"},
          {"embeddings", embeddings}};
}

ParserConfig ParserConfig::from_map(const std::map<std::string, std::string>& kv) {
  ParserConfig cfg;
  for (const auto& [k, v] : kv) cfg.set(k, v);
  return cfg;
}

std::map<std::string, std::string> read_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("parser-trainer", "cannot open config " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error("parser-trainer", path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::string format_key_values(const std::map<std::string, std::string>& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::unordered_map<std::string, std::vector<double>> read_embeddings(const std::string& path,
                                                                     int dim) {
  std::ifstream in(path);
  if (!in) throw Error("parser-trainer", "cannot open embeddings " + path);
  std::unordered_map<std::string, std::vector<double>> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream is(line);
    std::string word;
    if (!(is >> word)) continue;
    std::vector<double> v;
    double x;
    while (is >> x) v.push_back(x);
    if (static_cast<int>(v.size()) != dim) {
      throw Error("parser-trainer", path + ":" + std::to_string(line_no) + ": expected " +
                                        std::to_string(dim) + " values");
    }
    out[word] = std::move(v);
  }
  return out;
}

// ---------------------------------------------------------------- encoder

SentenceEncoder::SentenceEncoder(nn::ParameterSet& ps, const std::string& prefix,
                                 const EncoderShape& shape, int n_words, int n_tags,
                                 int n_chars)
    : shape_(shape) {
  word_emb_ = &ps.add(prefix + ".word_emb", shape.word_dim, n_words, true);
  if (shape.tag_dim > 0) tag_emb_ = &ps.add(prefix + ".tag_emb", shape.tag_dim, n_tags);
  char_emb_ = &ps.add(prefix + ".char_emb", shape.char_dim, n_chars, true);
  char_lstm_ = nn::BiLstm(ps, prefix + ".char", shape.char_dim, shape.char_hidden);
  if (shape.with_root) root_ = &ps.add(prefix + ".root", input_size(), 1);
  lstm_ = nn::StackedBiLstm(ps, prefix + ".lstm", input_size(), shape.lstm_hidden,
                            shape.lstm_layers);
}

int SentenceEncoder::input_size() const {
  return shape_.word_dim + 2 * shape_.char_hidden + shape_.tag_dim;
}

void SentenceEncoder::init(nn::Rng& rng) {
  nn::uniform_init(*word_emb_, 0.25, rng);
  for (int reserved : {Vocab::kPad, Vocab::kUnk, Vocab::kNull}) {
    word_emb_->value.col(reserved).setZero();
  }
  if (tag_emb_ != nullptr) nn::uniform_init(*tag_emb_, 0.25, rng);
  nn::uniform_init(*char_emb_, 0.25, rng);
  if (root_ != nullptr) nn::uniform_init(*root_, 0.25, rng);
}

Matrix SentenceEncoder::forward(const Input& in, double word_dropout, nn::Rng* rng,
                                Trace* trace) const {
  const int n = static_cast<int>(in.words.size());
  if (n == 0) throw Error("parser-trainer", "cannot encode an empty sentence");
  const int steps = n + (shape_.with_root ? 1 : 0);
  const int wd = shape_.word_dim;
  const int ch = shape_.char_hidden;
  Matrix x(input_size(), steps);
  std::vector<bool> dropped(n, false);
  std::vector<nn::BiLstmTrace> char_traces(trace != nullptr ? n : 0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  for (int t = 0; t < n; ++t) {
    if (word_dropout > 0.0 && rng != nullptr && coin(*rng) < word_dropout) {
      dropped[t] = true;
      x.block(0, t, wd, 1).setZero();
    } else {
      x.block(0, t, wd, 1) = word_emb_->value.col(in.words[t]);
    }
    const auto& cids = in.chars[t];
    Matrix cx(shape_.char_dim, static_cast<Eigen::Index>(cids.size()));
    for (size_t j = 0; j < cids.size(); ++j) cx.col(j) = char_emb_->value.col(cids[j]);
    Matrix cout = char_lstm_.forward(cx, trace != nullptr ? &char_traces[t] : nullptr);
    x.block(wd, t, ch, 1) = cout.block(0, cout.cols() - 1, ch, 1);
    x.block(wd + ch, t, ch, 1) = cout.block(ch, 0, ch, 1);
    if (tag_emb_ != nullptr) x.block(wd + 2 * ch, t, shape_.tag_dim, 1) = tag_emb_->value.col(in.tags[t]);
  }
  if (shape_.with_root) x.col(n) = root_->value.col(0);

  std::vector<nn::BiLstmTrace>* sent = trace != nullptr ? &trace->sentence : nullptr;
  Matrix out = lstm_.forward(x, sent);
  if (trace != nullptr) {
    trace->input = std::move(x);
    trace->words = in.words;
    trace->tags = in.tags;
    trace->word_dropped = std::move(dropped);
    trace->chars = in.chars;
    trace->char_traces = std::move(char_traces);
  }
  return out;
}

void SentenceEncoder::backward(const Trace& trace, const Matrix& dout) const {
  Matrix dx = lstm_.backward(trace.sentence, dout);
  const int n = static_cast<int>(trace.words.size());
  const int wd = shape_.word_dim;
  const int ch = shape_.char_hidden;
  for (int t = 0; t < n; ++t) {
    if (!trace.word_dropped[t]) {
      word_emb_->grad.col(trace.words[t]) += dx.block(0, t, wd, 1);
      word_emb_->touch(trace.words[t]);
    }
    const auto& cids = trace.chars[t];
    const auto len = static_cast<Eigen::Index>(cids.size());
    Matrix dc = Matrix::Zero(2 * ch, len);
    dc.block(0, len - 1, ch, 1) = dx.block(wd, t, ch, 1);
    dc.block(ch, 0, ch, 1) = dx.block(wd + ch, t, ch, 1);
    Matrix dcx = char_lstm_.backward(trace.char_traces[t], dc);
    for (Eigen::Index j = 0; j < len; ++j) {
      char_emb_->grad.col(cids[j]) += dcx.col(j);
      char_emb_->touch(cids[j]);
    }
    if (tag_emb_ != nullptr) {
      tag_emb_->grad.col(trace.tags[t]) += dx.block(wd + 2 * ch, t, shape_.tag_dim, 1);
    }
  }
  if (shape_.with_root) root_->grad.col(0) += dx.col(n);
}

// ---------------------------------------------------------------- features

FeatureNodes feature_nodes(const Configuration& c) {
  FeatureNodes f;
  f.fill(-1);
  auto lc = [&](int node) {
    if (node < 0) return -1;
    int l = c.leftmost_child(node);
    return l >= 0 && l < node ? l : -1;
  };
  auto rc = [&](int node) {
    if (node < 0) return -1;
    int r = c.rightmost_child(node);
    return r > node ? r : -1;
  };
  const int s0 = c.stack_at(0), s1 = c.stack_at(1), s2 = c.stack_at(2);
  const int b0 = c.buffer_front();
  f[0] = s0;
  f[1] = s1;
  f[2] = s2;
  f[3] = b0;
  f[4] = lc(s0);
  f[5] = rc(s0);
  f[6] = lc(s1);
  f[7] = rc(s1);
  f[8] = lc(s2);
  f[9] = rc(s2);
  f[10] = lc(b0);
  return f;
}

namespace {

inline Eigen::Index context_column(int node, int n) { return node == 0 ? n : node - 1; }

}  // namespace

Vector featurize(const Configuration& c, const Matrix& ctx, const Vector& null_vector) {
  const auto width = ctx.rows();
  const int n = c.sentence_length();
  Vector x(kFeatureCount * width);
  FeatureNodes nodes = feature_nodes(c);
  for (int k = 0; k < kFeatureCount; ++k) {
    if (nodes[k] < 0) {
      x.segment(k * width, width) = null_vector;
    } else {
      x.segment(k * width, width) = ctx.col(context_column(nodes[k], n));
    }
  }
  return x;
}

// ---------------------------------------------------------------- parser

namespace {

EncoderShape encoder_shape(const ParserConfig& cfg, bool tags, bool root) {
  EncoderShape s;
  s.word_dim = cfg.word_dim;
  s.tag_dim = tags ? cfg.tag_dim : 0;
  s.char_dim = cfg.char_dim;
  s.char_hidden = cfg.char_hidden;
  s.lstm_hidden = cfg.lstm_hidden;
  s.lstm_layers = cfg.lstm_layers;
  s.max_chars = cfg.max_chars;
  s.with_root = root;
  return s;
}

// Per-gate Glorot scaled up for the LSTM weights: with plain Glorot over the
// stacked gates, top-layer outputs start near 0.005 and training stalls.
constexpr double kLstmGain = 2.0;

void init_dense(nn::ParameterSet& ps, nn::Rng& rng) {
  for (nn::Param* p : ps.all()) {
    if (p->sparse) continue;
    const auto& name = p->name;
    auto ends_with = [&](const char* suffix) {
      const std::string s(suffix);
      return name.size() >= s.size() && name.compare(name.size() - s.size(), s.size(), s) == 0;
    };
    if (ends_with(".b")) {
      p->value.setZero();
    } else if (ends_with(".wx") || ends_with(".wh")) {
      const double fan = static_cast<double>(p->value.cols() + p->value.rows() / 4);
      nn::uniform_init(*p, kLstmGain * std::sqrt(6.0 / fan), rng);
    } else {
      nn::glorot_init(*p, rng);
    }
  }
}

std::vector<std::vector<int>> char_ids(const Vocab& chars, const std::vector<std::string>& words,
                                       int max_chars) {
  std::vector<std::vector<int>> out;
  out.reserve(words.size());
  for (const auto& w : words) {
    auto cps = utf8_code_points(w);
    if (static_cast<int>(cps.size()) > max_chars) cps.resize(max_chars);
    std::vector<int> ids;
    for (const auto& cp : cps) ids.push_back(chars.id(cp));
    if (ids.empty()) ids.push_back(Vocab::kNull);
    out.push_back(std::move(ids));
  }
  return out;
}

void build_vocabs(const Treebank& train, int max_chars, Vocab& words, Vocab& tags, Vocab& chars) {
  for (const auto& t : train.trees) {
    for (const auto& tok : t.tokens()) {
      words.add(tok.form);
      tags.add(tok.upos);
      auto cps = utf8_code_points(tok.form);
      if (static_cast<int>(cps.size()) > max_chars) cps.resize(max_chars);
      for (const auto& cp : cps) chars.add(cp);
    }
  }
}

void load_pretrained(const ParserConfig& cfg, Vocab& words,
                     std::unordered_map<std::string, std::vector<double>>& vectors) {
  if (cfg.embeddings.empty()) return;
  vectors = read_embeddings(cfg.embeddings, cfg.word_dim);
  std::vector<std::string> sorted;
  for (const auto& [w, v] : vectors) sorted.push_back(w);
  std::sort(sorted.begin(), sorted.end());
  for (const auto& w : sorted) words.add(w);
}

std::map<std::string, std::string> checkpoint_meta(const ParserConfig& cfg, const std::string& kind,
                                                   const std::string& provenance) {
  std::map<std::string, std::string> meta;
  for (const auto& [k, v] : cfg.to_map()) meta["cfg." + k] = v;
  meta["kind"] = kind;
  meta["provenance"] = provenance;
  return meta;
}

ParserConfig config_from_meta(const std::map<std::string, std::string>& meta,
                              const std::string& kind) {
  auto it = meta.find("kind");
  if (it == meta.end() || it->second != kind) {
    throw Error("parser-trainer", "checkpoint is not a " + kind + " model");
  }
  ParserConfig cfg;
  for (const auto& [k, v] : meta) {
    if (k.rfind("cfg.", 0) == 0) cfg.set(k.substr(4), v);
  }
  return cfg;
}

const std::vector<std::string>& vocab_section(const nn::Checkpoint& ck, const std::string& name) {
  auto it = ck.vocabularies.find(name);
  if (it == ck.vocabularies.end()) throw Error("parser-trainer", "checkpoint lacks vocabulary " + name);
  return it->second;
}

}  // namespace

ParserModel::ParserModel(const ParserConfig& cfg, Vocab words, Vocab tags, Vocab chars,
                         std::vector<std::string> labels)
    : cfg_(cfg),
      words_(std::move(words)),
      tags_(std::move(tags)),
      chars_(std::move(chars)),
      labels_(std::move(labels)) {
  for (size_t i = 0; i < labels_.size(); ++i) label_index_[labels_[i]] = static_cast<int>(i);
  encoder_ = SentenceEncoder(params_, "parser.enc", encoder_shape(cfg_, true, true), words_.size(),
                             tags_.size(), chars_.size());
  const int ctx = encoder_.output_size();
  null_ = &params_.add("parser.null", ctx, 1);
  mlp_ = nn::Mlp(params_, "parser.mlp", kFeatureCount * ctx, cfg_.mlp_hidden, class_count());

  nn::Rng rng(cfg_.seed);
  init_dense(params_, rng);
  encoder_.init(rng);
  nn::uniform_init(*null_, 0.25, rng);
}

ParserModel ParserModel::create(const Treebank& train, const ParserConfig& cfg) {
  Vocab words, tags, chars;
  build_vocabs(train, cfg.max_chars, words, tags, chars);
  std::unordered_map<std::string, std::vector<double>> pretrained;
  load_pretrained(cfg, words, pretrained);
  std::set<std::string> label_set;
  for (const auto& t : train.trees) {
    for (const auto& tok : t.tokens()) label_set.insert(tok.deprel);
  }
  ParserModel m(cfg, std::move(words), std::move(tags), std::move(chars),
                std::vector<std::string>(label_set.begin(), label_set.end()));
  nn::Param& emb = m.params_.get("parser.enc.word_emb");
  for (const auto& [w, v] : pretrained) {
    emb.value.col(m.words_.id(w)) = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  return m;
}

int ParserModel::transition_class(const Transition& t) const {
  switch (t.kind) {
    case TransitionKind::kShift: return 0;
    case TransitionKind::kReduce: return 1;
    default: break;
  }
  auto it = label_index_.find(t.label);
  if (it == label_index_.end()) throw Error("parser-trainer", "unknown label '" + t.label + "'");
  return 2 + 2 * it->second + (t.kind == TransitionKind::kRightArc ? 1 : 0);
}

Transition ParserModel::class_transition(int cls) const {
  if (cls == 0) return Transition::shift();
  if (cls == 1) return Transition::reduce();
  const auto& label = labels_.at((cls - 2) / 2);
  return (cls - 2) % 2 == 0 ? Transition::left_arc(label) : Transition::right_arc(label);
}

SentenceEncoder::Input ParserModel::make_input(const std::vector<std::string>& words,
                                               const std::vector<std::string>& tags) const {
  if (words.size() != tags.size()) throw Error("parser-trainer", "words and tags differ in length");
  SentenceEncoder::Input in;
  for (size_t i = 0; i < words.size(); ++i) {
    in.words.push_back(words_.id(words[i]));
    in.tags.push_back(tags_.id(tags[i]));
  }
  in.chars = char_ids(chars_, words, cfg_.max_chars);
  return in;
}

Matrix ParserModel::feature_matrix(const std::vector<FeatureNodes>& nodes, const Matrix& ctx) const {
  const auto width = ctx.rows();
  const int n = static_cast<int>(ctx.cols()) - 1;
  Matrix x(kFeatureCount * width, static_cast<Eigen::Index>(nodes.size()));
  for (size_t t = 0; t < nodes.size(); ++t) {
    for (int k = 0; k < kFeatureCount; ++k) {
      const int node = nodes[t][k];
      x.block(k * width, t, width, 1) =
          node < 0 ? Matrix(null_->value) : Matrix(ctx.col(context_column(node, n)));
    }
  }
  return x;
}

double ParserModel::accumulate_gradients(const DepTree& gold, nn::Rng* rng, bool training) {
  SentenceEncoder::Trace trace;
  const auto input = make_input(gold.forms(), gold.upos_tags());
  Matrix ctx = encoder_.forward(input, training ? cfg_.word_dropout : 0.0, rng, &trace);

  std::vector<FeatureNodes> nodes;
  std::vector<int> gold_classes;
  Configuration c = initial_config(gold.size());
  for (const auto& t : static_oracle(gold)) {
    nodes.push_back(feature_nodes(c));
    gold_classes.push_back(transition_class(t));
    c.apply(t);
  }

  Matrix x = feature_matrix(nodes, ctx);
  nn::MlpTrace mtrace;
  Matrix logits = mlp_.forward(x, &mtrace, training ? cfg_.hidden_dropout : 0.0, rng);
  Matrix dlogits;
  const double loss = nn::softmax_cross_entropy(logits, gold_classes, &dlogits);
  Matrix dx = mlp_.backward(mtrace, dlogits);

  const auto width = ctx.rows();
  const int n = gold.size();
  Matrix dctx = Matrix::Zero(width, ctx.cols());
  for (size_t t = 0; t < nodes.size(); ++t) {
    for (int k = 0; k < kFeatureCount; ++k) {
      const int node = nodes[t][k];
      auto slice = dx.block(k * width, t, width, 1);
      if (node < 0) {
        null_->grad += slice;
      } else {
        dctx.col(context_column(node, n)) += slice;
      }
    }
  }
  encoder_.backward(trace, dctx);
  return loss;
}

double ParserModel::loss(const DepTree& gold) const {
  const auto input = make_input(gold.forms(), gold.upos_tags());
  Matrix ctx = encoder_.forward(input, 0.0, nullptr, nullptr);
  std::vector<FeatureNodes> nodes;
  std::vector<int> gold_classes;
  Configuration c = initial_config(gold.size());
  for (const auto& t : static_oracle(gold)) {
    nodes.push_back(feature_nodes(c));
    gold_classes.push_back(transition_class(t));
    c.apply(t);
  }
  Matrix logits = mlp_.forward(feature_matrix(nodes, ctx), nullptr);
  return nn::softmax_cross_entropy(logits, gold_classes, nullptr);
}

std::vector<Transition> ParserModel::decode_transitions(const std::vector<std::string>& words,
                                                        const std::vector<std::string>& tags) const {
  const auto input = make_input(words, tags);
  Matrix ctx = encoder_.forward(input, 0.0, nullptr, nullptr);
  Configuration c = initial_config(static_cast<int>(words.size()));
  std::vector<Transition> seq;
  while (!is_terminal(c)) {
    Matrix x = featurize(c, ctx, null_->value.col(0));
    Matrix logits = mlp_.forward(x, nullptr);
    const LegalSet legal = legal_transitions(c);
    int best = -1;
    for (int cls = 0; cls < class_count(); ++cls) {
      TransitionKind kind = cls == 0   ? TransitionKind::kShift
                            : cls == 1 ? TransitionKind::kReduce
                            : (cls - 2) % 2 == 0 ? TransitionKind::kLeftArc
                                                 : TransitionKind::kRightArc;
      if (!legal.allows(kind)) continue;
      if (best < 0 || logits(cls, 0) > logits(best, 0)) best = cls;
    }
    if (best < 0) break;
    Transition t = class_transition(best);
    c.apply(t);
    seq.push_back(std::move(t));
  }
  return seq;
}

DepTree ParserModel::parse(const std::vector<std::string>& words,
                           const std::vector<std::string>& tags) const {
  std::vector<Token> tokens;
  for (size_t i = 0; i < words.size(); ++i) {
    Token tok;
    tok.index = static_cast<int>(i) + 1;
    tok.form = words[i];
    tok.upos = tags[i];
    tok.deprel = "dep";
    tokens.push_back(std::move(tok));
  }
  return parse(DepTree(std::move(tokens)));
}

DepTree ParserModel::parse(const DepTree& input) const {
  if (input.empty()) throw Error("parser-trainer", "cannot parse an empty sentence");
  const auto words = input.forms();
  const auto tags = input.upos_tags();
  Configuration c = initial_config(input.size());
  for (const auto& t : decode_transitions(words, tags)) c.apply(t);
  DepTree out = tree_from_config(input, c, "dep");
  if (cfg_.pseudo_projective) {
    Diagnostics quiet;
    out = deprojectivize(out, {}, &quiet);
  }
  return out;
}

void ParserModel::save(const std::string& path, const std::string& provenance) const {
  nn::Checkpoint ck;
  ck.meta = checkpoint_meta(cfg_, "parser", provenance);
  ck.vocabularies["words"] = words_.items();
  ck.vocabularies["tags"] = tags_.items();
  ck.vocabularies["chars"] = chars_.items();
  ck.vocabularies["labels"] = labels_;
  ck.capture(params_);
  ck.save(path);
}

ParserModel ParserModel::load(const std::string& path) {
  nn::Checkpoint ck = nn::Checkpoint::load(path);
  ParserConfig cfg = config_from_meta(ck.meta, "parser");
  ParserModel m(cfg, Vocab(vocab_section(ck, "words")), Vocab(vocab_section(ck, "tags")),
                Vocab(vocab_section(ck, "chars")), vocab_section(ck, "labels"));
  ck.restore(m.params_);
  return m;
}

ParserModel train_parser(const Treebank& train, const Treebank& dev, const ParserConfig& cfg,
                         const EpochCallback& on_epoch) {
  if (train.empty()) throw Error("parser-trainer", "empty training treebank");
  for (int s = 0; s < train.size(); ++s) {
    if (!is_projective(train.trees[s])) {
      throw Error("parser-trainer", describe(train.trees[s], s + 1) +
                                        " is non-projective; projectivize the training data first");
    }
  }
  ParserModel model = ParserModel::create(train, cfg);
  nn::MomentumSgd opt({cfg.learning_rate, cfg.momentum, cfg.l2, cfg.clip});
  nn::Rng rng(cfg.seed);
  std::vector<int> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  double best_las = -1.0;
  nn::Checkpoint best;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochLog log;
    log.epoch = epoch;
    for (int i : order) {
      log.loss += model.accumulate_gradients(train.trees[i], &rng, true);
      opt.step(model.params());
    }
    if (!dev.empty()) {
      Treebank pred;
      for (const auto& t : dev.trees) pred.trees.push_back(model.parse(t));
      log.dev_las = score(dev, pred, cfg.exclude_punct).las;
      if (log.dev_las > best_las) {
        best_las = log.dev_las;
        best.capture(model.params());
      }
    }
    log.model = &model;
    if (on_epoch) on_epoch(log);
  }
  if (!best.tensors.empty()) best.restore(model.params());
  return model;
}

// ---------------------------------------------------------------- tagger

TaggerModel::TaggerModel(const ParserConfig& cfg, Vocab words, Vocab chars,
                         std::vector<std::string> tags)
    : cfg_(cfg), words_(std::move(words)), chars_(std::move(chars)), tags_(std::move(tags)) {
  if (tags_.empty()) throw Error("parser-trainer", "empty tag inventory");
  for (size_t i = 0; i < tags_.size(); ++i) tag_index_[tags_[i]] = static_cast<int>(i);
  encoder_ = SentenceEncoder(params_, "tagger.enc", encoder_shape(cfg_, false, false),
                             words_.size(), 0, chars_.size());
  mlp_ = nn::Mlp(params_, "tagger.mlp", encoder_.output_size(), cfg_.mlp_hidden,
                 static_cast<int>(tags_.size()));
  nn::Rng rng(cfg_.seed);
  init_dense(params_, rng);
  encoder_.init(rng);
}

TaggerModel TaggerModel::create(const Treebank& train, const ParserConfig& cfg) {
  Vocab words, tags, chars;
  build_vocabs(train, cfg.max_chars, words, tags, chars);
  std::unordered_map<std::string, std::vector<double>> pretrained;
  load_pretrained(cfg, words, pretrained);
  std::set<std::string> tagset;
  for (const auto& t : train.trees) {
    for (const auto& tok : t.tokens()) tagset.insert(tok.upos);
  }
  TaggerModel m(cfg, std::move(words), std::move(chars),
                std::vector<std::string>(tagset.begin(), tagset.end()));
  nn::Param& emb = m.params_.get("tagger.enc.word_emb");
  for (const auto& [w, v] : pretrained) {
    emb.value.col(m.words_.id(w)) = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  return m;
}

double TaggerModel::accumulate_gradients(const DepTree& gold, nn::Rng* rng, bool training) {
  SentenceEncoder::Input in;
  const auto forms = gold.forms();
  for (const auto& w : forms) in.words.push_back(words_.id(w));
  in.chars = char_ids(chars_, forms, cfg_.max_chars);
  std::vector<int> golds;
  for (const auto& tok : gold.tokens()) {
    auto it = tag_index_.find(tok.upos);
    if (it == tag_index_.end()) throw Error("parser-trainer", "unknown tag '" + tok.upos + "'");
    golds.push_back(it->second);
  }
  SentenceEncoder::Trace trace;
  Matrix ctx = encoder_.forward(in, training ? cfg_.word_dropout : 0.0, rng, &trace);
  nn::MlpTrace mtrace;
  Matrix logits = mlp_.forward(ctx, &mtrace, training ? cfg_.hidden_dropout : 0.0, rng);
  Matrix dlogits;
  const double loss = nn::softmax_cross_entropy(logits, golds, &dlogits);
  encoder_.backward(trace, mlp_.backward(mtrace, dlogits));
  return loss;
}

std::vector<std::string> TaggerModel::tag(const std::vector<std::string>& words) const {
  if (words.empty()) return {};
  SentenceEncoder::Input in;
  for (const auto& w : words) in.words.push_back(words_.id(w));
  in.chars = char_ids(chars_, words, cfg_.max_chars);
  Matrix logits = mlp_.forward(encoder_.forward(in, 0.0, nullptr, nullptr), nullptr);
  std::vector<std::string> out;
  for (Eigen::Index t = 0; t < logits.cols(); ++t) {
    Eigen::Index best;
    logits.col(t).maxCoeff(&best);
    out.push_back(tags_[best]);
  }
  return out;
}

void TaggerModel::save(const std::string& path, const std::string& provenance) const {
  nn::Checkpoint ck;
  ck.meta = checkpoint_meta(cfg_, "tagger", provenance);
  ck.vocabularies["words"] = words_.items();
  ck.vocabularies["chars"] = chars_.items();
  ck.vocabularies["tags"] = tags_;
  ck.capture(params_);
  ck.save(path);
}

TaggerModel TaggerModel::load(const std::string& path) {
  nn::Checkpoint ck = nn::Checkpoint::load(path);
  ParserConfig cfg = config_from_meta(ck.meta, "tagger");
  TaggerModel m(cfg, Vocab(vocab_section(ck, "words")), Vocab(vocab_section(ck, "chars")),
                vocab_section(ck, "tags"));
  ck.restore(m.params_);
  return m;
}

double tagging_accuracy(const TaggerModel& tagger, const Treebank& gold) {
  std::vector<std::vector<std::string>> pred;
  for (const auto& t : gold.trees) pred.push_back(tagger.tag(t.forms()));
  return pos_accuracy(gold, pred);
}

TaggerModel train_tagger(const Treebank& train, const Treebank& dev, const ParserConfig& cfg,
                         const EpochCallback& on_epoch) {
  if (train.empty()) throw Error("parser-trainer", "empty training treebank");
  TaggerModel model = TaggerModel::create(train, cfg);
  nn::MomentumSgd opt({cfg.learning_rate, cfg.momentum, cfg.l2, cfg.clip});
  nn::Rng rng(cfg.seed);
  std::vector<int> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  double best_acc = -1.0;
  nn::Checkpoint best;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochLog log;
    log.epoch = epoch;
    for (int i : order) {
      log.loss += model.accumulate_gradients(train.trees[i], &rng, true);
      opt.step(model.params());
    }
    if (!dev.empty()) {
      log.dev_las = tagging_accuracy(model, dev);
      if (log.dev_las > best_acc) {
        best_acc = log.dev_las;
        best.capture(model.params());
      }
    }
    if (on_epoch) on_epoch(log);
  }
  if (!best.tensors.empty()) best.restore(model.params());
  return model;
}

}  // namespace scramble
