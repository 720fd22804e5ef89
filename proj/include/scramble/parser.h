#pragma once

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "scramble/arc_eager.h"
#include "scramble/nn.h"
#include "scramble/treebank.h"

namespace scramble {

// String <-> dense id table. Ids 0..2 are PAD, UNK and NULL.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kNull = 2;

  Vocab();
  explicit Vocab(const std::vector<std::string>& items);

  int add(const std::string& s);
  int id(const std::string& s) const;  // kUnk when absent
  bool contains(const std::string& s) const { return index_.count(s) > 0; }
  const std::string& item(int id) const { return items_[id]; }
  int size() const { return static_cast<int>(items_.size()); }
  const std::vector<std::string>& items() const { return items_; }

 private:
  std::vector<std::string> items_;
  std::unordered_map<std::string, int> index_;
};

// Splits UTF-8 text into code points (each returned as its byte sequence).
std::vector<std::string> utf8_code_points(const std::string& text);

struct ParserConfig {
  int word_dim = 64;
  int tag_dim = 32;
  int char_dim = 32;
  int char_hidden = 64;
  int lstm_hidden = 128;
  int lstm_layers = 2;
  int mlp_hidden = 128;
  int max_chars = 32;
  double word_dropout = 0.1;
  double hidden_dropout = 0.5;
  int epochs = 20;
  double learning_rate = 0.01;
  double momentum = 0.9;
  double l2 = 1e-6;
  double clip = 5.0;
  std::uint64_t seed = 42;
  bool pseudo_projective = true;
  bool exclude_punct = true;
  std::string embeddings;  // optional pre-trained word vectors

  // Throws on unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);
  std::map<std::string, std::string> to_map() const;
  static ParserConfig from_map(const std::map<std::string, std::string>& kv);
};

// Plain "key = value" lines; '#' starts a comment.
std::map<std::string, std::string> read_key_values(const std::string& path);
std::string format_key_values(const std::map<std::string, std::string>& kv);

// "word v1 ... vD" per line.
std::unordered_map<std::string, std::vector<double>> read_embeddings(const std::string& path,
                                                                     int dim);

struct EncoderShape {
  int word_dim = 0;
  int tag_dim = 0;  // 0 disables the tag slice
  int char_dim = 0;
  int char_hidden = 0;
  int lstm_hidden = 0;
  int lstm_layers = 0;
  int max_chars = 32;
  bool with_root = false;
};

// Word embedding (or zeros under word dropout) + character BiLSTM summary +
// tag embedding, fed through stacked BiLSTMs. With a root, the root's learned
// input row is appended as the last position of the sequence.
class SentenceEncoder {
 public:
  struct Input {
    std::vector<int> words;
    std::vector<int> tags;
    std::vector<std::vector<int>> chars;
  };

  struct Trace {
    nn::Matrix input;
    std::vector<int> words;
    std::vector<int> tags;
    std::vector<bool> word_dropped;
    std::vector<std::vector<int>> chars;
    std::vector<nn::BiLstmTrace> char_traces;
    std::vector<nn::BiLstmTrace> sentence;
  };

  SentenceEncoder() = default;
  SentenceEncoder(nn::ParameterSet& ps, const std::string& prefix, const EncoderShape& shape,
                  int n_words, int n_tags, int n_chars);

  const EncoderShape& shape() const { return shape_; }
  int input_size() const;
  int output_size() const { return 2 * shape_.lstm_hidden; }

  // One column per token, plus the root as the last column when enabled.
  // Throws on an empty sentence.
  nn::Matrix forward(const Input& in, double word_dropout, nn::Rng* rng, Trace* trace) const;
  void backward(const Trace& trace, const nn::Matrix& doutput) const;

  void init(nn::Rng& rng);

 private:
  EncoderShape shape_;
  nn::Param* word_emb_ = nullptr;
  nn::Param* tag_emb_ = nullptr;
  nn::Param* char_emb_ = nullptr;
  nn::Param* root_ = nullptr;
  nn::BiLstm char_lstm_;
  nn::StackedBiLstm lstm_;
};

// The 11 nodes read off a configuration: the three topmost stack nodes, the
// buffer front, leftmost and rightmost children of each of the three stack
// nodes, and the leftmost child of the buffer front. -1 marks a missing node.
inline constexpr int kFeatureCount = 11;
using FeatureNodes = std::array<int, kFeatureCount>;
FeatureNodes feature_nodes(const Configuration& c);

// Concatenated context vectors; `ctx` has token i (1-based) in column i-1 and
// the root in column n. Missing nodes read `null_vector`.
nn::Vector featurize(const Configuration& c, const nn::Matrix& ctx, const nn::Vector& null_vector);

class ParserModel;

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;  // summed over the epoch, dropout active
  double dev_las = -1.0;
  // The model as of the end of the epoch; only valid inside the callback.
  const ParserModel* model = nullptr;
};

using EpochCallback = std::function<void(const EpochLog&)>;

class ParserModel {
 public:
  ParserModel(const ParserConfig& cfg, Vocab words, Vocab tags, Vocab chars,
              std::vector<std::string> labels);
  ParserModel(ParserModel&&) = default;
  ParserModel& operator=(ParserModel&&) = default;
  ParserModel(const ParserModel&) = delete;
  ParserModel& operator=(const ParserModel&) = delete;

  // Vocabularies from the training trees; parameters randomly initialised.
  static ParserModel create(const Treebank& train, const ParserConfig& cfg);

  const ParserConfig& config() const { return cfg_; }
  bool pseudo_projective() const { return cfg_.pseudo_projective; }
  int class_count() const { return 2 + 2 * static_cast<int>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }
  const Vocab& word_vocab() const { return words_; }
  nn::ParameterSet& params() { return params_; }
  const nn::ParameterSet& params() const { return params_; }
  const SentenceEncoder& encoder() const { return encoder_; }

  int transition_class(const Transition& t) const;
  Transition class_transition(int cls) const;

  SentenceEncoder::Input make_input(const std::vector<std::string>& words,
                                    const std::vector<std::string>& tags) const;

  // Forward + backward over the oracle sequence of a projective tree;
  // gradients accumulate into params(). Returns the summed loss.
  double accumulate_gradients(const DepTree& gold, nn::Rng* rng, bool training);
  // The same loss without dropout, leaving gradients untouched.
  double loss(const DepTree& gold) const;

  // Greedy decoding; output is always a valid tree.
  DepTree parse(const std::vector<std::string>& words, const std::vector<std::string>& tags) const;
  // Uses the forms and upos of `input`, keeps its other columns.
  DepTree parse(const DepTree& input) const;

  // The greedy transition sequence behind parse().
  std::vector<Transition> decode_transitions(const std::vector<std::string>& words,
                                             const std::vector<std::string>& tags) const;

  void save(const std::string& path, const std::string& provenance = {}) const;
  static ParserModel load(const std::string& path);

 private:
  nn::Matrix feature_matrix(const std::vector<FeatureNodes>& nodes, const nn::Matrix& ctx) const;

  ParserConfig cfg_;
  Vocab words_;
  Vocab tags_;
  Vocab chars_;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, int> label_index_;
  nn::ParameterSet params_;
  SentenceEncoder encoder_;
  nn::Param* null_ = nullptr;
  nn::Mlp mlp_;
};

// Throws on an empty or non-projective training treebank.
ParserModel train_parser(const Treebank& train, const Treebank& dev, const ParserConfig& cfg,
                         const EpochCallback& on_epoch = {});

class TaggerModel {
 public:
  TaggerModel(const ParserConfig& cfg, Vocab words, Vocab chars, std::vector<std::string> tags);
  TaggerModel(TaggerModel&&) = default;
  TaggerModel& operator=(TaggerModel&&) = default;
  TaggerModel(const TaggerModel&) = delete;
  TaggerModel& operator=(const TaggerModel&) = delete;

  static TaggerModel create(const Treebank& train, const ParserConfig& cfg);

  const ParserConfig& config() const { return cfg_; }
  const std::vector<std::string>& tagset() const { return tags_; }
  nn::ParameterSet& params() { return params_; }

  double accumulate_gradients(const DepTree& gold, nn::Rng* rng, bool training);
  std::vector<std::string> tag(const std::vector<std::string>& words) const;

  void save(const std::string& path, const std::string& provenance = {}) const;
  static TaggerModel load(const std::string& path);

 private:
  ParserConfig cfg_;
  Vocab words_;
  Vocab chars_;
  std::vector<std::string> tags_;
  std::unordered_map<std::string, int> tag_index_;
  nn::ParameterSet params_;
  SentenceEncoder encoder_;
  nn::Mlp mlp_;
};

// Throws on an empty training treebank or an empty tag inventory.
TaggerModel train_tagger(const Treebank& train, const Treebank& dev, const ParserConfig& cfg,
                         const EpochCallback& on_epoch = {});

double tagging_accuracy(const TaggerModel& tagger, const Treebank& gold);

}  // namespace scramble
