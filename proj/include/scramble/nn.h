#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "scramble/error.h"

namespace scramble::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Rng = std::mt19937_64;

// A learnable tensor with its accumulated gradient. Embedding tables are
// "sparse": only columns listed in `touched` carry gradient and get updated.
struct Param {
  std::string name;
  Matrix value;
  Matrix grad;
  bool sparse = false;
  std::vector<int> touched;

  void touch(int column);
  void zero_grad();
};

class ParameterSet {
 public:
  Param& add(const std::string& name, int rows, int cols, bool sparse = false);
  Param& get(const std::string& name);
  const Param& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  std::vector<Param*> all();
  std::vector<const Param*> all() const;
  void zero_grad();
  std::size_t scalar_count() const;

 private:
  std::vector<std::unique_ptr<Param>> params_;
  std::map<std::string, Param*> index_;
};

// U(-limit, limit) with limit = sqrt(6 / (fan_in + fan_out)).
void glorot_init(Param& p, Rng& rng);
void uniform_init(Param& p, double limit, Rng& rng);

class Linear {
 public:
  Linear() = default;
  Linear(ParameterSet& ps, const std::string& name, int in, int out);

  int in_size() const { return static_cast<int>(w_->value.cols()); }
  int out_size() const { return static_cast<int>(w_->value.rows()); }

  Matrix forward(const Matrix& x) const;
  // Accumulates parameter gradients and returns d loss / d x.
  Matrix backward(const Matrix& x, const Matrix& dy) const;

  Param& weight() { return *w_; }
  Param& bias() { return *b_; }

 private:
  Param* w_ = nullptr;
  Param* b_ = nullptr;
};

// Everything the backward pass of one LSTM run needs.
struct LstmTrace {
  Matrix x;      // input, in x T
  Matrix gates;  // activated i, f, o, g stacked, 4h x T
  Matrix c;      // cell states, h x T
  Matrix h;      // hidden states, h x T
};

// Logistic input/forget/output gates, tanh candidate and output squashing.
class LstmCell {
 public:
  LstmCell() = default;
  LstmCell(ParameterSet& ps, const std::string& name, int in, int hidden);

  int in_size() const { return in_; }
  int hidden_size() const { return hidden_; }

  LstmTrace forward(const Matrix& x) const;
  Matrix backward(const LstmTrace& trace, const Matrix& dh) const;

 private:
  int in_ = 0;
  int hidden_ = 0;
  Param* wx_ = nullptr;
  Param* wh_ = nullptr;
  Param* b_ = nullptr;
};

struct BiLstmTrace {
  LstmTrace fwd;
  LstmTrace bwd;  // run over the reversed sequence
};

// Output column t is [forward h_t ; backward h_t], width 2 * hidden.
class BiLstm {
 public:
  BiLstm() = default;
  BiLstm(ParameterSet& ps, const std::string& name, int in, int hidden);

  int in_size() const { return fwd_.in_size(); }
  int out_size() const { return 2 * fwd_.hidden_size(); }

  Matrix forward(const Matrix& x, BiLstmTrace* trace) const;
  Matrix backward(const BiLstmTrace& trace, const Matrix& dout) const;

 private:
  LstmCell fwd_;
  LstmCell bwd_;
};

class StackedBiLstm {
 public:
  StackedBiLstm() = default;
  StackedBiLstm(ParameterSet& ps, const std::string& name, int in, int hidden, int layers);

  int in_size() const { return layers_.front().in_size(); }
  int out_size() const { return layers_.back().out_size(); }
  int layer_count() const { return static_cast<int>(layers_.size()); }

  // Throws on an input width mismatch.
  Matrix forward(const Matrix& x, std::vector<BiLstmTrace>* traces) const;
  Matrix backward(const std::vector<BiLstmTrace>& traces, const Matrix& dout) const;

 private:
  std::vector<BiLstm> layers_;
};

// Convenience wrapper: top-layer outputs for a sequence of column vectors.
Matrix forward_bilstm(const StackedBiLstm& encoder, const Matrix& inputs);

struct MlpTrace {
  Matrix x;
  Matrix pre;     // hidden pre-activation
  Matrix mask;    // dropout mask applied after the rectifier
  Matrix hidden;  // masked activations
  Matrix logits;
};

// One hidden layer with a rectifier, inverted dropout on the hidden layer,
// and a linear output layer.
class Mlp {
 public:
  Mlp() = default;
  Mlp(ParameterSet& ps, const std::string& name, int in, int hidden, int out);

  int in_size() const { return hidden_.in_size(); }
  int out_size() const { return out_.out_size(); }

  // dropout <= 0 or rng == nullptr disables the mask.
  Matrix forward(const Matrix& x, MlpTrace* trace, double dropout = 0.0,
                 Rng* rng = nullptr) const;
  Matrix backward(const MlpTrace& trace, const Matrix& dlogits) const;

  Linear& hidden_layer() { return hidden_; }
  Linear& output_layer() { return out_; }

 private:
  Linear hidden_;
  Linear out_;
};

// Column-wise numerically stable softmax.
Matrix softmax(const Matrix& logits);
Vector softmax(const Vector& logits);

// Class probabilities for one feature vector; throws on a width mismatch.
Vector mlp_classify(const Mlp& mlp, const Vector& features);

// Sum over columns of -log p[gold]; writes p - onehot(gold) into `dlogits`.
double softmax_cross_entropy(const Matrix& logits, const std::vector<int>& gold,
                             Matrix* dlogits);

// Inverted dropout: 0 with probability p, 1/(1-p) otherwise; all ones when
// not training.
Vector dropout_mask(int size, double p, bool training, Rng& rng);

struct OptimizerConfig {
  double learning_rate = 0.01;
  double momentum = 0.9;
  double l2 = 1e-6;
  // Global gradient-norm clip; 0 disables.
  double clip = 5.0;
};

// v <- momentum * v - lr * (grad + l2 * theta); theta <- theta + v.
class MomentumSgd {
 public:
  explicit MomentumSgd(OptimizerConfig cfg = {});

  const OptimizerConfig& config() const { return cfg_; }
  // Throws Error("neural-core", ...) naming any parameter with a non-finite
  // gradient. Zeroes gradients afterwards.
  void step(ParameterSet& params);

 private:
  OptimizerConfig cfg_;
  std::map<const Param*, Matrix> velocity_;
};

// Versioned binary checkpoint ("SPNN1").
struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::map<std::string, std::vector<std::string>> vocabularies;
  struct Tensor {
    std::string name;
    int rows = 0;
    int cols = 0;
    std::vector<double> data;
  };
  std::vector<Tensor> tensors;

  void capture(const ParameterSet& params);
  // Shapes and names must match exactly.
  void restore(ParameterSet& params) const;

  std::string serialize() const;
  static Checkpoint deserialize(const std::string& bytes);
  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);
};

}  // namespace scramble::nn
