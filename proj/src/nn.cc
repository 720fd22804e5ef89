#include "scramble/nn.h"

#include <algorithm>
#include <cmath>

#include "scramble/binary_io.h"

namespace scramble::nn {

void Param::touch(int column) { touched.push_back(column); }

void Param::zero_grad() {
  if (sparse) {
    for (int c : touched) grad.col(c).setZero();
    touched.clear();
  } else {
    grad.setZero();
  }
}

Param& ParameterSet::add(const std::string& name, int rows, int cols, bool sparse) {
  if (index_.count(name)) throw Error("neural-core", "duplicate parameter " + name);
  auto p = std::make_unique<Param>();
  p->name = name;
  p->value = Matrix::Zero(rows, cols);
  p->grad = Matrix::Zero(rows, cols);
  p->sparse = sparse;
  Param* raw = p.get();
  params_.push_back(std::move(p));
  index_[name] = raw;
  return *raw;
}

Param& ParameterSet::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("neural-core", "no parameter " + name);
  return *it->second;
}

const Param& ParameterSet::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("neural-core", "no parameter " + name);
  return *it->second;
}

std::vector<Param*> ParameterSet::all() {
  std::vector<Param*> out;
  for (auto& p : params_) out.push_back(p.get());
  return out;
}

std::vector<const Param*> ParameterSet::all() const {
  std::vector<const Param*> out;
  for (const auto& p : params_) out.push_back(p.get());
  return out;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p->zero_grad();
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p->value.size();
  return n;
}

void uniform_init(Param& p, double limit, Rng& rng) {
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (Eigen::Index j = 0; j < p.value.cols(); ++j) {
    for (Eigen::Index i = 0; i < p.value.rows(); ++i) p.value(i, j) = dist(rng);
  }
}

void glorot_init(Param& p, Rng& rng) {
  const double fan = static_cast<double>(p.value.rows() + p.value.cols());
  uniform_init(p, std::sqrt(6.0 / fan), rng);
}

// ---------------------------------------------------------------- Linear

Linear::Linear(ParameterSet& ps, const std::string& name, int in, int out)
    : w_(&ps.add(name + ".w", out, in)), b_(&ps.add(name + ".b", out, 1)) {}

Matrix Linear::forward(const Matrix& x) const {
  if (x.rows() != w_->value.cols()) {
    throw Error("neural-core", w_->name + ": expected input width " +
                                   std::to_string(w_->value.cols()) + ", got " +
                                   std::to_string(x.rows()));
  }
  Matrix y = w_->value * x;
  y.colwise() += b_->value.col(0);
  return y;
}

Matrix Linear::backward(const Matrix& x, const Matrix& dy) const {
  w_->grad.noalias() += dy * x.transpose();
  b_->grad.col(0) += dy.rowwise().sum();
  return w_->value.transpose() * dy;
}

// ---------------------------------------------------------------- LSTM

namespace {

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

LstmCell::LstmCell(ParameterSet& ps, const std::string& name, int in, int hidden)
    : in_(in),
      hidden_(hidden),
      wx_(&ps.add(name + ".wx", 4 * hidden, in)),
      wh_(&ps.add(name + ".wh", 4 * hidden, hidden)),
      b_(&ps.add(name + ".b", 4 * hidden, 1)) {}

LstmTrace LstmCell::forward(const Matrix& x) const {
  if (x.rows() != in_) {
    throw Error("neural-core", wx_->name + ": expected input width " + std::to_string(in_) +
                                   ", got " + std::to_string(x.rows()));
  }
  const int h = hidden_;
  const Eigen::Index steps = x.cols();
  LstmTrace tr;
  tr.x = x;
  tr.gates.resize(4 * h, steps);
  tr.c.resize(h, steps);
  tr.h.resize(h, steps);

  Matrix z = wx_->value * x;
  z.colwise() += b_->value.col(0);
  Vector h_prev = Vector::Zero(h);
  Vector c_prev = Vector::Zero(h);
  for (Eigen::Index t = 0; t < steps; ++t) {
    Vector zt = z.col(t);
    zt.noalias() += wh_->value * h_prev;
    auto gates = tr.gates.col(t);
    for (int k = 0; k < 3 * h; ++k) gates(k) = logistic(zt(k));
    for (int k = 3 * h; k < 4 * h; ++k) gates(k) = std::tanh(zt(k));
    for (int k = 0; k < h; ++k) {
      const double c = gates(h + k) * c_prev(k) + gates(k) * gates(3 * h + k);
      tr.c(k, t) = c;
      tr.h(k, t) = gates(2 * h + k) * std::tanh(c);
    }
    h_prev = tr.h.col(t);
    c_prev = tr.c.col(t);
  }
  return tr;
}

Matrix LstmCell::backward(const LstmTrace& tr, const Matrix& dh_in) const {
  const int h = hidden_;
  const Eigen::Index steps = tr.x.cols();
  Matrix dz(4 * h, steps);
  Vector dh_next = Vector::Zero(h);
  Vector dc_next = Vector::Zero(h);
  for (Eigen::Index t = steps - 1; t >= 0; --t) {
    const auto gates = tr.gates.col(t);
    for (int k = 0; k < h; ++k) {
      const double i = gates(k), f = gates(h + k), o = gates(2 * h + k), g = gates(3 * h + k);
      const double c = tr.c(k, t);
      const double c_prev = t > 0 ? tr.c(k, t - 1) : 0.0;
      const double tc = std::tanh(c);
      const double dh = dh_in(k, t) + dh_next(k);
      const double d_o = dh * tc;
      const double dc = dh * o * (1.0 - tc * tc) + dc_next(k);
      dz(k, t) = dc * g * i * (1.0 - i);
      dz(h + k, t) = dc * c_prev * f * (1.0 - f);
      dz(2 * h + k, t) = d_o * o * (1.0 - o);
      dz(3 * h + k, t) = dc * i * (1.0 - g * g);
      dc_next(k) = dc * f;
    }
    dh_next.noalias() = wh_->value.transpose() * dz.col(t);
  }
  if (steps > 1) {
    wh_->grad.noalias() += dz.rightCols(steps - 1) * tr.h.leftCols(steps - 1).transpose();
  }
  wx_->grad.noalias() += dz * tr.x.transpose();
  b_->grad.col(0) += dz.rowwise().sum();
  return wx_->value.transpose() * dz;
}

BiLstm::BiLstm(ParameterSet& ps, const std::string& name, int in, int hidden)
    : fwd_(ps, name + ".fwd", in, hidden), bwd_(ps, name + ".bwd", in, hidden) {}

Matrix BiLstm::forward(const Matrix& x, BiLstmTrace* trace) const {
  const int h = fwd_.hidden_size();
  LstmTrace f = fwd_.forward(x);
  LstmTrace b = bwd_.forward(x.rowwise().reverse());
  Matrix out(2 * h, x.cols());
  out.topRows(h) = f.h;
  out.bottomRows(h) = b.h.rowwise().reverse();
  if (trace != nullptr) {
    trace->fwd = std::move(f);
    trace->bwd = std::move(b);
  }
  return out;
}

Matrix BiLstm::backward(const BiLstmTrace& trace, const Matrix& dout) const {
  const int h = fwd_.hidden_size();
  Matrix dx = fwd_.backward(trace.fwd, dout.topRows(h));
  Matrix dbwd = dout.bottomRows(h).rowwise().reverse();
  dx += bwd_.backward(trace.bwd, dbwd).rowwise().reverse();
  return dx;
}

StackedBiLstm::StackedBiLstm(ParameterSet& ps, const std::string& name, int in, int hidden,
                             int layers) {
  if (layers < 1) throw Error("neural-core", "need at least one recurrent layer");
  for (int l = 0; l < layers; ++l) {
    layers_.emplace_back(ps, name + ".l" + std::to_string(l), l == 0 ? in : 2 * hidden, hidden);
  }
}

Matrix StackedBiLstm::forward(const Matrix& x, std::vector<BiLstmTrace>* traces) const {
  if (traces != nullptr) traces->assign(layers_.size(), {});
  Matrix cur = x;
  for (size_t l = 0; l < layers_.size(); ++l) {
    cur = layers_[l].forward(cur, traces != nullptr ? &(*traces)[l] : nullptr);
  }
  return cur;
}

Matrix StackedBiLstm::backward(const std::vector<BiLstmTrace>& traces, const Matrix& dout) const {
  Matrix d = dout;
  for (size_t l = layers_.size(); l-- > 0;) d = layers_[l].backward(traces[l], d);
  return d;
}

Matrix forward_bilstm(const StackedBiLstm& encoder, const Matrix& inputs) {
  return encoder.forward(inputs, nullptr);
}

// ---------------------------------------------------------------- MLP

Mlp::Mlp(ParameterSet& ps, const std::string& name, int in, int hidden, int out)
    : hidden_(ps, name + ".hidden", in, hidden), out_(ps, name + ".out", hidden, out) {}

Matrix Mlp::forward(const Matrix& x, MlpTrace* trace, double dropout, Rng* rng) const {
  Matrix pre = hidden_.forward(x);
  Matrix act = pre.cwiseMax(0.0);
  Matrix mask;
  if (dropout > 0.0 && rng != nullptr) {
    mask.resize(act.rows(), act.cols());
    for (Eigen::Index c = 0; c < act.cols(); ++c) {
      mask.col(c) = dropout_mask(static_cast<int>(act.rows()), dropout, true, *rng);
    }
    act.array() *= mask.array();
  }
  Matrix logits = out_.forward(act);
  if (trace != nullptr) {
    trace->x = x;
    trace->pre = std::move(pre);
    trace->mask = std::move(mask);
    trace->hidden = std::move(act);
    trace->logits = logits;
  }
  return logits;
}

Matrix Mlp::backward(const MlpTrace& trace, const Matrix& dlogits) const {
  Matrix dact = out_.backward(trace.hidden, dlogits);
  if (trace.mask.size() > 0) dact.array() *= trace.mask.array();
  dact.array() *= (trace.pre.array() > 0.0).cast<double>();
  return hidden_.backward(trace.x, dact);
}

Matrix softmax(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const double mx = logits.col(c).maxCoeff();
    out.col(c) = (logits.col(c).array() - mx).exp();
    out.col(c) /= out.col(c).sum();
  }
  return out;
}

Vector softmax(const Vector& logits) {
  Matrix m = logits;
  return softmax(m).col(0);
}

Vector mlp_classify(const Mlp& mlp, const Vector& features) {
  Matrix x = features;
  return softmax(mlp.forward(x, nullptr)).col(0);
}

double softmax_cross_entropy(const Matrix& logits, const std::vector<int>& gold,
                             Matrix* dlogits) {
  Matrix p = softmax(logits);
  double loss = 0.0;
  for (Eigen::Index c = 0; c < logits.cols(); ++c) loss -= std::log(p(gold[c], c));
  if (dlogits != nullptr) {
    for (Eigen::Index c = 0; c < logits.cols(); ++c) p(gold[c], c) -= 1.0;
    *dlogits = std::move(p);
  }
  return loss;
}

Vector dropout_mask(int size, double p, bool training, Rng& rng) {
  if (p < 0.0 || p >= 1.0) throw Error("neural-core", "dropout probability must be in [0,1)");
  if (!training || p == 0.0) return Vector::Ones(size);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double keep = 1.0 / (1.0 - p);
  Vector m(size);
  for (int i = 0; i < size; ++i) m(i) = u(rng) < p ? 0.0 : keep;
  return m;
}

// ---------------------------------------------------------------- SGD

MomentumSgd::MomentumSgd(OptimizerConfig cfg) : cfg_(cfg) {
  if (cfg_.learning_rate <= 0) throw Error("neural-core", "learning rate must be positive");
  if (cfg_.momentum < 0 || cfg_.momentum >= 1) throw Error("neural-core", "momentum must be in [0,1)");
  if (cfg_.l2 < 0) throw Error("neural-core", "l2 must be non-negative");
}

void MomentumSgd::step(ParameterSet& params) {
  auto all = params.all();
  double sq = 0.0;
  for (Param* p : all) {
    if (p->sparse) {
      std::sort(p->touched.begin(), p->touched.end());
      p->touched.erase(std::unique(p->touched.begin(), p->touched.end()), p->touched.end());
      for (int c : p->touched) sq += p->grad.col(c).squaredNorm();
    } else {
      sq += p->grad.squaredNorm();
    }
    if (!std::isfinite(sq)) throw Error("neural-core", "non-finite gradient in " + p->name);
  }
  const double norm = std::sqrt(sq);
  const double scale = cfg_.clip > 0 && norm > cfg_.clip ? cfg_.clip / norm : 1.0;

  for (Param* p : all) {
    Matrix& v = velocity_[p];
    if (v.size() == 0) v = Matrix::Zero(p->value.rows(), p->value.cols());
    auto update = [&](auto&& value, auto&& grad, auto&& vel) {
      vel = cfg_.momentum * vel - cfg_.learning_rate * (scale * grad + cfg_.l2 * value);
      value += vel;
    };
    if (p->sparse) {
      for (int c : p->touched) update(p->value.col(c), p->grad.col(c), v.col(c));
    } else {
      update(p->value, p->grad, v);
    }
    p->zero_grad();
  }
}

// ---------------------------------------------------------------- checkpoints

namespace {
constexpr const char* kCheckpointMagic = "SPNN1";
constexpr std::uint32_t kCheckpointVersion = 1;
}  // namespace

void Checkpoint::capture(const ParameterSet& params) {
  tensors.clear();
  for (const Param* p : params.all()) {
    Tensor t;
    t.name = p->name;
    t.rows = static_cast<int>(p->value.rows());
    t.cols = static_cast<int>(p->value.cols());
    t.data.assign(p->value.data(), p->value.data() + p->value.size());
    tensors.push_back(std::move(t));
  }
}

void Checkpoint::restore(ParameterSet& params) const {
  auto all = params.all();
  if (all.size() != tensors.size()) {
    throw Error("neural-core", "checkpoint has " + std::to_string(tensors.size()) +
                                   " tensors, model expects " + std::to_string(all.size()));
  }
  for (const auto& t : tensors) {
    Param& p = params.get(t.name);
    if (p.value.rows() != t.rows || p.value.cols() != t.cols) {
      throw Error("neural-core", "shape mismatch for " + t.name);
    }
    std::copy(t.data.begin(), t.data.end(), p.value.data());
  }
}

std::string Checkpoint::serialize() const {
  BinaryWriter w;
  w.magic(kCheckpointMagic);
  w.put<std::uint32_t>(kCheckpointVersion);
  w.put<std::uint64_t>(meta.size());
  for (const auto& [k, v] : meta) {
    w.put_string(k);
    w.put_string(v);
  }
  w.put<std::uint64_t>(vocabularies.size());
  for (const auto& [k, items] : vocabularies) {
    w.put_string(k);
    w.put<std::uint64_t>(items.size());
    for (const auto& s : items) w.put_string(s);
  }
  w.put<std::uint64_t>(tensors.size());
  for (const auto& t : tensors) {
    w.put_string(t.name);
    w.put<std::int32_t>(t.rows);
    w.put<std::int32_t>(t.cols);
    w.put_doubles(t.data.data(), t.data.size());
  }
  return w.bytes();
}

Checkpoint Checkpoint::deserialize(const std::string& bytes) {
  BinaryReader r(bytes, "neural-core");
  r.expect_magic(kCheckpointMagic);
  if (r.get<std::uint32_t>() != kCheckpointVersion) {
    throw Error("neural-core", "unsupported checkpoint version");
  }
  Checkpoint ck;
  auto nmeta = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < nmeta; ++i) {
    std::string k = r.get_string();
    ck.meta[k] = r.get_string();
  }
  auto nvocab = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < nvocab; ++i) {
    std::string k = r.get_string();
    auto n = r.get<std::uint64_t>();
    auto& items = ck.vocabularies[k];
    for (std::uint64_t j = 0; j < n; ++j) items.push_back(r.get_string());
  }
  auto ntensors = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < ntensors; ++i) {
    Tensor t;
    t.name = r.get_string();
    t.rows = r.get<std::int32_t>();
    t.cols = r.get<std::int32_t>();
    t.data = r.get_doubles();
    if (static_cast<std::int64_t>(t.data.size()) != static_cast<std::int64_t>(t.rows) * t.cols) {
      throw Error("neural-core", "corrupt tensor " + t.name);
    }
    ck.tensors.push_back(std::move(t));
  }
  if (!r.at_end()) throw Error("neural-core", "trailing bytes in checkpoint");
  return ck;
}

void Checkpoint::save(const std::string& path) const {
  write_file_bytes(path, serialize(), "neural-core");
}

Checkpoint Checkpoint::load(const std::string& path) {
  return deserialize(read_file_bytes(path, "neural-core"));
}

}  // namespace scramble::nn
