#include "scramble/ngram.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "scramble/binary_io.h"

namespace scramble {

namespace {
constexpr const char* kMagic = "NGLM1";
constexpr std::uint32_t kVersion = 1;
}  // namespace

std::size_t NGramModel::ContextHash::operator()(const std::vector<int>& v) const noexcept {
  std::size_t h = 1469598103934665603ull;
  for (int x : v) {
    h ^= static_cast<std::size_t>(x) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

int NGramModel::add_word(const std::string& w) {
  auto [it, inserted] = ids_.emplace(w, static_cast<int>(words_.size()));
  if (inserted) words_.push_back(w);
  return it->second;
}

int NGramModel::id(const std::string& word) const {
  auto it = ids_.find(word);
  if (it == ids_.end() || it->second == bos_id()) return unk_id();
  return it->second;
}

NGramModel NGramModel::uniform(std::span<const std::string> words, int order) {
  if (order < 1 || order > 5) throw Error("ngram-lm", "order must be in [1, 5]");
  NGramModel m;
  m.order_ = order;
  m.add_word(kBos);
  m.add_word(kEos);
  m.add_word(kUnk);
  for (const auto& w : words) m.add_word(w);
  m.stats_.resize(order);
  return m;
}

NGramModel NGramModel::train(std::span<const std::vector<std::string>> corpus, int order) {
  if (order < 1 || order > 5) throw Error("ngram-lm", "order must be in [1, 5]");
  bool any = false;
  for (const auto& s : corpus) any = any || !s.empty();
  if (!any) throw Error("ngram-lm", "empty training corpus");

  NGramModel m = uniform({}, order);
  std::vector<int> ids;
  for (const auto& sentence : corpus) {
    if (sentence.empty()) continue;
    ids.assign(order - 1, m.bos_id());
    for (const auto& w : sentence) ids.push_back(m.add_word(w));
    ids.push_back(m.eos_id());
    for (size_t i = order - 1; i < ids.size(); ++i) {
      for (int len = 0; len < order; ++len) {
        std::vector<int> ctx(ids.begin() + (i - len), ids.begin() + i);
        ContextStats& st = m.stats_[len][ctx];
        st.next[ids[i]] += 1.0;
        st.total += 1.0;
      }
    }
  }
  ContextStats& uni = m.stats_[0][{}];
  double singletons = 0;
  for (const auto& [w, c] : uni.next) {
    if (w != m.eos_id() && c == 1.0) singletons += 1.0;
  }
  if (singletons > 0) {
    uni.next[m.unk_id()] += singletons;
    uni.total += singletons;
  }
  return m;
}

const NGramModel::ContextStats* NGramModel::find(std::span<const int> context) const {
  const auto& table = stats_[context.size()];
  auto it = table.find(std::vector<int>(context.begin(), context.end()));
  return it == table.end() ? nullptr : &it->second;
}

double NGramModel::probability(int word, std::span<const int> context) const {
  if (word <= bos_id() || word >= static_cast<int>(words_.size())) word = unk_id();
  if (static_cast<int>(context.size()) > order_ - 1) {
    context = context.subspan(context.size() - (order_ - 1));
  }
  double p = 1.0 / vocab_size();
  for (size_t len = 0; len <= context.size(); ++len) {
    const ContextStats* st = find(context.subspan(context.size() - len));
    if (st == nullptr) break;
    const double types = static_cast<double>(st->next.size());
    auto it = st->next.find(word);
    const double c = it == st->next.end() ? 0.0 : it->second;
    p = (c + types * p) / (st->total + types);
  }
  return p;
}

double NGramModel::probability(const std::string& word,
                               const std::vector<std::string>& context) const {
  std::vector<int> ctx;
  for (const auto& w : context) ctx.push_back(w == kBos ? bos_id() : id(w));
  return probability(word == kEos ? eos_id() : id(word), ctx);
}

double NGramModel::ml_probability(int word, std::span<const int> context) const {
  const ContextStats* st = find(context);
  if (st == nullptr || st->total == 0) return 0.0;
  auto it = st->next.find(word);
  return it == st->next.end() ? 0.0 : it->second / st->total;
}

double perplexity(const NGramModel& model, std::span<const std::string> sentence) {
  const int order = model.order();
  std::vector<int> ids(order - 1, model.bos_id());
  for (const auto& w : sentence) ids.push_back(model.id(w));
  ids.push_back(model.eos_id());
  double log_sum = 0.0;
  const size_t start = order - 1;
  for (size_t i = start; i < ids.size(); ++i) {
    std::span<const int> ctx(ids.data() + i - (order - 1), order - 1);
    log_sum += std::log(model.probability(ids[i], ctx));
  }
  const double n = static_cast<double>(ids.size() - start);
  return std::exp(-log_sum / n);
}

std::string NGramModel::serialize() const {
  BinaryWriter w;
  w.magic(kMagic);
  w.put<std::uint32_t>(kVersion);
  w.put<std::int32_t>(order_);
  w.put_string(provenance);
  w.put<std::uint64_t>(words_.size());
  for (const auto& word : words_) w.put_string(word);
  for (int len = 0; len < order_; ++len) {
    std::vector<const std::pair<const std::vector<int>, ContextStats>*> entries;
    for (const auto& e : stats_[len]) entries.push_back(&e);
    std::sort(entries.begin(), entries.end(),
              [](auto* a, auto* b) { return a->first < b->first; });
    w.put<std::uint64_t>(entries.size());
    for (const auto* e : entries) {
      for (int id : e->first) w.put<std::int32_t>(id);
      w.put<double>(e->second.total);
      w.put<std::uint64_t>(e->second.next.size());
      for (const auto& [id, c] : e->second.next) {
        w.put<std::int32_t>(id);
        w.put<double>(c);
      }
    }
  }
  return w.bytes();
}

NGramModel NGramModel::deserialize(const std::string& bytes) {
  BinaryReader r(bytes, "ngram-lm");
  r.expect_magic(kMagic);
  if (r.get<std::uint32_t>() != kVersion) throw Error("ngram-lm", "unsupported version");
  NGramModel m;
  m.order_ = r.get<std::int32_t>();
  if (m.order_ < 1 || m.order_ > 5) throw Error("ngram-lm", "corrupt order");
  m.provenance = r.get_string();
  auto nwords = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < nwords; ++i) m.add_word(r.get_string());
  if (m.words_.size() < 3) throw Error("ngram-lm", "corrupt vocabulary");
  m.stats_.resize(m.order_);
  for (int len = 0; len < m.order_; ++len) {
    auto nctx = r.get<std::uint64_t>();
    for (std::uint64_t k = 0; k < nctx; ++k) {
      std::vector<int> ctx(len);
      for (int j = 0; j < len; ++j) ctx[j] = r.get<std::int32_t>();
      ContextStats st;
      st.total = r.get<double>();
      auto nnext = r.get<std::uint64_t>();
      for (std::uint64_t j = 0; j < nnext; ++j) {
        int id = r.get<std::int32_t>();
        st.next[id] = r.get<double>();
      }
      m.stats_[len].emplace(std::move(ctx), std::move(st));
    }
  }
  if (!r.at_end()) throw Error("ngram-lm", "trailing bytes in model file");
  return m;
}

void NGramModel::save(const std::string& path) const {
  write_file_bytes(path, serialize(), "ngram-lm");
}

NGramModel NGramModel::load(const std::string& path) {
  return deserialize(read_file_bytes(path, "ngram-lm"));
}

std::vector<std::vector<std::string>> read_token_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("ngram-lm", "cannot open " + path);
  std::vector<std::vector<std::string>> corpus;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream is(line);
    std::vector<std::string> tokens;
    std::string tok;
    while (is >> tok) tokens.push_back(tok);
    if (!tokens.empty()) corpus.push_back(std::move(tokens));
  }
  return corpus;
}

}  // namespace scramble
