#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "scramble/error.h"

namespace scramble {

// Little helpers for the versioned binary files (language models and
// network checkpoints). Values are stored in host byte order.
class BinaryWriter {
 public:
  void magic(std::string_view m) { bytes_.append(m); }

  template <typename T>
    requires std::is_arithmetic_v<T>
  void put(T value) {
    char buf[sizeof(T)];
    std::memcpy(buf, &value, sizeof(T));
    bytes_.append(buf, sizeof(T));
  }

  void put_string(std::string_view s) {
    put<std::uint64_t>(s.size());
    bytes_.append(s);
  }

  void put_doubles(const double* data, std::size_t count) {
    put<std::uint64_t>(count);
    bytes_.append(reinterpret_cast<const char*>(data), count * sizeof(double));
  }

  const std::string& bytes() const { return bytes_; }

 private:
  std::string bytes_;
};

class BinaryReader {
 public:
  BinaryReader(std::string_view bytes, std::string module)
      : bytes_(bytes), module_(std::move(module)) {}

  void expect_magic(std::string_view m) {
    if (bytes_.substr(0, m.size()) != m) {
      throw Error(module_, "bad magic header, expected " + std::string(m));
    }
    pos_ = m.size();
  }

  template <typename T>
    requires std::is_arithmetic_v<T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string get_string() {
    auto n = get<std::uint64_t>();
    need(n);
    std::string s(bytes_.substr(pos_, n));
    pos_ += n;
    return s;
  }

  std::vector<double> get_doubles() {
    auto n = get<std::uint64_t>();
    need(n * sizeof(double));
    std::vector<double> out(n);
    std::memcpy(out.data(), bytes_.data() + pos_, n * sizeof(double));
    pos_ += n * sizeof(double);
    return out;
  }

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw Error(module_, "truncated file");
  }

  std::string_view bytes_;
  std::string module_;
  std::size_t pos_ = 0;
};

std::string read_file_bytes(const std::string& path, const std::string& module);
void write_file_bytes(const std::string& path, const std::string& bytes,
                      const std::string& module);

}  // namespace scramble
