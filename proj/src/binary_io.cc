#include "scramble/binary_io.h"

#include <fstream>
#include <sstream>

namespace scramble {

std::string read_file_bytes(const std::string& path, const std::string& module) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(module, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_bytes(const std::string& path, const std::string& bytes,
                      const std::string& module) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(module, "cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(module, "write failed for " + path);
}

}  // namespace scramble
