#pragma once

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "pgprec/rng.hpp"
#include "pgprec/tensor.hpp"

namespace testutil {

inline pgprec::Tensor random_tensor(int rows, int cols, std::uint64_t seed,
                                    double lo = -1.0, double hi = 1.0) {
  pgprec::SplitRng rng(seed);
  pgprec::Tensor t(rows, cols);
  for (double& v : t.values()) v = rng.next_double(lo, hi);
  return t;
}

// Unique scratch directory under the system temp root, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            (tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::vector<unsigned char> tensor_bytes(const pgprec::Tensor& t) {
  const auto* begin = reinterpret_cast<const unsigned char*>(t.data());
  return {begin, begin + t.size() * sizeof(double)};
}

inline std::string read_file(const std::filesystem::path& path) {
  std::FILE* f = std::fopen(path.string().c_str(), "rb");
  if (f == nullptr) return "<missing>";
  std::string contents;
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof(buf), f)) > 0) contents.append(buf, n);
  std::fclose(f);
  return contents;
}

inline void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  std::fwrite(contents.data(), 1, contents.size(), f);
  std::fclose(f);
}

}  // namespace testutil
