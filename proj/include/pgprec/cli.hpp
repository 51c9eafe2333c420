#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pgprec/trainer.hpp"

namespace pgprec {

// Flat key=value configuration; command-line flags override file entries.
struct RunOptions {
  std::map<std::string, std::string> values;

  static RunOptions from_file(const std::filesystem::path& path);
  void set(const std::string& key, const std::string& value) { values[key] = value; }
  bool has(const std::string& key) const { return values.count(key) > 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;

  TrainConfig train_config() const;
  SyntheticConfig synth_config() const;
};

// SHA-256 of a file's bytes, hex-encoded; used for manifest input digests.
std::string file_digest(const std::filesystem::path& path);

// Exit codes: 0 success, 2 usage/config, 3 checkpoint mismatch, 4 data
// error, 5 numeric failure.
int run_cli(int argc, const char* const* argv);

int cmd_pretrain(const RunOptions& options);
int cmd_tune(const RunOptions& options);
int cmd_eval(const RunOptions& options);
int cmd_synth(const RunOptions& options);
int cmd_params(const RunOptions& options);
int cmd_stats(const RunOptions& options);

}  // namespace pgprec
