#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "pgprec/encoder.hpp"
#include "pgprec/prompts.hpp"

namespace pgprec {

// Binary model snapshot. Layout (little-endian):
//   magic "PGPR", u32 version, u32 d, u32 n_layers, u32 n_users, u32 n_items,
//   tensors as f64 row-major in declared order (user embeddings, item
//   embeddings, then per layer w_query, w_key, w_value, w_self),
//   u8 prompt flag and, when set, the prompt section (per-user id lists with
//   fixed-width u32 ids, the distinct hard id index, hard/soft embedding
//   tables, and the prompt value matrix), then u64 seed, u32 epoch reached,
//   f64 best validation metric.
// Round-trips are bit-exact; the trainable mask is runtime state and is not
// stored.
struct Checkpoint {
  std::uint32_t version = 1;
  EncoderParams params;
  std::optional<PromptSet> prompts;
  std::uint64_t seed = 0;
  std::uint32_t epoch = 0;
  double best_metric = 0.0;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace pgprec
