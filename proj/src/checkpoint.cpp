#include "pgprec/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "pgprec/errors.hpp"

namespace pgprec {

namespace {

constexpr char kMagic[4] = {'P', 'G', 'P', 'R'};

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path)
      : out_(path, std::ios::binary), path_(path.string()) {
    if (!out_) throw ConfigError("cannot write checkpoint: " + path_);
  }

  void u8(std::uint8_t v) { raw(&v, 1); }
  void u32(std::uint32_t v) {
    std::uint8_t b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    raw(b, 4);
  }
  void u64(std::uint64_t v) {
    std::uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
    raw(b, 8);
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void tensor(const Tensor& t) {
    for (double v : t.values()) f64(v);
  }
  void close() {
    out_.close();
    if (!out_) throw ConfigError("failed to flush checkpoint: " + path_);
  }

 private:
  void raw(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  }
  std::ofstream out_;
  std::string path_;
};

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path)
      : in_(path, std::ios::binary), path_(path.string()) {
    if (!in_) throw CheckpointError("cannot open checkpoint: " + path_);
  }

  std::uint8_t u8() {
    std::uint8_t v;
    raw(&v, 1);
    return v;
  }
  std::uint32_t u32() {
    std::uint8_t b[4];
    raw(b, 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    std::uint8_t b[8];
    raw(b, 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  Tensor tensor(int rows, int cols) {
    Tensor t(rows, cols);
    for (double& v : t.values()) v = f64();
    return t;
  }

 private:
  void raw(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (in_.gcount() != static_cast<std::streamsize>(n)) {
      throw CheckpointError("truncated checkpoint: " + path_);
    }
  }
  std::ifstream in_;
  std::string path_;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  Writer w(path);
  const EncoderParams& p = checkpoint.params;
  for (char c : kMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(checkpoint.version);
  w.u32(static_cast<std::uint32_t>(p.dim()));
  w.u32(static_cast<std::uint32_t>(p.n_layers()));
  w.u32(static_cast<std::uint32_t>(p.n_users()));
  w.u32(static_cast<std::uint32_t>(p.n_items()));
  w.tensor(p.user_embeddings);
  w.tensor(p.item_embeddings);
  for (const auto& layer : p.layers) {
    w.tensor(layer.w_query);
    w.tensor(layer.w_key);
    w.tensor(layer.w_value);
    w.tensor(layer.w_self);
  }
  w.u8(checkpoint.prompts.has_value() ? 1 : 0);
  if (checkpoint.prompts) {
    const PromptSet& prompts = *checkpoint.prompts;
    w.u32(static_cast<std::uint32_t>(prompts.hard.size()));
    for (const auto& ids : prompts.hard) {
      w.u32(static_cast<std::uint32_t>(ids.size()));
      for (int id : ids) w.u32(static_cast<std::uint32_t>(id));
    }
    w.u32(static_cast<std::uint32_t>(prompts.hard_item_ids.size()));
    for (int id : prompts.hard_item_ids) w.u32(static_cast<std::uint32_t>(id));
    w.tensor(prompts.hard_embeddings);
    w.u32(static_cast<std::uint32_t>(prompts.soft_embeddings.rows()));
    w.tensor(prompts.soft_embeddings);
    w.tensor(prompts.p_value);
  }
  w.u64(checkpoint.seed);
  w.u32(checkpoint.epoch);
  w.f64(checkpoint.best_metric);
  w.close();
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  Reader r(path);
  char magic[4];
  for (char& c : magic) c = static_cast<char>(r.u8());
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw CheckpointError("bad checkpoint magic in " + path.string());
  }
  Checkpoint checkpoint;
  checkpoint.version = r.u32();
  if (checkpoint.version != 1) {
    throw CheckpointError("unsupported checkpoint version " +
                          std::to_string(checkpoint.version));
  }
  const int d = static_cast<int>(r.u32());
  const int n_layers = static_cast<int>(r.u32());
  const int n_users = static_cast<int>(r.u32());
  const int n_items = static_cast<int>(r.u32());
  if (d < 1 || n_layers < 0 || n_users < 1 || n_items < 1) {
    throw CheckpointError("implausible checkpoint dimensions in " + path.string());
  }
  EncoderParams& p = checkpoint.params;
  p.user_embeddings = r.tensor(n_users, d);
  p.item_embeddings = r.tensor(n_items, d);
  p.layers.resize(n_layers);
  for (auto& layer : p.layers) {
    layer.w_query = r.tensor(d, d);
    layer.w_key = r.tensor(d, d);
    layer.w_value = r.tensor(d, d);
    layer.w_self = r.tensor(d, d);
  }
  p.trainable = EncoderMask::all(n_layers, true);
  if (r.u8() != 0) {
    PromptSet prompts;
    const int prompt_users = static_cast<int>(r.u32());
    prompts.hard.resize(prompt_users);
    for (auto& ids : prompts.hard) {
      const int count = static_cast<int>(r.u32());
      ids.resize(count);
      for (int& id : ids) id = static_cast<int>(r.u32());
    }
    const int n_distinct = static_cast<int>(r.u32());
    prompts.hard_item_ids.resize(n_distinct);
    for (int& id : prompts.hard_item_ids) id = static_cast<int>(r.u32());
    for (int i = 0; i < n_distinct; ++i) {
      prompts.hard_row.emplace(prompts.hard_item_ids[i], i);
    }
    prompts.hard_embeddings = r.tensor(n_distinct, d);
    const int m_soft = static_cast<int>(r.u32());
    prompts.soft_embeddings = r.tensor(m_soft, d);
    prompts.p_value = r.tensor(d, d);
    checkpoint.prompts = std::move(prompts);
  }
  checkpoint.seed = r.u64();
  checkpoint.epoch = r.u32();
  checkpoint.best_metric = r.f64();
  return checkpoint;
}

}  // namespace pgprec
