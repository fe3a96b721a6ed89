#ifndef TWEETVEC_CHECKPOINT_H_
#define TWEETVEC_CHECKPOINT_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "tweetvec/params.h"

namespace tweetvec {

// 16 hex digits of the 64-bit FNV-1a hash of `text`.
std::string config_hash(std::string_view text);

struct CheckpointMeta {
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string config_json;
  bool operator==(const CheckpointMeta&) const = default;
};

struct Checkpoint {
  ParameterStore store;
  AdamState adam;
  CheckpointMeta meta;
};

// Binary layout, little-endian:
//   "TLE1" | u32 version | u64 seed | str hash | str config json
//   | 6 x u64 shape (vocab, tweets, users, dim, C_W, C_T)
//   | 7 parameter matrices in Table order
//   | f64 lr, beta1, beta2, epsilon | u64 step | 7 first moments | 7 second moments
//   | u32 CRC32 of every preceding byte
// Strings are u32 length + bytes; matrices are u64 rows, u64 cols, f64 data.
void save_checkpoint(const std::string& path, const ParameterStore& store, const AdamState& adam,
                     const CheckpointMeta& meta);

// Throws DataError on a missing, truncated or corrupt file; nothing is
// returned in that case. A config hash different from `expected_hash`
// (when non-empty) only writes a warning to `warn`.
Checkpoint load_checkpoint(const std::string& path, std::string_view expected_hash = {},
                           std::ostream* warn = nullptr);

// `<count> <dim>` then `<id> v1 ... vn` per row, 6 significant digits.
void export_embeddings(const Matrix& table, const std::vector<std::string>& ids,
                       const std::string& path);
void write_embeddings(const Matrix& table, const std::vector<std::string>& ids, std::ostream& out);

struct EmbeddingFile {
  std::size_t dim = 0;
  std::vector<std::string> ids;
  Matrix vectors;
};
EmbeddingFile read_embeddings(std::istream& in);

}  // namespace tweetvec

#endif  // TWEETVEC_CHECKPOINT_H_
