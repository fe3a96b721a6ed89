#include "tweetvec/checkpoint.h"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <ostream>
#include <sstream>

#include "tweetvec/errors.h"

namespace tweetvec {

namespace {

constexpr char kMagic[4] = {'T', 'L', 'E', '1'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    buf_.append(static_cast<const char*>(p), n);
  }
  void u32(std::uint32_t v) { le(v); }
  void u64(std::uint64_t v) { le(v); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  void matrix(const Matrix& m) {
    u64(m.rows());
    u64(m.cols());
    for (double x : m.data()) f64(x);
  }
  std::string& buffer() { return buf_; }

 private:
  template <typename T>
  void le(T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  void bytes(void* out, std::size_t n) {
    need(n);
    std::memcpy(out, data_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t u32() { return le<std::uint32_t>(); }
  std::uint64_t u64() { return le<std::uint64_t>(); }
  double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }
  std::string str() {
    const auto n = u32();
    need(n);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  Matrix matrix(std::size_t rows, std::size_t cols) {
    if (u64() != rows || u64() != cols) throw DataError("checkpoint: matrix shape does not match header");
    need(rows * cols * 8);
    Matrix m(rows, cols);
    for (double& x : m.data()) x = f64();
    return m;
  }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw DataError("checkpoint: unexpected end of data");
  }
  template <typename T>
  T le() {
    need(sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<T>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return v;
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(std::string_view data) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(data.size())));
}

}  // namespace

std::string config_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

void save_checkpoint(const std::string& path, const ParameterStore& store, const AdamState& adam,
                     const CheckpointMeta& meta) {
  Writer w;
  w.bytes(kMagic, 4);
  w.u32(kVersion);
  w.u64(meta.seed);
  w.str(meta.config_hash);
  w.str(meta.config_json);
  const auto& s = store.shape();
  for (auto v : {s.vocab, s.tweets, s.users, s.dim, s.word_window, s.temporal_window}) w.u64(v);
  for (std::size_t i = 0; i < kTableCount; ++i) w.matrix(store.table(static_cast<Table>(i)));
  w.f64(adam.config.lr);
  w.f64(adam.config.beta1);
  w.f64(adam.config.beta2);
  w.f64(adam.config.epsilon);
  w.u64(adam.step);
  for (const auto& m : adam.first) w.matrix(m);
  for (const auto& m : adam.second) w.matrix(m);
  w.u32(crc_of(w.buffer()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write checkpoint '" + path + "'");
  out.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
  if (!out) throw DataError("failed writing checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path, std::string_view expected_hash, std::ostream* warn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path + "'");
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (data.size() < 8 || std::memcmp(data.data(), kMagic, 4) != 0) {
    throw DataError("checkpoint '" + path + "': bad magic or truncated file");
  }
  const std::string_view body(data.data(), data.size() - 4);
  Reader tail(std::string_view(data).substr(data.size() - 4));
  if (tail.u32() != crc_of(body)) {
    throw DataError("checkpoint '" + path + "': CRC32 checksum mismatch (corrupt or truncated)");
  }

  Reader r(body);
  char magic[4];
  r.bytes(magic, 4);
  if (const auto v = r.u32(); v != kVersion) {
    throw DataError("checkpoint '" + path + "': unsupported version " + std::to_string(v));
  }
  Checkpoint cp;
  cp.meta.seed = r.u64();
  cp.meta.config_hash = r.str();
  cp.meta.config_json = r.str();
  ModelShape shape;
  shape.vocab = r.u64();
  shape.tweets = r.u64();
  shape.users = r.u64();
  shape.dim = r.u64();
  shape.word_window = r.u64();
  shape.temporal_window = r.u64();
  cp.store = ParameterStore::zeros(shape);
  for (std::size_t i = 0; i < kTableCount; ++i) {
    auto& m = cp.store.table(static_cast<Table>(i));
    m = r.matrix(m.rows(), m.cols());
  }
  cp.adam = AdamState::for_store(cp.store);
  cp.adam.config.lr = r.f64();
  cp.adam.config.beta1 = r.f64();
  cp.adam.config.beta2 = r.f64();
  cp.adam.config.epsilon = r.f64();
  cp.adam.step = r.u64();
  for (auto& m : cp.adam.first) m = r.matrix(m.rows(), m.cols());
  for (auto& m : cp.adam.second) m = r.matrix(m.rows(), m.cols());
  if (r.remaining() != 0) throw DataError("checkpoint '" + path + "': trailing bytes");

  if (!expected_hash.empty() && expected_hash != cp.meta.config_hash && warn) {
    *warn << "warning: checkpoint '" << path << "' was written with config hash "
          << cp.meta.config_hash << ", expected " << expected_hash << "\n";
  }
  return cp;
}

void write_embeddings(const Matrix& table, const std::vector<std::string>& ids, std::ostream& out) {
  out << table.rows() << ' ' << table.cols() << '\n';
  out << std::setprecision(6);
  for (std::size_t r = 0; r < table.rows(); ++r) {
    out << ids[r];
    for (double x : table.row(r)) out << ' ' << x;
    out << '\n';
  }
}

void export_embeddings(const Matrix& table, const std::vector<std::string>& ids,
                       const std::string& path) {
  if (ids.size() != table.rows()) throw std::invalid_argument("export_embeddings: id count != row count");
  std::ofstream out(path);
  if (!out) throw DataError("cannot write embeddings '" + path + "'");
  write_embeddings(table, ids, out);
}

EmbeddingFile read_embeddings(std::istream& in) {
  EmbeddingFile f;
  std::size_t count = 0;
  if (!(in >> count >> f.dim)) throw DataError("embedding file: missing '<count> <dim>' header");
  f.vectors = Matrix(count, f.dim);
  for (std::size_t r = 0; r < count; ++r) {
    std::string id;
    if (!(in >> id)) throw DataError("embedding file: expected " + std::to_string(count) + " rows");
    for (double& x : f.vectors.row(r)) {
      if (!(in >> x)) throw DataError("embedding file: short row for '" + id + "'");
    }
    f.ids.push_back(std::move(id));
  }
  return f;
}

}  // namespace tweetvec
