// Binary checkpoint format (little-endian):
//   magic "PCGEN", u32 version,
//   u32 config_len + key=value text,
//   u32 extra_count + named f64 arrays (GMM prior parameters),
//   i64 epoch, RNG state (4xu64 words, u8 has_spare, f64 spare),
//   u32 param_count + blocks (name, dims, f64 values),
//   u32 opt_count + blocks (name, i64 step, f64 m[], f64 v[]),
//   u32 CRC-32 (polynomial 0xEDB88320) over all preceding bytes.
#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "pcgen/config_kv.hpp"
#include "pcgen/errors.hpp"
#include "pcgen/training.hpp"

namespace pcgen {

namespace {

constexpr char kMagic[5] = {'P', 'C', 'G', 'E', 'N'};
constexpr std::uint32_t kVersion = 1;

std::uint32_t crc32_bytes(const std::uint8_t* data, std::size_t n) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) {
        c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      }
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t crc = 0xFFFFFFFFu;
  for (std::size_t i = 0; i < n; ++i) {
    crc = table[(crc ^ data[i]) & 0xFFu] ^ (crc >> 8);
  }
  return crc ^ 0xFFFFFFFFu;
}

struct ByteWriter {
  std::vector<std::uint8_t> buf;

  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf.insert(buf.end(), b, b + n);
  }
  void u8(std::uint8_t v) { buf.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
      buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    u64(bits);
  }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  void f64_array(const std::vector<double>& v) {
    u64(v.size());
    for (double d : v) {
      f64(d);
    }
  }
};

struct ByteReader {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > size) {
      throw io_error("checkpoint: truncated file");
    }
  }
  void raw(void* p, std::size_t n) {
    need(n);
    std::memcpy(p, data + pos, n);
    pos += n;
  }
  std::uint8_t u8() {
    need(1);
    return data[pos++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(data[pos + i]) << (8 * i);
    }
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(data[pos + i]) << (8 * i);
    }
    pos += 8;
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(reinterpret_cast<const char*>(data + pos), n);
    pos += n;
    return s;
  }
  std::vector<double> f64_array() {
    const std::uint64_t n = u64();
    if (n > size / 8) {
      throw io_error("checkpoint: truncated file");
    }
    std::vector<double> v(static_cast<std::size_t>(n));
    for (double& d : v) {
      d = f64();
    }
    return v;
  }
};

}  // namespace

void checkpoint_save(const ModelBundle& bundle, const std::string& path) {
  // Serialization only reads parameters; params() is non-const because the
  // tape takes mutable references.
  ModelBundle& b = const_cast<ModelBundle&>(bundle);

  ByteWriter w;
  w.raw(kMagic, sizeof(kMagic));
  w.u32(kVersion);

  const std::string cfg_text = serialize_kv(train_config_to_kv(b.config));
  w.str(cfg_text);

  std::map<std::string, const std::vector<double>*> extras;
  if (b.config.prior.kind == PriorSpec::Kind::gmm) {
    extras["prior.means"] = &b.config.prior.means;
    extras["prior.diag_stds"] = &b.config.prior.diag_stds;
    extras["prior.weights"] = &b.config.prior.weights;
  }
  w.u32(static_cast<std::uint32_t>(extras.size()));
  for (const auto& [name, arr] : extras) {
    w.str(name);
    w.f64_array(*arr);
  }

  w.i64(b.epoch);
  const Rng::State rs = b.rng.save();
  for (std::uint64_t word : rs.words) {
    w.u64(word);
  }
  w.u8(rs.has_spare ? 1 : 0);
  w.f64(rs.spare);

  const std::vector<Param*> params = b.trainable_params();
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const Param* p : params) {
    w.str(p->name);
    w.u32(static_cast<std::uint32_t>(p->shape.size()));
    for (int d : p->shape) {
      w.u32(static_cast<std::uint32_t>(d));
    }
    w.f64_array(p->value);
  }

  w.u32(static_cast<std::uint32_t>(b.opt.size()));
  for (const auto& [name, state] : b.opt) {
    w.str(name);
    w.i64(state.step);
    w.f64_array(state.m);
    w.f64_array(state.v);
  }

  w.u32(crc32_bytes(w.buf.data(), w.buf.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw io_error("checkpoint: cannot open '" + path + "' for writing");
  }
  out.write(reinterpret_cast<const char*>(w.buf.data()),
            static_cast<std::streamsize>(w.buf.size()));
  if (!out) {
    throw io_error("checkpoint: write failed for '" + path + "'");
  }
}

ModelBundle checkpoint_load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw io_error("checkpoint: cannot open '" + path + "'");
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw io_error("checkpoint: read failed for '" + path + "'");
  }
  if (bytes.size() < sizeof(kMagic) + 4 + 4) {
    throw io_error("checkpoint: file too short: '" + path + "'");
  }

  // Verify the checksum before trusting any field.
  std::uint32_t stored = 0;
  for (int i = 0; i < 4; ++i) {
    stored |= static_cast<std::uint32_t>(bytes[bytes.size() - 4 + i]) << (8 * i);
  }
  if (crc32_bytes(bytes.data(), bytes.size() - 4) != stored) {
    throw io_error("checkpoint: checksum mismatch in '" + path + "'");
  }

  ByteReader r{bytes.data(), bytes.size() - 4};
  char magic[sizeof(kMagic)];
  r.raw(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw io_error("checkpoint: bad magic in '" + path + "'");
  }
  if (r.u32() != kVersion) {
    throw io_error("checkpoint: unsupported version in '" + path + "'");
  }

  TrainConfig config = train_config_from_kv(parse_kv_text(r.str()));

  const std::uint32_t n_extra = r.u32();
  for (std::uint32_t i = 0; i < n_extra; ++i) {
    const std::string name = r.str();
    std::vector<double> arr = r.f64_array();
    if (name == "prior.means") {
      config.prior.means = std::move(arr);
    } else if (name == "prior.diag_stds") {
      config.prior.diag_stds = std::move(arr);
    } else if (name == "prior.weights") {
      config.prior.weights = std::move(arr);
    } else {
      throw io_error("checkpoint: unknown extra block '" + name + "'");
    }
  }

  ModelBundle bundle = make_bundle(config);

  bundle.epoch = static_cast<int>(r.i64());
  Rng::State rs;
  for (std::uint64_t& word : rs.words) {
    word = r.u64();
  }
  rs.has_spare = r.u8() != 0;
  rs.spare = r.f64();
  bundle.rng.restore(rs);

  std::map<std::string, Param*> by_name;
  for (Param* p : bundle.trainable_params()) {
    by_name[p->name] = p;
  }

  const std::uint32_t n_params = r.u32();
  if (n_params != by_name.size()) {
    throw io_error("checkpoint: parameter count mismatch in '" + path + "'");
  }
  for (std::uint32_t i = 0; i < n_params; ++i) {
    const std::string name = r.str();
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw io_error("checkpoint: unknown parameter '" + name + "'");
    }
    const std::uint32_t ndim = r.u32();
    std::vector<int> dims(ndim);
    for (std::uint32_t d = 0; d < ndim; ++d) {
      dims[d] = static_cast<int>(r.u32());
    }
    std::vector<double> values = r.f64_array();
    Param* p = it->second;
    if (dims != p->shape || values.size() != p->value.size()) {
      throw io_error("checkpoint: shape mismatch for parameter '" + name + "'");
    }
    p->value = std::move(values);
  }

  const std::uint32_t n_opt = r.u32();
  for (std::uint32_t i = 0; i < n_opt; ++i) {
    const std::string name = r.str();
    auto it = by_name.find(name);
    if (it == by_name.end()) {
      throw io_error("checkpoint: optimizer state for unknown parameter '" +
                     name + "'");
    }
    AdamState s;
    if (name.rfind("encoder.", 0) == 0) {
      s.cfg = config.adam_enc;
    } else if (name.rfind("generator.", 0) == 0) {
      s.cfg = config.adam_gen;
    } else {
      s.cfg = config.adam_disc;
    }
    s.step = r.i64();
    s.m = r.f64_array();
    s.v = r.f64_array();
    if (s.m.size() != it->second->value.size() ||
        s.v.size() != it->second->value.size()) {
      throw io_error("checkpoint: optimizer state size mismatch for '" + name +
                     "'");
    }
    bundle.opt[name] = std::move(s);
  }

  if (r.pos != r.size) {
    throw io_error("checkpoint: trailing bytes in '" + path + "'");
  }
  return bundle;
}

}  // namespace pcgen
