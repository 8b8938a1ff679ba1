#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "bits.hpp"
#include "delta.hpp"
#include "entropy.hpp"
#include "error.hpp"
#include "modes.hpp"
#include "types.hpp"

namespace numcodec {

inline constexpr uint8_t kFormatVersion = 1;

// ---------------------------------------------------------------------------
// Chunk metadata
// ---------------------------------------------------------------------------
//
// Bit layout (LSB-first):
//   kind tag      3 bits
//   mode tag      3 bits
//   mode params   IntMult: B bits (m); FloatMult: B bits (base as IEEE bits
//                 of the chunk's float type); FloatQuant: 6 bits (k)
//   delta tag     2 bits
//   delta params  Consecutive: 3 bits (order); Lookback: 8 bits (window - 1)
//   per latent variable:
//     ans size_log  4 bits
//     bin count     16 bits
//     per bin: lower bound (B bits), offset width (7 bits),
//              ans weight - 1 (size_log bits), lowers strictly increasing

struct SerializedBin {
  uint64_t lower = 0;
  uint8_t offset_bits = 0;
  uint32_t weight = 0;

  friend bool operator==(const SerializedBin&, const SerializedBin&) = default;
};

struct VarMeta {
  uint8_t ans_size_log = 0;
  std::vector<SerializedBin> bins;

  friend bool operator==(const VarMeta&, const VarMeta&) = default;
};

struct ChunkMeta {
  NumberKind kind = NumberKind::U64;
  Mode mode;
  DeltaEncoding delta;
  std::vector<VarMeta> vars;

  int expected_var_count() const {
    return mode.latent_var_count() + (delta.has_extra_var() ? 1 : 0);
  }

  friend bool operator==(const ChunkMeta&, const ChunkMeta&) = default;
};

// Exact serialized width of one bin record; the DP's M term.
constexpr double bin_record_bits(int number_bits, int ans_size_log) {
  return double(number_bits + 7 + ans_size_log);
}

inline void write_chunk_meta(BitWriter& w, const ChunkMeta& meta) {
  int B = kind_bit_width(meta.kind);
  w.write_bits(uint64_t(meta.kind), 3);
  w.write_bits(uint64_t(meta.mode.tag), 3);
  switch (meta.mode.tag) {
    case Mode::Tag::Classic:
      break;
    case Mode::Tag::IntMult:
      w.write_bits(meta.mode.mult, unsigned(B));
      break;
    case Mode::Tag::FloatMult:
      if (B == 32)
        w.write_bits(std::bit_cast<uint32_t>(float(meta.mode.base)), 32);
      else
        w.write_bits(std::bit_cast<uint64_t>(meta.mode.base), 64);
      break;
    case Mode::Tag::FloatQuant:
      w.write_bits(meta.mode.quant_bits, 6);
      break;
  }
  w.write_bits(uint64_t(meta.delta.tag), 2);
  if (meta.delta.tag == DeltaEncoding::Tag::Consecutive)
    w.write_bits(meta.delta.order, 3);
  else if (meta.delta.tag == DeltaEncoding::Tag::Lookback)
    w.write_bits(uint64_t(meta.delta.window) - 1, 8);

  for (const auto& var : meta.vars) {
    w.write_bits(var.ans_size_log, 4);
    w.write_bits(var.bins.size(), 16);
    for (const auto& bin : var.bins) {
      w.write_bits(bin.lower, unsigned(B));
      w.write_bits(bin.offset_bits, 7);
      w.write_bits(uint64_t(bin.weight) - 1, var.ans_size_log);
    }
  }
}

inline std::vector<uint8_t> serialize_chunk_meta(const ChunkMeta& meta) {
  BitWriter w;
  write_chunk_meta(w, meta);
  return w.take_bytes();
}

inline ChunkMeta parse_chunk_meta(std::span<const uint8_t> bytes) {
  BitReader r(bytes, BitstreamKind::Metadata);
  ChunkMeta meta;

  uint64_t kind_tag = r.read_bits(3);
  if (kind_tag >= kNumberKindCount)
    throw CorruptMetadata("unknown number kind tag");
  meta.kind = NumberKind(kind_tag);
  int B = kind_bit_width(meta.kind);

  uint64_t mode_tag = r.read_bits(3);
  switch (mode_tag) {
    case uint64_t(Mode::Tag::Classic):
      meta.mode = Mode::classic();
      break;
    case uint64_t(Mode::Tag::IntMult): {
      if (!kind_is_int(meta.kind))
        throw CorruptMetadata("IntMult mode on a float kind");
      uint64_t m = r.read_bits(unsigned(B));
      if (m < 2) throw CorruptMetadata("IntMult multiplier below 2");
      meta.mode = Mode::int_mult(m);
      break;
    }
    case uint64_t(Mode::Tag::FloatMult): {
      if (!kind_is_float(meta.kind))
        throw CorruptMetadata("FloatMult mode on an integer kind");
      double base = B == 32
                        ? double(std::bit_cast<float>(uint32_t(r.read_bits(32))))
                        : std::bit_cast<double>(r.read_bits(64));
      if (!std::isfinite(base) || base == 0.0)
        throw CorruptMetadata("FloatMult base not finite and nonzero");
      meta.mode = Mode::float_mult(base);
      break;
    }
    case uint64_t(Mode::Tag::FloatQuant): {
      if (!kind_is_float(meta.kind))
        throw CorruptMetadata("FloatQuant mode on an integer kind");
      uint64_t k = r.read_bits(6);
      if (k < 1 || int(k) >= mantissa_bits(meta.kind))
        throw CorruptMetadata("FloatQuant bit count out of range");
      meta.mode = Mode::float_quant(uint8_t(k));
      break;
    }
    default:
      throw CorruptMetadata("unknown mode tag");
  }

  uint64_t delta_tag = r.read_bits(2);
  switch (delta_tag) {
    case uint64_t(DeltaEncoding::Tag::None):
      meta.delta = DeltaEncoding::none();
      break;
    case uint64_t(DeltaEncoding::Tag::Consecutive): {
      uint64_t order = r.read_bits(3);
      if (order < 1 || order > kMaxConsecutiveOrder)
        throw CorruptMetadata("consecutive delta order out of range");
      meta.delta = DeltaEncoding::consecutive(uint8_t(order));
      break;
    }
    case uint64_t(DeltaEncoding::Tag::Lookback): {
      uint64_t window = r.read_bits(8) + 1;
      if (window < kMinLookbackWindow)
        throw CorruptMetadata("lookback window out of range");
      meta.delta = DeltaEncoding::lookback(uint16_t(window));
      break;
    }
    default:
      throw CorruptMetadata("unknown delta tag");
  }

  int nvars = meta.expected_var_count();
  meta.vars.resize(nvars);
  for (auto& var : meta.vars) {
    uint64_t size_log = r.read_bits(4);
    if (size_log < kMinSizeLog || size_log > kMaxSizeLog)
      throw CorruptMetadata("ans size_log out of range");
    var.ans_size_log = uint8_t(size_log);

    uint64_t bin_count = r.read_bits(16);
    if (bin_count == 0) throw CorruptMetadata("variable with zero bins");
    if (bin_count > (uint64_t(1) << size_log))
      throw CorruptMetadata("more bins than ans table slots");

    var.bins.resize(bin_count);
    uint64_t weight_sum = 0;
    for (size_t i = 0; i < bin_count; ++i) {
      auto& bin = var.bins[i];
      bin.lower = r.read_bits(unsigned(B));
      uint64_t ob = r.read_bits(7);
      if (ob > uint64_t(B)) throw CorruptMetadata("offset width exceeds kind");
      bin.offset_bits = uint8_t(ob);
      bin.weight = uint32_t(r.read_bits(unsigned(size_log))) + 1;
      weight_sum += bin.weight;
      if (i > 0 && var.bins[i].lower <= var.bins[i - 1].lower)
        throw CorruptMetadata("bin lower bounds not strictly increasing");
    }
    if (weight_sum != (uint64_t(1) << size_log))
      throw CorruptMetadata("ans weights do not sum to the table size");
  }
  return meta;
}

// ---------------------------------------------------------------------------
// Page metadata
// ---------------------------------------------------------------------------
//
// Bit layout (LSB-first):
//   per latent variable: 4 ans states, size_log bits each, biased by
//                        -2^size_log
//   delta resume state: one value of B bits per entry (order values for
//                       Consecutive, window values for Lookback)
//   batch count   16 bits
//   batch payloads: per batch, per variable: tANS code bits then offsets

struct PageMeta {
  std::vector<std::array<uint32_t, kAnsLanes>> ans_states;  // per var
  std::vector<uint64_t> delta_state;
  uint16_t batch_count = 0;

  friend bool operator==(const PageMeta&, const PageMeta&) = default;
};

inline void write_page_meta(BitWriter& w, const PageMeta& page,
                            const ChunkMeta& chunk) {
  for (size_t v = 0; v < chunk.vars.size(); ++v) {
    uint32_t lo = uint32_t(1) << chunk.vars[v].ans_size_log;
    for (uint32_t s : page.ans_states[v])
      w.write_bits(s - lo, chunk.vars[v].ans_size_log);
  }
  int B = kind_bit_width(chunk.kind);
  for (uint64_t v : page.delta_state) w.write_bits(v, unsigned(B));
  w.write_bits(page.batch_count, 16);
}

inline PageMeta parse_page_meta(BitReader& r, const ChunkMeta& chunk) {
  PageMeta page;
  page.ans_states.resize(chunk.vars.size());
  for (size_t v = 0; v < chunk.vars.size(); ++v) {
    uint32_t lo = uint32_t(1) << chunk.vars[v].ans_size_log;
    for (auto& s : page.ans_states[v])
      s = uint32_t(r.read_bits(chunk.vars[v].ans_size_log)) + lo;
  }
  int B = kind_bit_width(chunk.kind);
  page.delta_state.resize(chunk.delta.state_size());
  for (auto& v : page.delta_state) v = r.read_bits(unsigned(B));
  page.batch_count = uint16_t(r.read_bits(16));
  return page;
}

// ---------------------------------------------------------------------------
// Standalone container
// ---------------------------------------------------------------------------
//
//   version       1 byte
//   chunk count   u32 LE
//   per chunk:
//     meta length   u32 LE
//     meta bytes
//     page count    u16 LE
//     per page:
//       page length   u32 LE
//       number count  u32 LE
//       page bytes

struct ContainerChunk {
  std::vector<uint8_t> meta;
  std::vector<std::vector<uint8_t>> pages;
  std::vector<uint32_t> page_counts;  // numbers per page
};

struct Container {
  std::vector<ContainerChunk> chunks;
};

namespace detail {

inline void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(uint8_t(v));
  out.push_back(uint8_t(v >> 8));
}

inline void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(uint8_t(v >> (8 * i)));
}

class ByteCursor {
 public:
  explicit ByteCursor(std::span<const uint8_t> data) : data_(data) {}

  uint8_t u8() { return take(1)[0]; }
  uint16_t u16() {
    auto b = take(2);
    return uint16_t(b[0]) | uint16_t(b[1]) << 8;
  }
  uint32_t u32() {
    auto b = take(4);
    return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 |
           uint32_t(b[3]) << 24;
  }
  std::span<const uint8_t> take(size_t n) {
    if (data_.size() - at_ < n)
      throw CorruptMetadata("container ended early");
    auto s = data_.subspan(at_, n);
    at_ += n;
    return s;
  }
  bool done() const { return at_ == data_.size(); }

 private:
  std::span<const uint8_t> data_;
  size_t at_ = 0;
};

}  // namespace detail

inline std::vector<uint8_t> serialize_container(const Container& c) {
  std::vector<uint8_t> out;
  out.push_back(kFormatVersion);
  detail::put_u32(out, uint32_t(c.chunks.size()));
  for (const auto& chunk : c.chunks) {
    detail::put_u32(out, uint32_t(chunk.meta.size()));
    out.insert(out.end(), chunk.meta.begin(), chunk.meta.end());
    detail::put_u16(out, uint16_t(chunk.pages.size()));
    for (size_t p = 0; p < chunk.pages.size(); ++p) {
      detail::put_u32(out, uint32_t(chunk.pages[p].size()));
      detail::put_u32(out, chunk.page_counts[p]);
      out.insert(out.end(), chunk.pages[p].begin(), chunk.pages[p].end());
    }
  }
  return out;
}

inline Container parse_container(std::span<const uint8_t> bytes) {
  detail::ByteCursor cur(bytes);
  uint8_t version = cur.u8();
  if (version > kFormatVersion)
    throw UnsupportedVersion("container version " + std::to_string(version) +
                             " is newer than this build supports");
  Container c;
  uint32_t nchunks = cur.u32();
  for (uint32_t i = 0; i < nchunks; ++i) {
    ContainerChunk chunk;
    uint32_t meta_len = cur.u32();
    auto meta = cur.take(meta_len);
    chunk.meta.assign(meta.begin(), meta.end());
    uint16_t npages = cur.u16();
    chunk.pages.reserve(npages);
    chunk.page_counts.reserve(npages);
    for (uint16_t p = 0; p < npages; ++p) {
      uint32_t page_len = cur.u32();
      uint32_t count = cur.u32();
      std::span<const uint8_t> page;
      try {
        page = cur.take(page_len);
      } catch (const CorruptMetadata&) {
        throw CorruptPage("page ended early");
      }
      chunk.pages.emplace_back(page.begin(), page.end());
      chunk.page_counts.push_back(count);
    }
    c.chunks.push_back(std::move(chunk));
  }
  if (!cur.done()) throw CorruptMetadata("trailing bytes after container");
  return c;
}

}  // namespace numcodec
