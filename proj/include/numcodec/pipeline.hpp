#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <vector>

#include "binning.hpp"
#include "bits.hpp"
#include "delta.hpp"
#include "delta_detect.hpp"
#include "entropy.hpp"
#include "error.hpp"
#include "format.hpp"
#include "mode_detect.hpp"
#include "modes.hpp"
#include "types.hpp"

namespace numcodec {

inline constexpr uint32_t kMaxPagesPerChunk = 65535;
inline constexpr uint32_t kMaxBatchesPerPage = 65535;
inline constexpr uint32_t kMaxPageNumbers = kMaxBatchesPerPage * kBatchSize;
inline constexpr int kMinLevel = 0;
inline constexpr int kMaxLevel = 12;
inline constexpr int kDefaultLevel = 8;
inline constexpr uint32_t kDefaultPageSize = uint32_t(1) << 18;

struct CompressorConfig {
  int level = kDefaultLevel;
  std::optional<Mode> mode_override;
  std::optional<DeltaEncoding> delta_override;
  uint32_t page_size = kDefaultPageSize;  // numbers per page
  uint64_t seed = 0;
};

inline void validate_config(const CompressorConfig& cfg) {
  if (cfg.level < kMinLevel || cfg.level > kMaxLevel)
    throw InvalidConfig("compression level out of range");
  if (cfg.page_size < 1 || cfg.page_size > kMaxPageNumbers)
    throw InvalidConfig("page size out of range");
  if (cfg.delta_override) validate_delta(*cfg.delta_override);
}

// Bin budget: higher levels afford exponentially more bins, but never more
// than one bin per 16 numbers.
inline size_t max_bins_for(int level, size_t n) {
  size_t by_count = (n + 15) / 16;
  return std::max<size_t>(1, std::min(size_t(1) << level, by_count));
}

// ---------------------------------------------------------------------------
// Compression
// ---------------------------------------------------------------------------

template <class T>
ContainerChunk compress_chunk(std::span<const T> numbers,
                              const CompressorConfig& cfg = {}) {
  using L = latent_t<T>;
  validate_config(cfg);
  size_t n = numbers.size();
  if (n == 0) throw InvalidConfig("a chunk holds at least one number");
  if (n >= (uint64_t(1) << 32) ||
      n > uint64_t(kMaxPagesPerChunk) * cfg.page_size)
    throw InvalidConfig("too many numbers for one chunk at this page size");

  Mode mode = cfg.mode_override ? *cfg.mode_override
                                : choose_mode(numbers, cfg.seed, cfg.level);
  validate_mode(mode, kind_of<T>);
  DeltaEncoding delta = cfg.delta_override
                            ? *cfg.delta_override
                            : choose_delta_encoding(numbers, mode, cfg.seed);
  validate_delta(delta);

  LatentVars<L> latents = split(numbers, mode);

  size_t npages = (n + cfg.page_size - 1) / cfg.page_size;
  std::vector<size_t> page_starts(npages);
  for (size_t p = 0; p < npages; ++p) page_starts[p] = p * cfg.page_size;

  DeltaEncoded<L> de =
      delta_encode<L>(latents.primary, delta, page_starts);

  std::vector<std::span<const L>> streams;
  streams.push_back(de.transformed);
  if (latents.secondary) streams.push_back(*latents.secondary);
  if (delta.has_extra_var()) streams.push_back(de.extra);

  ChunkMeta meta;
  meta.kind = kind_of<T>;
  meta.mode = mode;
  meta.delta = delta;

  struct EncodedVar {
    std::vector<OptimizedBin<L>> bins;
    AnsTable table;
    std::vector<uint16_t> syms;
    std::vector<L> offsets;
  };
  std::vector<EncodedVar> vars(streams.size());
  size_t max_bins = max_bins_for(cfg.level, n);
  int B = bit_width_of<T>;

  for (size_t v = 0; v < streams.size(); ++v) {
    std::vector<L> scratch(streams[v].begin(), streams[v].end());
    auto hist = build_histogram<L>(scratch, max_bins);
    BinCostParams params{bin_record_bits(B, ans_size_log_for(hist.size())),
                         n};
    auto opt = optimize_bins<L>(hist, params);
    int size_log = ans_size_log_for(opt.bins.size());

    std::vector<uint64_t> weights;
    weights.reserve(opt.bins.size());
    for (const auto& b : opt.bins) weights.push_back(b.weight);
    AnsSpec spec = build_ans_spec(weights, size_log);

    vars[v].bins = std::move(opt.bins);
    vars[v].table = build_ans_table(spec);
    vars[v].syms.resize(n);
    vars[v].offsets.resize(n);
    assign_bins<L>(streams[v], vars[v].bins, vars[v].syms.data(),
                   vars[v].offsets.data());

    VarMeta vm;
    vm.ans_size_log = uint8_t(size_log);
    vm.bins.reserve(vars[v].bins.size());
    for (size_t k = 0; k < vars[v].bins.size(); ++k)
      vm.bins.push_back(SerializedBin{uint64_t(vars[v].bins[k].lower),
                                      vars[v].bins[k].offset_bits,
                                      spec.weights[k]});
    meta.vars.push_back(std::move(vm));
  }

  ContainerChunk out;
  out.meta = serialize_chunk_meta(meta);
  out.pages.reserve(npages);
  out.page_counts.reserve(npages);

  std::vector<AnsEncoded> encoded(vars.size());
  for (size_t p = 0; p < npages; ++p) {
    size_t lo = page_starts[p];
    size_t hi = std::min(n, lo + cfg.page_size);
    size_t count = hi - lo;
    size_t nbatches = (count + kBatchSize - 1) / kBatchSize;

    PageMeta pm;
    pm.batch_count = uint16_t(nbatches);
    pm.delta_state.assign(de.states[p].values.begin(),
                          de.states[p].values.end());
    for (size_t v = 0; v < vars.size(); ++v) {
      encoded[v] = ans_encode_reverse(
          std::span<const uint16_t>(vars[v].syms).subspan(lo, count),
          vars[v].table);
      pm.ans_states.push_back(encoded[v].decode_states);
    }

    BitWriter w;
    write_page_meta(w, pm, meta);
    for (size_t b = 0; b < nbatches; ++b) {
      size_t blo = lo + b * kBatchSize;
      size_t bhi = std::min(hi, blo + kBatchSize);
      for (size_t v = 0; v < vars.size(); ++v) {
        w.append(encoded[v].batch_bits[b]);
        for (size_t i = blo; i < bhi; ++i)
          w.write_bits(uint64_t(vars[v].offsets[i]),
                       vars[v].bins[vars[v].syms[i]].offset_bits);
      }
    }
    out.pages.push_back(w.take_bytes());
    out.page_counts.push_back(uint32_t(count));
  }
  return out;
}

template <class T>
std::vector<uint8_t> compress(std::span<const T> numbers,
                              const CompressorConfig& cfg = {}) {
  validate_config(cfg);
  Container c;
  uint64_t max_chunk = std::min(uint64_t(cfg.page_size) * kMaxPagesPerChunk,
                                (uint64_t(1) << 32) - 1);
  for (size_t at = 0; at < numbers.size();) {
    size_t take = size_t(std::min<uint64_t>(max_chunk, numbers.size() - at));
    c.chunks.push_back(compress_chunk(numbers.subspan(at, take), cfg));
    at += take;
  }
  return serialize_container(c);
}

// ---------------------------------------------------------------------------
// Decompression
// ---------------------------------------------------------------------------

// Chunk metadata with the decode tables prebuilt, shared by every page.
struct ParsedChunk {
  ChunkMeta meta;
  struct Var {
    AnsTable table;
    std::vector<uint64_t> lowers;
    std::vector<uint8_t> offset_bits;
  };
  std::vector<Var> vars;
};

inline ParsedChunk parse_chunk(std::span<const uint8_t> meta_bytes) {
  ParsedChunk chunk;
  chunk.meta = parse_chunk_meta(meta_bytes);
  chunk.vars.resize(chunk.meta.vars.size());
  for (size_t v = 0; v < chunk.meta.vars.size(); ++v) {
    const VarMeta& vm = chunk.meta.vars[v];
    AnsSpec spec;
    spec.size_log = vm.ans_size_log;
    spec.weights.reserve(vm.bins.size());
    auto& out = chunk.vars[v];
    for (const auto& bin : vm.bins) {
      spec.weights.push_back(bin.weight);
      out.lowers.push_back(bin.lower);
      out.offset_bits.push_back(bin.offset_bits);
    }
    out.table = build_ans_table(spec);
  }
  return chunk;
}

template <class T>
std::vector<T> decompress_page(const ParsedChunk& chunk,
                               std::span<const uint8_t> page_bytes,
                               uint32_t count) {
  using L = latent_t<T>;
  if (chunk.meta.kind != kind_of<T>)
    throw InvalidConfig("stream holds a different number kind");
  if (count < 1 || count > kMaxPageNumbers)
    throw CorruptPage("page number count out of range");

  BitReader r(page_bytes, BitstreamKind::Page);
  PageMeta pm = parse_page_meta(r, chunk.meta);
  if (uint64_t(pm.batch_count) * kBatchSize < count ||
      (uint64_t(pm.batch_count) - 1) * kBatchSize >= count)
    throw CorruptPage("batch count disagrees with the page number count");

  size_t nvars = chunk.vars.size();
  std::vector<AnsDecoder> ans;
  ans.reserve(nvars);
  for (size_t v = 0; v < nvars; ++v)
    ans.emplace_back(chunk.vars[v].table, pm.ans_states[v]);

  DeltaState<L> dstate;
  dstate.values.assign(pm.delta_state.begin(), pm.delta_state.end());
  DeltaDecoder<L> delta(chunk.meta.delta, std::move(dstate));

  bool has_secondary = chunk.meta.mode.latent_var_count() == 2;
  bool has_extra = chunk.meta.delta.has_extra_var();

  LatentVars<L> latents;
  latents.primary.resize(count);
  if (has_secondary) latents.secondary.emplace(count);
  std::vector<L> extra(has_extra ? count : 0);

  std::array<uint16_t, kBatchSize> syms;
  for (size_t b = 0; b < pm.batch_count; ++b) {
    size_t blo = b * kBatchSize;
    size_t bcount = std::min<size_t>(kBatchSize, count - blo);
    for (size_t v = 0; v < nvars; ++v) {
      ans[v].decode_batch(r, std::span<uint16_t>(syms.data(), bcount));
      L* dst = v == 0 ? latents.primary.data() + blo
               : v == 1 && has_secondary ? latents.secondary->data() + blo
                                         : extra.data() + blo;
      const auto& lowers = chunk.vars[v].lowers;
      const auto& obits = chunk.vars[v].offset_bits;
      for (size_t i = 0; i < bcount; ++i)
        dst[i] = L(lowers[syms[i]]) + L(r.read_bits(obits[syms[i]]));
    }
    delta.decode_batch(std::span<L>(latents.primary).subspan(blo, bcount),
                       has_extra ? std::span<const L>(extra).subspan(blo, bcount)
                                 : std::span<const L>());
  }
  if (r.bits_remaining() >= 8) throw CorruptPage("page has trailing data");

  return join<T>(latents, chunk.meta.mode);
}

template <class T>
std::vector<T> decompress(std::span<const uint8_t> bytes) {
  Container c = parse_container(bytes);
  std::vector<T> out;
  for (const auto& cc : c.chunks) {
    ParsedChunk chunk = parse_chunk(cc.meta);
    if (chunk.meta.kind != kind_of<T>)
      throw InvalidConfig("stream holds a different number kind");
    for (size_t p = 0; p < cc.pages.size(); ++p) {
      auto nums = decompress_page<T>(chunk, cc.pages[p], cc.page_counts[p]);
      out.insert(out.end(), nums.begin(), nums.end());
    }
  }
  return out;
}

// Kind recorded in the stream; empty containers carry none.
inline std::optional<NumberKind> container_kind(
    std::span<const uint8_t> bytes) {
  Container c = parse_container(bytes);
  if (c.chunks.empty()) return std::nullopt;
  return parse_chunk_meta(c.chunks.front().meta).kind;
}

// Decompresses to the raw little-endian byte image of the numbers, useful
// when the element type is only known at runtime.
inline std::pair<std::optional<NumberKind>, std::vector<uint8_t>>
decompress_bytes(std::span<const uint8_t> bytes) {
  Container c = parse_container(bytes);
  std::vector<uint8_t> raw;
  std::optional<NumberKind> kind;
  for (const auto& cc : c.chunks) {
    ParsedChunk chunk = parse_chunk(cc.meta);
    if (kind && *kind != chunk.meta.kind)
      throw CorruptMetadata("container mixes number kinds");
    kind = chunk.meta.kind;
    dispatch_kind(chunk.meta.kind, [&](auto zero) {
      using T = decltype(zero);
      for (size_t p = 0; p < cc.pages.size(); ++p) {
        auto nums = decompress_page<T>(chunk, cc.pages[p], cc.page_counts[p]);
        size_t at = raw.size();
        raw.resize(at + nums.size() * sizeof(T));
        std::memcpy(raw.data() + at, nums.data(), nums.size() * sizeof(T));
      }
    });
  }
  return {kind, std::move(raw)};
}

// ---------------------------------------------------------------------------
// Inspection
// ---------------------------------------------------------------------------

struct VarReport {
  int ans_size_log = 0;
  size_t bin_count = 0;
  double est_bits_per_number = 0.0;
};

struct ChunkReport {
  NumberKind kind = NumberKind::U64;
  Mode mode;
  DeltaEncoding delta;
  uint64_t number_count = 0;
  size_t page_count = 0;
  uint64_t payload_bytes = 0;
  uint64_t meta_bytes = 0;
  double est_bits_per_number = 0.0;
  std::vector<VarReport> vars;
};

struct ContainerReport {
  uint64_t number_count = 0;
  uint64_t total_bytes = 0;
  std::vector<ChunkReport> chunks;
};

// Expected payload bits per number for one latent variable, from the bin
// weights alone: an entropy term per symbol plus its offset width.
inline double estimate_var_bits_per_number(const VarMeta& var) {
  double total_slots = std::exp2(double(var.ans_size_log));
  double est = 0.0;
  for (const auto& bin : var.bins) {
    double p = double(bin.weight) / total_slots;
    est += p * ((double(var.ans_size_log) - std::log2(double(bin.weight))) +
                double(bin.offset_bits));
  }
  return est;
}

inline ContainerReport inspect_container(std::span<const uint8_t> bytes) {
  Container c = parse_container(bytes);
  ContainerReport report;
  report.total_bytes = bytes.size();
  for (const auto& cc : c.chunks) {
    ChunkReport cr;
    ChunkMeta meta = parse_chunk_meta(cc.meta);
    cr.kind = meta.kind;
    cr.mode = meta.mode;
    cr.delta = meta.delta;
    cr.page_count = cc.pages.size();
    cr.meta_bytes = cc.meta.size();
    for (size_t p = 0; p < cc.pages.size(); ++p) {
      cr.number_count += cc.page_counts[p];
      cr.payload_bytes += cc.pages[p].size();
    }
    for (const auto& var : meta.vars) {
      VarReport vr;
      vr.ans_size_log = var.ans_size_log;
      vr.bin_count = var.bins.size();
      vr.est_bits_per_number = estimate_var_bits_per_number(var);
      cr.est_bits_per_number += vr.est_bits_per_number;
      cr.vars.push_back(vr);
    }
    report.number_count += cr.number_count;
    report.chunks.push_back(std::move(cr));
  }
  return report;
}

}  // namespace numcodec
