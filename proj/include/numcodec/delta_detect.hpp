#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "binning.hpp"
#include "delta.hpp"
#include "entropy.hpp"
#include "mode_detect.hpp"
#include "modes.hpp"
#include "types.hpp"

namespace numcodec {

namespace detail {

// Runs in the evaluation sample are this long; delta candidates are costed
// on the tail of each run, past any transform warm-up.
inline constexpr size_t kSampleRunLength = 100;

// Delta choices live or die on neighbor correlation, so the sample keeps
// runs of consecutive numbers: about ten runs of ~100, deterministic in the
// seed.
template <class T>
std::vector<T> draw_run_sample(std::span<const T> numbers, uint64_t seed) {
  constexpr size_t kRunLen = kSampleRunLength;
  constexpr size_t kTarget = 1000;
  size_t n = numbers.size();
  std::vector<T> out;
  if (n <= kTarget) {
    out.assign(numbers.begin(), numbers.end());
    return out;
  }
  size_t runs = (kTarget + kRunLen - 1) / kRunLen;
  std::vector<size_t> starts(runs);
  uint64_t h = seed;
  for (size_t r = 0; r < runs; ++r) {
    h = splitmix64(h + r);
    starts[r] = size_t(h % (n - kRunLen));
  }
  std::sort(starts.begin(), starts.end());
  out.reserve(runs * kRunLen);
  for (size_t s : starts)
    out.insert(out.end(), numbers.begin() + s, numbers.begin() + s + kRunLen);
  return out;
}

// Actual compressed size of one latent vector, in bits, running the real
// pipeline on the sample: histogram, optimal bins, tANS codes plus offsets,
// plus the metadata the chunk would carry for it.
template <class L>
double measured_vector_bits(std::span<const L> latents) {
  if (latents.empty()) return 0.0;
  size_t max_bins = std::min<size_t>(64, (latents.size() + 15) / 16);
  auto hist = build_histogram(latents, max_bins);
  int size_log = ans_size_log_for(hist.size());
  BinCostParams params{double(sizeof(L) * 8 + 7 + size_log), latents.size()};
  auto optimized = optimize_bins(std::span<const Bin<L>>(hist), params);
  const auto& bins = optimized.bins;

  size_log = ans_size_log_for(bins.size());
  std::vector<uint64_t> weights(bins.size());
  uint64_t offset_bits_total = 0;
  for (size_t i = 0; i < bins.size(); ++i) weights[i] = bins[i].weight;
  auto table =
      build_ans_table(build_ans_spec(std::span<const uint64_t>(weights),
                                     size_log));

  std::vector<uint16_t> syms(latents.size());
  std::vector<L> offs(latents.size());
  assign_bins(latents, std::span<const OptimizedBin<L>>(bins), syms.data(),
              offs.data());
  for (uint16_t s : syms) offset_bits_total += bins[s].offset_bits;

  auto encoded = ans_encode_reverse(std::span<const uint16_t>(syms), table);
  uint64_t code_bits = 0;
  for (const auto& frag : encoded.batch_bits) code_bits += frag.bit_length();

  double meta_bits = double(bins.size()) * (sizeof(L) * 8 + 7 + size_log) +
                     4.0 * size_log;
  return meta_bits + double(code_bits) + double(offset_bits_total);
}

}  // namespace detail

struct DeltaScanEntry {
  DeltaEncoding encoding;
  double bits;
};

struct DeltaScan {
  std::vector<DeltaScanEntry> evaluated;  // in evaluation order
  DeltaEncoding chosen;
};

// A more complex delta encoding must beat the incumbent by this relative
// factor; measured sizes of equivalent encodings tie up to sampling noise.
inline constexpr double kDeltaMarginFraction = 0.02;

// Tries None, then Consecutive orders 1..7 (stopping at the first order that
// regresses on the previous size), then Lookback, measuring the actual
// compressed size of the sampled primary latents under each.
template <class T>
DeltaScan scan_delta_encodings(std::span<const T> numbers, const Mode& mode,
                               uint64_t seed) {
  using L = latent_t<T>;
  std::vector<T> sample = detail::draw_run_sample(numbers, seed);
  auto vars = split(std::span<const T>(sample), mode);
  std::span<const L> primary(vars.primary);

  DeltaScan scan;
  // The first few positions of each sampled run reflect virtual (zero)
  // history rather than the data — an order-k difference needs k real
  // predecessors. Every candidate is therefore costed over the same steady
  // tail of each run, which keeps counts equal so that flat ladders tie
  // exactly instead of drifting with the warm-up length.
  size_t run_len = sample.size() == numbers.size()
                       ? std::max<size_t>(sample.size(), 1)
                       : detail::kSampleRunLength;
  auto steady_tail = [&](std::span<const L> v) {
    std::vector<L> out;
    out.reserve(v.size());
    for (size_t i = 0; i < v.size(); ++i)
      if (i % run_len >= kMaxConsecutiveOrder) out.push_back(v[i]);
    return out;
  };
  auto measure = [&](const DeltaEncoding& enc) {
    auto encoded = delta_encode(primary, enc);
    auto trimmed = steady_tail(std::span<const L>(encoded.transformed));
    double bits = detail::measured_vector_bits(std::span<const L>(trimmed));
    if (enc.has_extra_var()) {
      auto extra = steady_tail(std::span<const L>(encoded.extra));
      bits += detail::measured_vector_bits(std::span<const L>(extra));
    }
    scan.evaluated.push_back(DeltaScanEntry{enc, bits});
    return bits;
  };

  double prev = measure(DeltaEncoding::none());
  for (int o = 1; o <= kMaxConsecutiveOrder; ++o) {
    double bits = measure(DeltaEncoding::consecutive(uint8_t(o)));
    if (bits > prev) break;
    prev = bits;
  }
  measure(DeltaEncoding::lookback());

  scan.chosen = scan.evaluated.front().encoding;
  double best = scan.evaluated.front().bits;
  for (const auto& e : scan.evaluated) {
    if (e.bits < best * (1.0 - kDeltaMarginFraction)) {
      best = e.bits;
      scan.chosen = e.encoding;
    }
  }
  return scan;
}

template <class T>
DeltaEncoding choose_delta_encoding(std::span<const T> numbers,
                                    const Mode& mode, uint64_t seed) {
  return scan_delta_encodings(numbers, mode, seed).chosen;
}

}  // namespace numcodec
