#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "error.hpp"
#include "types.hpp"

namespace numcodec {

// A histogram bin over latent values. Bounds are inclusive, tight (both are
// values that occur in the data) and exclusive across bins (upper[i] <
// lower[i+1]).
template <class L>
struct Bin {
  L lower = 0;
  L upper = 0;
  uint64_t count = 0;

  friend bool operator==(const Bin&, const Bin&) = default;
};

// A bin after the cost optimizer has merged neighbors: keeps only what the
// format stores. Offsets are encoded as y - lower in offset_bits bits.
template <class L>
struct OptimizedBin {
  L lower = 0;
  uint8_t offset_bits = 0;
  uint64_t weight = 0;  // occurrence count in the chunk

  friend bool operator==(const OptimizedBin&, const OptimizedBin&) = default;
};

namespace detail {

// Bits needed for offsets in [0, hi - lo], i.e. ceil(log2(hi - lo + 1)).
template <class L>
int range_offset_bits(L lo, L hi) {
  return std::bit_width(L(hi - lo));
}

// Multi-rank quickselect: positions every rank in `ranks` (ascending,
// strictly inside (lo, hi)) at its sorted place, partitioning around each.
// A placed rank position is excluded from later calls — nth_element would
// otherwise shuffle it away again — so v[r] stays the exact sorted element.
template <class L>
void partition_at_ranks(std::vector<L>& v, size_t lo, size_t hi,
                        const size_t* ranks, size_t nranks) {
  while (nranks > 0) {
    size_t mid = nranks / 2;
    size_t mid_rank = ranks[mid];
    std::nth_element(v.begin() + lo, v.begin() + mid_rank, v.begin() + hi);
    partition_at_ranks(v, lo, mid_rank, ranks, mid);
    lo = mid_rank + 1;
    ranks += mid + 1;
    nranks -= mid + 1;
  }
}

}  // namespace detail

// Builds at most max_bins tight, exclusive bins with quantile boundaries at
// ranks ceil(i*n/max_bins). A value straddling a boundary is pulled entirely
// into the left bin, so equal values never span two bins.
template <class L>
std::vector<Bin<L>> build_histogram(std::span<const L> latents,
                                    size_t max_bins) {
  size_t n = latents.size();
  if (n == 0) return {};
  if (max_bins < 1) max_bins = 1;

  std::vector<L> v(latents.begin(), latents.end());

  std::vector<size_t> ranks;
  ranks.reserve(max_bins);
  for (size_t i = 1; i < max_bins; ++i) {
    size_t r = size_t((uint64_t(i) * n + max_bins - 1) / max_bins);
    if (r > 0 && r < n && (ranks.empty() || ranks.back() != r))
      ranks.push_back(r);
  }
  detail::partition_at_ranks(v, 0, n, ranks.data(), ranks.size());
  ranks.push_back(n);

  std::vector<Bin<L>> bins;
  bins.reserve(ranks.size());
  size_t start = 0;
  size_t next = 0;
  while (start < n) {
    while (ranks[next] <= start) ++next;
    size_t end = ranks[next];
    L lo = v[start];
    L hi = v[start];
    for (size_t i = start + 1; i < end; ++i) {
      lo = std::min(lo, v[i]);
      hi = std::max(hi, v[i]);
    }
    // Every rank boundary holds the minimum of everything to its right, so
    // v[end] == hi means the value straddles the boundary: move its copies
    // from the slices to the right into this bin.
    while (end < n && v[end] == hi) {
      while (ranks[next] <= end) ++next;
      size_t slice_end = ranks[next];
      auto mid = std::partition(v.begin() + end, v.begin() + slice_end,
                                [hi](L x) { return x == hi; });
      end = size_t(mid - v.begin());
    }
    bins.push_back(Bin<L>{lo, hi, uint64_t(end - start)});
    start = end;
  }
  return bins;
}

// Cost model inputs: M is the serialized size of one bin record in chunk
// metadata (bits), n the total latent count of the variable.
struct BinCostParams {
  double meta_bits_per_bin = 0.0;  // M
  uint64_t total_count = 0;        // n
};

// Estimated bits to describe and store all latents of bins [i, j] merged
// into one: M + n_ij * (alpha + beta) with alpha the per-latent entropy-code
// cost log2(n / n_ij) and beta the offset width of the merged range.
template <class L>
double bin_cost(std::span<const Bin<L>> bins, size_t i, size_t j,
                const BinCostParams& params, uint64_t count_ij) {
  double alpha = std::log2(double(params.total_count) / double(count_ij));
  int beta = detail::range_offset_bits(bins[i].lower, bins[j].upper);
  return params.meta_bits_per_bin + double(count_ij) * (alpha + beta);
}

template <class L>
double bin_cost(std::span<const Bin<L>> bins, size_t i, size_t j,
                const BinCostParams& params) {
  uint64_t c = 0;
  for (size_t t = i; t <= j; ++t) c += bins[t].count;
  return bin_cost(bins, i, j, params, c);
}

template <class L>
struct OptimizeResult {
  std::vector<OptimizedBin<L>> bins;
  double total_cost_bits = 0.0;
};

// Exact partition optimizer: O(k^2) dynamic program over contiguous merges,
// minimizing the total estimated size. Ties prefer fewer bins, then the
// earliest merge decisions, so the output is deterministic.
template <class L>
OptimizeResult<L> optimize_bins(std::span<const Bin<L>> bins,
                                const BinCostParams& params) {
  size_t k = bins.size();
  OptimizeResult<L> out;
  if (k == 0) return out;

  std::vector<uint64_t> prefix(k + 1, 0);
  for (size_t i = 0; i < k; ++i) prefix[i + 1] = prefix[i] + bins[i].count;

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> best(k + 1, kInf);
  std::vector<uint32_t> nbins(k + 1, 0);
  std::vector<uint32_t> cut(k + 1, 0);
  best[0] = 0.0;

  for (size_t j = 1; j <= k; ++j) {
    for (size_t i = 0; i < j; ++i) {
      double c =
          best[i] + bin_cost(bins, i, j - 1, params, prefix[j] - prefix[i]);
      uint32_t nb = nbins[i] + 1;
      if (c < best[j] || (c == best[j] && nb < nbins[j])) {
        best[j] = c;
        nbins[j] = nb;
        cut[j] = uint32_t(i);
      }
    }
  }

  std::vector<std::pair<size_t, size_t>> segs;
  for (size_t j = k; j > 0; j = cut[j]) segs.emplace_back(cut[j], j - 1);
  std::reverse(segs.begin(), segs.end());

  out.total_cost_bits = best[k];
  out.bins.reserve(segs.size());
  for (auto [i, j] : segs) {
    OptimizedBin<L> b;
    b.lower = bins[i].lower;
    b.offset_bits =
        uint8_t(detail::range_offset_bits(bins[i].lower, bins[j].upper));
    b.weight = prefix[j + 1] - prefix[i];
    out.bins.push_back(b);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bin assignment
// ---------------------------------------------------------------------------

// Assigns each latent to its bin (index of the last bin whose lower bound is
// <= y) via a balanced binary search over the sorted lower bounds, iterated
// depth-major across a batch of latents so the inner loop stays branch-free.
template <class L>
class BinIndexer {
 public:
  explicit BinIndexer(std::span<const OptimizedBin<L>> bins) {
    nbins_ = bins.size();
    size_t padded = std::bit_ceil(nbins_ + 1);
    lowers_.assign(padded, std::numeric_limits<L>::max());
    for (size_t i = 0; i < nbins_; ++i) lowers_[i] = bins[i].lower;
    top_step_ = padded >> 1;
  }

  // out[i] = bin index for latents[i]; throws CorruptState if a latent falls
  // below the first bin (cannot happen for data the bins were built from).
  void assign(std::span<const L> latents, uint16_t* out) const {
    constexpr size_t kBatch = 256;
    size_t n = latents.size();
    std::array<uint32_t, kBatch> pos;
    for (size_t s = 0; s < n; s += kBatch) {
      size_t cnt = std::min(kBatch, n - s);
      std::fill(pos.begin(), pos.begin() + cnt, 0u);
      for (size_t step = top_step_; step >= 1; step >>= 1) {
        for (size_t t = 0; t < cnt; ++t) {
          uint32_t cand = pos[t] + uint32_t(step);
          pos[t] = (lowers_[cand - 1] <= latents[s + t]) ? cand : pos[t];
        }
      }
      for (size_t t = 0; t < cnt; ++t) {
        uint32_t count_le = std::min(pos[t], uint32_t(nbins_));
        if (count_le == 0) throw CorruptState("latent below the lowest bin");
        out[s + t] = uint16_t(count_le - 1);
      }
    }
  }

 private:
  std::vector<L> lowers_;
  size_t nbins_ = 0;
  size_t top_step_ = 0;
};

// Convenience: bin index and offset per latent.
template <class L>
void assign_bins(std::span<const L> latents,
                 std::span<const OptimizedBin<L>> bins, uint16_t* sym_out,
                 L* offset_out) {
  BinIndexer<L> indexer(bins);
  indexer.assign(latents, sym_out);
  for (size_t i = 0; i < latents.size(); ++i) {
    const auto& b = bins[sym_out[i]];
    L off = L(latents[i] - b.lower);
    if (b.offset_bits < int(sizeof(L) * 8) && (off >> b.offset_bits) != 0)
      throw CorruptState("latent outside its bin's offset range");
    offset_out[i] = off;
  }
}

}  // namespace numcodec
