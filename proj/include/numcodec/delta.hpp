#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "error.hpp"
#include "types.hpp"

namespace numcodec {

inline constexpr int kMaxConsecutiveOrder = 7;
inline constexpr unsigned kMinLookbackWindow = 2;
inline constexpr unsigned kMaxLookbackWindow = 256;

struct DeltaEncoding {
  enum class Tag : uint8_t { None = 0, Consecutive = 1, Lookback = 2 };

  Tag tag = Tag::None;
  uint8_t order = 0;     // Consecutive: 1..7
  uint16_t window = 0;   // Lookback: 2..256

  static DeltaEncoding none() { return DeltaEncoding{}; }
  static DeltaEncoding consecutive(uint8_t order) {
    return DeltaEncoding{Tag::Consecutive, order, 0};
  }
  static DeltaEncoding lookback(uint16_t window = kMaxLookbackWindow) {
    return DeltaEncoding{Tag::Lookback, 0, window};
  }

  // Lookback emits the chosen lookback distances as one more latent
  // variable alongside the primary.
  bool has_extra_var() const { return tag == Tag::Lookback; }

  // Latents the decoder needs per page to resume mid-chunk.
  size_t state_size() const {
    switch (tag) {
      case Tag::None: return 0;
      case Tag::Consecutive: return order;
      default: return window;
    }
  }

  friend bool operator==(const DeltaEncoding&, const DeltaEncoding&) = default;
};

inline void validate_delta(const DeltaEncoding& d) {
  switch (d.tag) {
    case DeltaEncoding::Tag::None:
      return;
    case DeltaEncoding::Tag::Consecutive:
      if (d.order < 1 || d.order > kMaxConsecutiveOrder)
        throw InvalidConfig("consecutive delta order out of range");
      return;
    case DeltaEncoding::Tag::Lookback:
      if (d.window < kMinLookbackWindow || d.window > kMaxLookbackWindow)
        throw InvalidConfig("lookback window out of range");
      return;
  }
  throw InvalidConfig("unknown delta tag");
}

inline const char* delta_tag_name(DeltaEncoding::Tag t) {
  switch (t) {
    case DeltaEncoding::Tag::None: return "none";
    case DeltaEncoding::Tag::Consecutive: return "consecutive";
    default: return "lookback";
  }
}

// Page-boundary snapshot: the values needed to resume inverting the
// transform at that position. Consecutive keeps one running value per
// difference level; Lookback keeps the window of reconstructed latents.
// Positions before the start of the chunk read as zero, so the snapshot at
// position 0 is all zeros and every latent variable keeps length n.
template <class L>
struct DeltaState {
  std::vector<L> values;

  friend bool operator==(const DeltaState&, const DeltaState&) = default;
};

template <class L>
struct DeltaEncoded {
  std::vector<L> transformed;          // same length as the input
  std::vector<L> extra;                // lookback distances, empty otherwise
  std::vector<DeltaState<L>> states;   // one per requested snapshot position
};

namespace detail {

// Length in bits of the signed magnitude of a wrapping difference: the
// greedy lookback search minimizes this.
template <class L>
int significant_delta_bits(L diff) {
  constexpr L kHalf = L(1) << (sizeof(L) * 8 - 1);
  L mag = diff & kHalf ? L(0) - diff : diff;
  return std::bit_width(mag);
}

template <class L>
struct LookbackSearcher {
  // Buckets latents by their top bits so near-equal values collide. A second
  // map keyed on the full value catches exact repeats that would otherwise be
  // shadowed inside a shared bucket (e.g. many small integers all landing in
  // bucket zero).
  static constexpr int kKeyBits = 48;
  static constexpr bool kBucketIsExact = int(sizeof(L) * 8) <= kKeyBits;

  explicit LookbackSearcher(unsigned window) : window_(window) {}

  uint64_t key_of(L value) const {
    constexpr int b = int(sizeof(L) * 8);
    return b > kKeyBits ? uint64_t(value >> (b - kKeyBits)) : uint64_t(value);
  }

  // Chooses the lookback distance for position i given history[i - l] for
  // l in [1, window]; history reads zeros before the chunk start.
  //
  // Candidates are scored by the delta's significant bits plus an adaptive
  // estimate of what the distance itself will cost: the l sequence is stored
  // as its own latent variable, so a 0-bit delta found at an erratic distance
  // can be dearer than a small delta at the usual one (periodic data with
  // noise is the classic case).
  unsigned choose(size_t i, L value, std::span<const L> prior) {
    // Entries older than the window can never be candidates again; dropping
    // one per step keeps both maps at O(window) entries.
    if (i > window_) {
      size_t e = i - window_ - 1;
      expire(bucket_, key_of(prior[e]), e);
      if constexpr (!kBucketIsExact) expire(exact_, prior[e], e);
    }
    if (freq_.empty()) freq_.assign(window_ + 1, 0);
    auto pick = [&](unsigned l) {
      return L(value - (l <= i ? prior[i - l] : L(0)));
    };
    auto distance_cost = [&](unsigned l) {
      return -std::log2((double(freq_[l]) + 0.5) / (double(chosen_) + 1.0));
    };
    unsigned best_l = 1;
    double best_score =
        double(significant_delta_bits(pick(1))) + distance_cost(1);
    auto consider = [&](unsigned l) {
      if (l < 1 || l > window_ || l == best_l) return;
      double score = double(significant_delta_bits(pick(l))) + distance_cost(l);
      if (score < best_score || (score == best_score && l < best_l)) {
        best_l = l;
        best_score = score;
      }
    };
    if constexpr (!kBucketIsExact) {
      if (auto it = exact_.find(value); it != exact_.end() && it->second < i)
        consider(unsigned(i - it->second));
    }
    if (auto it = bucket_.find(key_of(value));
        it != bucket_.end() && it->second < i)
      consider(unsigned(i - it->second));
    if (usual_l_ != 0) consider(usual_l_);
    bucket_[key_of(value)] = i;
    if constexpr (!kBucketIsExact) exact_[value] = i;
    freq_[best_l]++;
    chosen_++;
    if (usual_l_ == 0 || freq_[best_l] > freq_[usual_l_]) usual_l_ = best_l;
    return best_l;
  }

 private:
  template <class K>
  static void expire(std::unordered_map<K, size_t>& map, K key, size_t pos) {
    auto it = map.find(key);
    if (it != map.end() && it->second == pos) map.erase(it);
  }

  unsigned window_;
  std::unordered_map<uint64_t, size_t> bucket_;
  std::unordered_map<L, size_t> exact_;
  std::vector<uint32_t> freq_;  // how often each distance has been chosen
  uint64_t chosen_ = 0;
  unsigned usual_l_ = 0;  // most frequently chosen distance so far
};

}  // namespace detail

// Applies the transform chunk-wide and records a resume snapshot at each of
// `snapshot_positions` (ascending, in [0, n)). transformed[i] is biased by
// 2^(B-1) so that small signed differences land near the middle of the
// latent range.
template <class L>
DeltaEncoded<L> delta_encode(std::span<const L> latents,
                             const DeltaEncoding& enc,
                             std::span<const size_t> snapshot_positions = {}) {
  constexpr L kBias = L(1) << (sizeof(L) * 8 - 1);
  size_t n = latents.size();
  DeltaEncoded<L> out;
  out.states.reserve(snapshot_positions.size());
  size_t next_snap = 0;

  auto snapshot_if_needed = [&](size_t i, auto&& make_state) {
    while (next_snap < snapshot_positions.size() &&
           snapshot_positions[next_snap] == i) {
      out.states.push_back(make_state());
      ++next_snap;
    }
  };

  switch (enc.tag) {
    case DeltaEncoding::Tag::None: {
      out.transformed.assign(latents.begin(), latents.end());
      for (size_t s = 0; s < snapshot_positions.size(); ++s)
        out.states.push_back(DeltaState<L>{});
      return out;
    }
    case DeltaEncoding::Tag::Consecutive: {
      validate_delta(enc);
      int order = enc.order;
      out.transformed.resize(n);
      // run[j] tracks the j-times differenced sequence at the previous
      // position; everything starts at zero (virtual history).
      std::array<L, kMaxConsecutiveOrder> run{};
      for (size_t i = 0; i < n; ++i) {
        snapshot_if_needed(i, [&] {
          return DeltaState<L>{
              std::vector<L>(run.begin(), run.begin() + order)};
        });
        L d = latents[i];
        for (int j = 0; j < order; ++j) {
          L next = L(d - run[j]);
          run[j] = d;
          d = next;
        }
        out.transformed[i] = L(d + kBias);
      }
      snapshot_if_needed(n, [&] {
        return DeltaState<L>{std::vector<L>(run.begin(), run.begin() + order)};
      });
      return out;
    }
    case DeltaEncoding::Tag::Lookback: {
      validate_delta(enc);
      unsigned window = enc.window;
      out.transformed.resize(n);
      out.extra.resize(n);
      detail::LookbackSearcher<L> searcher(window);
      auto ring_state = [&](size_t i) {
        // prior `window` latents, oldest first, zeros before the chunk
        DeltaState<L> st;
        st.values.resize(window, 0);
        for (size_t j = 0; j < window; ++j) {
          size_t back = window - j;
          if (back <= i) st.values[j] = latents[i - back];
        }
        return st;
      };
      for (size_t i = 0; i < n; ++i) {
        snapshot_if_needed(i, [&] { return ring_state(i); });
        unsigned l = searcher.choose(i, latents[i], latents.first(i));
        L ref = l <= i ? latents[i - l] : L(0);
        out.transformed[i] = L(L(latents[i] - ref) + kBias);
        out.extra[i] = L(l);
      }
      snapshot_if_needed(n, [&] { return ring_state(n); });
      return out;
    }
  }
  throw InvalidConfig("unknown delta tag");
}

// Inverts the transform batch by batch. Batches must arrive in order; lane
// state lives in this object between calls.
template <class L>
class DeltaDecoder {
 public:
  DeltaDecoder(const DeltaEncoding& enc, DeltaState<L> state)
      : enc_(enc), state_(std::move(state)) {
    validate_delta(enc_);
    if (state_.values.size() != enc_.state_size())
      throw CorruptPage("delta state size mismatch");
    if (enc_.tag == DeltaEncoding::Tag::Lookback) {
      ring_ = std::move(state_.values);
      ring_at_ = 0;  // ring_[ring_at_] is the oldest entry
    }
  }

  // transformed latents -> original latents, in place. For Lookback, `extra`
  // must hold the lookback distances for the same positions.
  void decode_batch(std::span<L> latents, std::span<const L> extra = {}) {
    constexpr L kBias = L(1) << (sizeof(L) * 8 - 1);
    switch (enc_.tag) {
      case DeltaEncoding::Tag::None:
        return;
      case DeltaEncoding::Tag::Consecutive: {
        int order = enc_.order;
        L* run = state_.values.data();
        for (size_t i = 0; i < latents.size(); ++i) {
          L d = L(latents[i] - kBias);
          for (int j = order; j-- > 0;) d = run[j] = L(run[j] + d);
          latents[i] = d;
        }
        return;
      }
      case DeltaEncoding::Tag::Lookback: {
        if (extra.size() != latents.size())
          throw CorruptPage("lookback distances missing for batch");
        unsigned window = enc_.window;
        for (size_t i = 0; i < latents.size(); ++i) {
          uint64_t l = uint64_t(extra[i]);
          if (l < 1 || l > window)
            throw CorruptPage("lookback distance outside the window");
          // ring_ holds the last `window` values; oldest at ring_at_
          L ref = ring_[(ring_at_ + window - l) % window];
          L value = L(ref + L(latents[i] - kBias));
          ring_[ring_at_] = value;
          ring_at_ = (ring_at_ + 1) % window;
          latents[i] = value;
        }
        return;
      }
    }
    throw InvalidConfig("unknown delta tag");
  }

 private:
  DeltaEncoding enc_;
  DeltaState<L> state_;
  std::vector<L> ring_;
  size_t ring_at_ = 0;
};

// One-shot convenience: full inverse from a single state.
template <class L>
std::vector<L> delta_decode(const DeltaEncoding& enc, DeltaState<L> state,
                            std::span<const L> transformed,
                            std::span<const L> extra = {}) {
  std::vector<L> out(transformed.begin(), transformed.end());
  DeltaDecoder<L> dec(enc, std::move(state));
  dec.decode_batch(std::span<L>(out), extra);
  return out;
}

}  // namespace numcodec
