#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "binning.hpp"
#include "error.hpp"
#include "modes.hpp"
#include "types.hpp"

namespace numcodec {

namespace detail {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Counter-based pseudorandom permutation of [0, n): a 4-round Feistel
// network over the smallest even-width domain covering n, cycle-walked back
// into range. Bijective, so drawing the first k images samples k distinct
// indices.
class IndexPermutation {
 public:
  IndexPermutation(uint64_t n, uint64_t seed) : n_(n) {
    int domain_bits = n <= 2 ? 2 : std::bit_width(n - 1);
    half_bits_ = (domain_bits + 1) / 2;
    mask_ = (uint64_t(1) << half_bits_) - 1;
    for (int r = 0; r < kRounds; ++r)
      keys_[r] = splitmix64(seed ^ (0xa076bc5c03ull + r));
  }

  uint64_t operator()(uint64_t i) const {
    uint64_t x = i;
    do {
      x = feistel(x);
    } while (x >= n_);
    return x;
  }

 private:
  static constexpr int kRounds = 4;

  uint64_t feistel(uint64_t x) const {
    uint64_t hi = x >> half_bits_;
    uint64_t lo = x & mask_;
    for (int r = 0; r < kRounds; ++r) {
      uint64_t f = splitmix64(lo ^ keys_[r]) & mask_;
      uint64_t nhi = lo;
      lo = hi ^ f;
      hi = nhi;
    }
    return (hi << half_bits_) | lo;
  }

  uint64_t n_;
  int half_bits_;
  uint64_t mask_;
  uint64_t keys_[kRounds];
};

}  // namespace detail

// Sample size: a few percent of n (more at higher levels), clamped to
// [min(n, 100), 10000].
inline size_t detection_sample_size(size_t n, int level = 8) {
  double fraction = 0.02 * std::exp2((level - 8) / 2.0);
  fraction = std::clamp(fraction, 0.005, 0.08);
  size_t target = size_t(std::llround(double(n) * fraction));
  size_t lo = std::min<size_t>(n, 100);
  size_t hi = 10000;
  return std::clamp(target, lo, std::min(hi, n));
}

// Uniform without-replacement sample in permuted order (deterministic in
// seed). The shuffled order matters: consecutive entries act as independent
// draws for the triple census below.
template <class T>
std::vector<T> draw_sample(std::span<const T> numbers, uint64_t seed,
                           int level = 8) {
  size_t n = numbers.size();
  size_t k = detection_sample_size(n, level);
  std::vector<T> out;
  out.reserve(k);
  detail::IndexPermutation perm(n, seed);
  for (size_t i = 0; i < k; ++i) out.push_back(numbers[perm(i)]);
  return out;
}

// ---------------------------------------------------------------------------
// IntMult detection
// ---------------------------------------------------------------------------

template <class L>
struct GcdCensus {
  struct Entry {
    L m;
    uint32_t count;  // c_m
  };
  std::vector<Entry> entries;  // sorted by count desc, then m asc
  uint32_t triples = 0;        // c
};

// GCD census over consecutive disjoint triples of the shuffled sample:
// m = gcd(|x2 - x1|, |x3 - x1|). Triples with both differences zero are
// skipped; m < 2 and m > 2^(B/2) are discarded.
template <class L>
GcdCensus<L> census_gcds(std::span<const L> sample) {
  GcdCensus<L> census;
  census.triples = uint32_t(sample.size() / 3);
  constexpr L kMaxM = L(1) << (sizeof(L) * 4);

  std::unordered_map<L, uint32_t> counts;
  for (uint32_t t = 0; t < census.triples; ++t) {
    L x1 = sample[3 * t], x2 = sample[3 * t + 1], x3 = sample[3 * t + 2];
    L d1 = x2 > x1 ? x2 - x1 : x1 - x2;
    L d2 = x3 > x1 ? x3 - x1 : x1 - x3;
    if (d1 == 0 && d2 == 0) continue;
    L m = std::gcd(d1, d2);
    if (m < 2 || m > kMaxM) continue;
    counts[m]++;
  }

  census.entries.reserve(counts.size());
  for (auto& [m, c] : counts)
    census.entries.push_back(typename GcdCensus<L>::Entry{m, c});
  std::sort(census.entries.begin(), census.entries.end(),
            [](const auto& a, const auto& b) {
              return a.count != b.count ? a.count > b.count : a.m < b.m;
            });
  return census;
}

// Estimated bits saved on the quotient latents q = u / m relative to coding
// the latents directly: every sample sharing its quotient value with at most
// n_sample / 256 other samples saves about log2(m) offset bits.
template <class L>
double estimate_quotient_saving(std::span<const L> sample, L m) {
  std::unordered_map<L, uint32_t> mult;
  mult.reserve(sample.size() * 2);
  for (L u : sample) mult[u / m]++;
  double threshold = double(sample.size()) / 256.0;
  uint64_t infrequent = 0;
  for (L u : sample) {
    if (double(mult[u / m] - 1) <= threshold) infrequent++;
  }
  return -double(infrequent) * std::log2(double(m));
}

namespace detail {

// Solves p^3 + (1-p)^3 / (m-1)^2 = t for p in [1/m, 1] by the method of
// false position (Illinois variant), to absolute tolerance 1e-9 in p. The
// left side is the collision probability of a residue distribution with one
// dominant residue of mass p and the rest uniform.
inline double solve_dominant_residue_prob(double m, double t) {
  double pmin = 1.0 / m;
  if (t >= 1.0) return 1.0;
  if (t <= pmin * pmin) return pmin;  // at or below the uniform floor

  double denom = (m - 1.0) * (m - 1.0);
  auto f = [&](double p) {
    double q = 1.0 - p;
    return p * p * p + q * q * q / denom - t;
  };

  double a = pmin, fa = f(a);
  double b = 1.0, fb = f(b);
  double x = a;
  for (int iter = 0; iter < 200 && b - a > 1e-9; ++iter) {
    x = b - fb * (b - a) / (fb - fa);
    x = std::clamp(x, a, b);
    double fx = f(x);
    if (fx == 0.0) return x;
    if ((fx < 0.0) == (fa < 0.0)) {
      a = x;
      fa = fx;
      fb *= 0.5;
    } else {
      b = x;
      fb = fx;
      fa *= 0.5;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

// Worst-case entropy (bits per number) of the residues u mod m, inferred
// from how often the census produced m: a frequent m implies concentrated
// residues. c = triple count, c_m = triples that yielded m.
inline double estimate_remainder_cost(double m, uint64_t c, uint64_t c_m) {
  constexpr double kZeta2 = std::numbers::pi * std::numbers::pi / 6.0;
  double t = c == 0 ? 1.0 : std::min(kZeta2 * double(c_m) / double(c), 1.0);
  double p = detail::solve_dominant_residue_prob(m, t);
  double q = 1.0 - p;
  double entropy = 0.0;
  if (p > 0.0) entropy -= p * std::log2(p);
  if (q > 0.0) entropy -= q * std::log2(q / (m - 1.0));
  return entropy;
}

// ---------------------------------------------------------------------------
// Float mode detection helpers
// ---------------------------------------------------------------------------

namespace detail {

// Idealized compressed size (bits) of a latent vector: optimal binning cost
// under the chunk cost model, with a small histogram. Used to compare mode
// candidates on equal footing.
template <class L>
double estimated_vector_cost_bits(std::span<const L> latents) {
  if (latents.empty()) return 0.0;
  size_t max_bins = std::min<size_t>(64, (latents.size() + 15) / 16);
  auto hist = build_histogram(latents, max_bins);
  BinCostParams params{double(sizeof(L) * 8 + 7 + 8), latents.size()};
  return optimize_bins(std::span<const Bin<L>>(hist), params).total_cost_bits;
}

// Reduced denominator of a real that is (close to) a ratio of two integers:
// walks the continued-fraction convergents p/q of r and returns the first q
// whose convergent lands within rel_tol of r. Earlier convergents of a true
// ratio P/Q sit at least 1/(qQ) away, so with a tight rel_tol the first hit
// is Q itself.
inline std::optional<uint64_t> rational_denominator(double r, double rel_tol,
                                                    uint64_t max_q) {
  if (!(r > 0.0) || !std::isfinite(r)) return std::nullopt;
  double x = r;
  uint64_t p0 = 1, q0 = 0;
  uint64_t p1 = uint64_t(std::floor(x)), q1 = 1;
  double frac = x - std::floor(x);
  for (int i = 0; i < 64; ++i) {
    if (q1 > max_q) break;
    if (p1 > 0) {
      double approx = double(p1) / double(q1);
      if (std::abs(approx - r) <= rel_tol * r) return q1;
    }
    if (frac < 1e-18) break;
    x = 1.0 / frac;
    double fl = std::floor(x);
    if (fl >= 9e15) break;
    uint64_t a = uint64_t(fl);
    uint64_t p2 = a * p1 + p0;
    uint64_t q2 = a * q1 + q0;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    frac = x - fl;
  }
  return std::nullopt;
}

// Nearest simple fraction p/q within rel_tol of g, found by walking g's
// continued-fraction convergents; returns g unchanged if none fits. An
// approximate lattice base recovered from noisy differences carries error
// that large multipliers amplify past any ULP window; real-world bases are
// almost always simple fractions (0.1, 0.25, 1/3, ...), so snapping restores
// the exact value.
inline double snap_to_simple_fraction(double g, double rel_tol) {
  if (!(g > 0.0) || !std::isfinite(g)) return g;
  double x = g;
  uint64_t p0 = 1, q0 = 0;
  uint64_t p1 = uint64_t(std::floor(x)), q1 = 1;
  double frac = x - std::floor(x);
  for (int i = 0; i < 40; ++i) {
    if (q1 > 0) {
      double approx = double(p1) / double(q1);
      if (approx > 0.0 && std::abs(approx - g) <= rel_tol * g) return approx;
    }
    if (frac < 1e-15) break;
    x = 1.0 / frac;
    double fl = std::floor(x);
    if (fl >= 9e15) break;
    uint64_t a = uint64_t(fl);
    uint64_t p2 = a * p1 + p0;
    uint64_t q2 = a * q1 + q0;
    // "Simple" means a small denominator: a cap of 10^5 admits every
    // realistic lattice step (tenths, 1/3, milli-units) while rejecting the
    // high-order convergents that can approximate any real this closely.
    if (q2 > 100000ull) break;
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    frac = x - fl;
  }
  return g;
}

template <class T>
struct FloatModeCandidate {
  Mode mode;
  double relative_cost;  // estimated bits vs Classic over the sample, < 0 good
};

// FloatMult candidate. Base hypotheses come from the smallest distinct
// consecutive-difference magnitudes (data on a lattice base*Z makes every
// difference a multiple of the base, so small differences are small
// multiples) plus the pairwise GCD of the two smallest. Each hypothesis is
// coarsened by an integer GCD census over the difference multipliers, then
// accepted only if >= 80% of the sample reconstructs within 2^8 ULPs.
template <class T>
std::optional<FloatModeCandidate<T>> detect_float_mult(
    std::span<const T> sample, double classic_cost) {
  using L = latent_t<T>;
  constexpr int B = bit_width_of<T>;
  constexpr L kHalf = L(1) << (B - 1);

  double max_abs = 0.0;
  for (T x : sample)
    if (std::isfinite(x)) max_abs = std::max(max_abs, std::abs(double(x)));
  if (max_abs == 0.0) return std::nullopt;

  int mant = mantissa_bits(kind_of<T>);
  double tol = std::ldexp(max_abs, -(mant - 8));

  std::vector<double> diffs;
  diffs.reserve(sample.size());
  for (size_t i = 1; i < sample.size(); ++i) {
    double d = std::abs(double(sample[i]) - double(sample[i - 1]));
    if (std::isfinite(d) && d > tol) diffs.push_back(d);
  }
  if (diffs.size() < 8) return std::nullopt;

  std::vector<double> sorted(diffs);
  std::sort(sorted.begin(), sorted.end());

  // A difference near an integer multiple of an existing hypothesis adds no
  // information; keep only the first few that do.
  std::vector<double> hypotheses;
  auto near_multiple_of = [&](double d, double g) {
    double q = std::round(d / g);
    return q >= 1.0 && std::abs(d - q * g) <= tol;
  };
  for (double d : sorted) {
    bool covered = false;
    for (double g : hypotheses) covered = covered || near_multiple_of(d, g);
    if (!covered) hypotheses.push_back(d);
    if (hypotheses.size() >= 5) break;
  }
  // The shuffled sample's differences are large multiples of any lattice
  // base (d = k·b for essentially random k), so the base never shows up as a
  // difference itself. It does show up in ratios: d_hi/d_lo = k_hi/k_lo
  // exactly, and recovering that reduced fraction p/q gives
  // d_lo/q = gcd(k_lo, k_hi)·b — the base itself whenever the multipliers
  // are coprime. Trying every pair makes a miss vanishingly unlikely.
  size_t direct = hypotheses.size();
  for (size_t a = 0; a + 1 < direct; ++a) {
    for (size_t b = a + 1; b < direct; ++b) {
      double lo = std::min(hypotheses[a], hypotheses[b]);
      double hi = std::max(hypotheses[a], hypotheses[b]);
      if (auto q = rational_denominator(hi / lo, 1e-9, 2000000))
        hypotheses.push_back(lo / double(*q));
    }
  }

  std::optional<FloatModeCandidate<T>> best;
  std::vector<L> mult_latents, gap_latents;
  std::vector<uint64_t> mults;

  auto evaluate = [&](double g) {
    T base = T(g);
    if (!std::isfinite(base) || base == T(0)) return;
    size_t conforming = 0;
    mult_latents.clear();
    gap_latents.clear();
    for (T x : sample) {
      auto mult = round_multiplier(x / base);
      L approx = classic_to_latent(T(mult) * base);
      L u = classic_to_latent(x);
      L gap = L(u - approx);
      L mag = gap & kHalf ? L(0) - gap : gap;
      if (mag <= L(1) << 8) conforming++;
      mult_latents.push_back(L(mult) ^ kHalf);
      gap_latents.push_back(L(gap + kHalf));
    }
    if (conforming * 5 < sample.size() * 4) return;

    double cost =
        estimated_vector_cost_bits(std::span<const L>(mult_latents)) +
        estimated_vector_cost_bits(std::span<const L>(gap_latents)) -
        classic_cost;
    if (!best || cost < best->relative_cost)
      best = FloatModeCandidate<T>{Mode::float_mult(double(base)), cost};
  };

  for (double g : hypotheses) {
    // Difference multipliers share a factor when g caught a sub-lattice;
    // the integer census coarsens the base.
    mults.clear();
    for (double d : diffs) {
      double q = d / g;
      if (q < 9e18) mults.push_back(uint64_t(std::llround(q)));
    }
    auto census = census_gcds(std::span<const uint64_t>(mults));
    if (!census.entries.empty() && census.triples > 0) {
      const auto& top = census.entries.front();
      if (top.count * 2 >= census.triples) g *= double(top.m);
    }

    double snapped = snap_to_simple_fraction(g, 1e-9);
    evaluate(snapped);
    if (snapped != g) evaluate(g);
  }
  return best;
}

// FloatQuant candidate: k low mantissa bits move to a secondary latent that
// costs ~0 bits when those bits are mostly zero. Saving for a given k is
// k bits for every sample with >= k trailing zeros, minus k bits of overhead
// for every sample without.
template <class T>
std::optional<FloatModeCandidate<T>> detect_float_quant(
    std::span<const T> sample) {
  using L = latent_t<T>;
  constexpr int B = bit_width_of<T>;
  int mant = mantissa_bits(kind_of<T>);

  std::array<uint64_t, 65> tz_hist{};
  for (T x : sample) {
    L u = classic_to_latent(x);
    int tz = u == 0 ? B : std::countr_zero(u);
    tz_hist[std::min(tz, 64)]++;
  }
  // suffix counts: samples with at least k trailing zeros
  std::array<uint64_t, 66> at_least{};
  for (int k = 64; k >= 0; --k) at_least[k] = at_least[k + 1] + tz_hist[k];

  double best_saving = 0.0;
  int best_k = 0;
  for (int k = 1; k < mant; ++k) {
    double n_ge = double(at_least[k]);
    double saving = double(k) * n_ge - double(k) * (double(sample.size()) - n_ge);
    if (saving > best_saving) {
      best_saving = saving;
      best_k = k;
    }
  }
  if (best_k == 0) return std::nullopt;
  return FloatModeCandidate<T>{Mode::float_quant(uint8_t(best_k)),
                               -best_saving};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// choose_mode
// ---------------------------------------------------------------------------

// A non-Classic mode must beat Classic by this many estimated bits per
// sampled number. On structure-free data every IntMult candidate ties
// Classic in expectation (the census estimator is calibrated so uniform
// data sits at its knife edge), and the cubic's derivative vanishes there,
// so sampling noise in c_m moves the entropy estimate like sqrt(noise);
// the margin has to clear several such candidates at once. Real modes save
// log2(m)-scale bits per number and clear it by orders of magnitude.
inline constexpr double kModeMarginBitsPerNumber = 0.15;

template <class T>
Mode choose_mode(std::span<const T> numbers, uint64_t seed, int level = 8) {
  using L = latent_t<T>;
  if (numbers.empty()) return Mode::classic();

  std::vector<T> sample = draw_sample(numbers, seed, level);
  std::vector<L> latents(sample.size());
  for (size_t i = 0; i < sample.size(); ++i)
    latents[i] = classic_to_latent(sample[i]);
  std::span<const L> lat_span(latents);

  double margin = kModeMarginBitsPerNumber * double(sample.size());
  Mode best = Mode::classic();
  double best_cost = -margin;  // candidates must clear this to win

  if constexpr (!std::is_floating_point_v<T>) {
    auto census = census_gcds(lat_span);
    uint32_t c = census.triples;
    uint32_t min_count = uint32_t(std::max<uint64_t>(3, c / 100));
    int considered = 0;
    for (const auto& e : census.entries) {
      if (considered >= 8) break;
      if (e.count < min_count) continue;
      ++considered;
      // The remainder estimate reacts sharply to upward count fluctuations
      // right at the uniform floor (the entropy deficit is linear in the
      // excess), so feed it a lower confidence bound on the count. Genuine
      // multiples produce counts in the hundreds, where two sigmas are
      // negligible; chance gcd hits on unstructured data stay near the floor.
      double shrunk = double(e.count) - 2.0 * std::sqrt(double(e.count));
      uint64_t count_lcb = uint64_t(std::max(1.0, shrunk));
      double cost =
          estimate_quotient_saving(lat_span, e.m) +
          double(sample.size()) *
              estimate_remainder_cost(double(e.m), c, count_lcb);
      if (cost < best_cost) {
        best_cost = cost;
        best = Mode::int_mult(uint64_t(e.m));
      }
    }
  } else {
    double classic_cost = detail::estimated_vector_cost_bits(lat_span);
    if (auto fm = detail::detect_float_mult(std::span<const T>(sample),
                                            classic_cost)) {
      if (fm->relative_cost < best_cost) {
        best_cost = fm->relative_cost;
        best = fm->mode;
      }
    }
    if (auto fq = detail::detect_float_quant(std::span<const T>(sample))) {
      if (fq->relative_cost < best_cost) {
        best_cost = fq->relative_cost;
        best = fq->mode;
      }
    }
  }
  return best;
}

}  // namespace numcodec
