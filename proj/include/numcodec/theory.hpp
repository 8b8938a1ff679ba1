#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "error.hpp"
#include "mode_detect.hpp"
#include "pipeline.hpp"

namespace numcodec {

// Worst-case overhead, in bits per number, of an optimal histogram with k
// bins over the entropy of any latent distribution on [0, T) whose density
// is piecewise monotonic with at most s pieces (T = 2^latent_bits):
//
//   3 s log2(T) / (k - 2s) * T / (T - 1)
//
// Meaningful only when k > 2s.
inline double binning_overhead_bound(int s, int k, int latent_bits) {
  if (s < 1) throw InvalidConfig("smoothness piece count must be positive");
  if (latent_bits < 1 || latent_bits > 64)
    throw InvalidConfig("latent width out of range");
  if (k <= 2 * s)
    throw InvalidConfig("bin count must exceed twice the piece count");
  double T = std::exp2(double(latent_bits));
  return 3.0 * double(s) * double(latent_bits) / double(k - 2 * s) *
         (T / (T - 1.0));
}

// Deterministic counter-based generator; the same seed always reproduces the
// same stream on every platform.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() { return detail::splitmix64(state_++); }

  // in [0, 1)
  double next_unit() {
    return double(next_u64() >> 11) * 0x1.0p-53;
  }

  // in (0, 1], never zero: safe as a CDF argument under log
  double next_unit_open() { return 1.0 - next_unit(); }

 private:
  uint64_t state_;
};

// Heavy-tailed and geometric test distributions over unsigned 64-bit values,
// sampled by inverse CDF so streams are reproducible.
struct SyntheticDist {
  enum class Family : uint8_t { Lomax, Geometric, Uniform };

  Family family = Family::Lomax;
  double shape = 1.5;    // Lomax
  double scale = 1000.0; // Lomax
  double prob = 0.01;    // Geometric
  uint64_t lo = 0;       // Uniform
  uint64_t hi = ~uint64_t(0);

  static SyntheticDist lomax(double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0))
      throw InvalidConfig("lomax parameters must be positive");
    SyntheticDist d;
    d.family = Family::Lomax;
    d.shape = shape;
    d.scale = scale;
    return d;
  }

  static SyntheticDist geometric(double prob) {
    if (!(prob > 0.0) || !(prob < 1.0))
      throw InvalidConfig("geometric probability must be in (0, 1)");
    SyntheticDist d;
    d.family = Family::Geometric;
    d.prob = prob;
    return d;
  }

  static SyntheticDist uniform(uint64_t lo = 0, uint64_t hi = ~uint64_t(0)) {
    if (lo > hi) throw InvalidConfig("uniform range is empty");
    SyntheticDist d;
    d.family = Family::Uniform;
    d.lo = lo;
    d.hi = hi;
    return d;
  }

  uint64_t sample(Rng& rng) const {
    switch (family) {
      case Family::Lomax: {
        double u = rng.next_unit_open();
        double x = scale * (std::pow(u, -1.0 / shape) - 1.0);
        if (x >= 0x1.0p63) return ~uint64_t(0);
        return uint64_t(x);
      }
      case Family::Geometric: {
        double u = rng.next_unit_open();
        double trials = 1.0 + std::floor(std::log(u) / std::log1p(-prob));
        if (trials >= 0x1.0p63) return ~uint64_t(0);
        return uint64_t(trials);
      }
      case Family::Uniform: {
        uint64_t width = hi - lo;
        if (width == ~uint64_t(0)) return rng.next_u64();
        return lo + uint64_t((unsigned __int128)(rng.next_u64()) *
                             (width + 1) >>
                             64);
      }
    }
    throw InvalidConfig("unknown distribution family");
  }

  std::string name() const {
    switch (family) {
      case Family::Lomax:
        return "lomax:" + std::to_string(shape) + ":" + std::to_string(scale);
      case Family::Geometric:
        return "geometric:" + std::to_string(prob);
      case Family::Uniform:
        return "uniform:" + std::to_string(lo) + ":" + std::to_string(hi);
    }
    return "?";
  }
};

inline std::vector<uint64_t> generate(const SyntheticDist& dist, size_t n,
                                      uint64_t seed) {
  Rng rng(seed);
  std::vector<uint64_t> out(n);
  for (auto& v : out) v = dist.sample(rng);
  return out;
}

// "lomax:1.5:1000", "geometric:0.01", "uniform", "uniform:0:999"
inline SyntheticDist parse_dist_spec(const std::string& spec) {
  std::vector<std::string> parts;
  size_t at = 0;
  while (at <= spec.size()) {
    size_t colon = spec.find(':', at);
    if (colon == std::string::npos) colon = spec.size();
    parts.push_back(spec.substr(at, colon - at));
    at = colon + 1;
  }
  auto want = [&](size_t n) {
    if (parts.size() != n)
      throw InvalidConfig("bad distribution spec: " + spec);
  };
  try {
    if (parts[0] == "lomax") {
      want(3);
      return SyntheticDist::lomax(std::stod(parts[1]), std::stod(parts[2]));
    }
    if (parts[0] == "geometric") {
      want(2);
      return SyntheticDist::geometric(std::stod(parts[1]));
    }
    if (parts[0] == "uniform") {
      if (parts.size() == 1) return SyntheticDist::uniform();
      want(3);
      return SyntheticDist::uniform(std::stoull(parts[1]),
                                    std::stoull(parts[2]));
    }
  } catch (const InvalidConfig&) {
    throw;
  } catch (const std::exception&) {
    throw InvalidConfig("bad distribution spec: " + spec);
  }
  throw InvalidConfig("unknown distribution family: " + parts[0]);
}

// Plug-in entropy of the empirical value distribution, in bits per number.
inline double empirical_entropy(std::span<const uint64_t> values) {
  if (values.empty()) return 0.0;
  std::unordered_map<uint64_t, uint64_t> counts;
  counts.reserve(values.size());
  for (uint64_t v : values) ++counts[v];
  double n = double(values.size());
  double h = 0.0;
  for (const auto& [v, c] : counts) {
    double p = double(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

// ---------------------------------------------------------------------------
// Convergence study: measured size vs. entropy vs. the worst-case bound as
// the bin budget grows.
// ---------------------------------------------------------------------------

struct ConvergenceRow {
  int k = 0;                    // bin budget
  double bits_per_number = 0.0; // measured, whole container
  double entropy_bits = 0.0;    // plug-in entropy of the data
  double bound_bits = 0.0;      // entropy + binning_overhead_bound(1, k, 64)
};

inline std::vector<ConvergenceRow> convergence_report(
    const SyntheticDist& dist, size_t n, std::span<const int> bin_budgets,
    uint64_t seed) {
  std::vector<uint64_t> data = generate(dist, n, seed);
  double h = empirical_entropy(data);

  std::vector<ConvergenceRow> rows;
  for (int k : bin_budgets) {
    if (k < 4 || k > 4096 || std::popcount(unsigned(k)) != 1)
      throw InvalidConfig("bin budget must be a power of two in [4, 4096]");
    CompressorConfig cfg;
    cfg.level = std::countr_zero(unsigned(k));
    cfg.mode_override = Mode::classic();
    cfg.delta_override = DeltaEncoding::none();
    auto bytes = compress<uint64_t>(data, cfg);
    ConvergenceRow row;
    row.k = k;
    row.bits_per_number = double(bytes.size()) * 8.0 / double(n);
    row.entropy_bits = h;
    row.bound_bits = h + binning_overhead_bound(1, k, 64);
    rows.push_back(row);
  }
  return rows;
}

inline std::string convergence_csv(std::span<const ConvergenceRow> rows) {
  std::string out = "k,bits_per_number,entropy_bits,bound_bits\n";
  char line[160];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%d,%.6f,%.6f,%.6f\n", r.k,
                  r.bits_per_number, r.entropy_bits, r.bound_bits);
    out += line;
  }
  return out;
}

}  // namespace numcodec
