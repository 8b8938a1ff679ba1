#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "types.hpp"

namespace numcodec {

// ---------------------------------------------------------------------------
// Classic number <-> latent bijection. Order preserving for every kind:
//   unsigned  : identity
//   signed    : flip the sign bit (add 2^(B-1) mod 2^B)
//   float     : negative values (sign bit set) have all bits flipped,
//               others have the sign bit flipped. Total order over all bit
//               patterns, NaNs included.
// ---------------------------------------------------------------------------

inline uint32_t classic_to_latent(uint32_t x) { return x; }
inline uint64_t classic_to_latent(uint64_t x) { return x; }
inline uint32_t classic_to_latent(int32_t x) {
  return uint32_t(x) ^ (uint32_t(1) << 31);
}
inline uint64_t classic_to_latent(int64_t x) {
  return uint64_t(x) ^ (uint64_t(1) << 63);
}
inline uint32_t classic_to_latent(float x) {
  uint32_t u = std::bit_cast<uint32_t>(x);
  return (u >> 31) ? ~u : (u ^ (uint32_t(1) << 31));
}
inline uint64_t classic_to_latent(double x) {
  uint64_t u = std::bit_cast<uint64_t>(x);
  return (u >> 63) ? ~u : (u ^ (uint64_t(1) << 63));
}

template <class T>
T latent_to_classic(latent_t<T> l) {
  if constexpr (std::is_same_v<T, uint32_t> || std::is_same_v<T, uint64_t>) {
    return l;
  } else if constexpr (std::is_same_v<T, int32_t>) {
    return int32_t(l ^ (uint32_t(1) << 31));
  } else if constexpr (std::is_same_v<T, int64_t>) {
    return int64_t(l ^ (uint64_t(1) << 63));
  } else if constexpr (std::is_same_v<T, float>) {
    uint32_t u = (l >> 31) ? (l ^ (uint32_t(1) << 31)) : ~l;
    return std::bit_cast<float>(u);
  } else {
    static_assert(std::is_same_v<T, double>);
    uint64_t u = (l >> 63) ? (l ^ (uint64_t(1) << 63)) : ~l;
    return std::bit_cast<double>(u);
  }
}

// ---------------------------------------------------------------------------
// Modes
// ---------------------------------------------------------------------------

struct Mode {
  enum class Tag : uint8_t {
    Classic = 0,
    IntMult = 1,     // integers that are near-multiples of m (m >= 2)
    FloatMult = 2,   // floats that are near-multiples of a real base
    FloatQuant = 3,  // floats with k low mantissa bits carrying little info
  };

  Tag tag = Tag::Classic;
  uint64_t mult = 0;       // IntMult m
  double base = 0.0;       // FloatMult base
  uint8_t quant_bits = 0;  // FloatQuant k

  static Mode classic() { return Mode{}; }
  static Mode int_mult(uint64_t m) {
    Mode mo;
    mo.tag = Tag::IntMult;
    mo.mult = m;
    return mo;
  }
  static Mode float_mult(double base) {
    Mode mo;
    mo.tag = Tag::FloatMult;
    mo.base = base;
    return mo;
  }
  static Mode float_quant(uint8_t k) {
    Mode mo;
    mo.tag = Tag::FloatQuant;
    mo.quant_bits = k;
    return mo;
  }

  int latent_var_count() const { return tag == Tag::Classic ? 1 : 2; }

  friend bool operator==(const Mode&, const Mode&) = default;
};

inline const char* mode_tag_name(Mode::Tag t) {
  switch (t) {
    case Mode::Tag::Classic: return "classic";
    case Mode::Tag::IntMult: return "int_mult";
    case Mode::Tag::FloatMult: return "float_mult";
    default: return "float_quant";
  }
}

constexpr int mantissa_bits(NumberKind k) {
  return k == NumberKind::F32 ? 23 : 52;
}

// Checks mode/kind applicability and parameter ranges. FloatMult bases are
// snapped to the precision of the kind so that split, join and the
// serialized form all agree on one value.
inline void validate_mode(Mode& mode, NumberKind kind) {
  switch (mode.tag) {
    case Mode::Tag::Classic:
      return;
    case Mode::Tag::IntMult:
      if (!kind_is_int(kind))
        throw InvalidModeForData("IntMult requires an integer kind");
      if (mode.mult < 2) throw InvalidConfig("IntMult multiplier must be >= 2");
      if (kind_bit_width(kind) == 32 && mode.mult > 0xffffffffull)
        throw InvalidConfig("IntMult multiplier does not fit a 32-bit latent");
      return;
    case Mode::Tag::FloatMult:
      if (!kind_is_float(kind))
        throw InvalidModeForData("FloatMult requires a float kind");
      if (kind == NumberKind::F32) mode.base = double(float(mode.base));
      if (!std::isfinite(mode.base) || mode.base == 0.0)
        throw InvalidConfig("FloatMult base must be finite and nonzero");
      return;
    case Mode::Tag::FloatQuant:
      if (!kind_is_float(kind))
        throw InvalidModeForData("FloatQuant requires a float kind");
      if (mode.quant_bits < 1 || mode.quant_bits >= mantissa_bits(kind))
        throw InvalidConfig("FloatQuant bit count out of range");
      return;
  }
}

template <class L>
struct LatentVars {
  std::vector<L> primary;
  std::optional<std::vector<L>> secondary;
};

namespace detail {

// round-half-even multiplier for FloatMult, clamped into the signed range
// of the latent width. NaN quotients map to multiplier 0; the secondary
// latent absorbs whatever the multiplier misses, so the pair stays exact.
inline int64_t round_multiplier(double q) {
  if (std::isnan(q)) return 0;
  if (q >= 9223372036854775808.0) return std::numeric_limits<int64_t>::max();
  if (q <= -9223372036854775808.0) return std::numeric_limits<int64_t>::min();
  return int64_t(std::rint(q));
}

inline int32_t round_multiplier(float q) {
  if (std::isnan(q)) return 0;
  if (q >= 2147483648.0f) return std::numeric_limits<int32_t>::max();
  if (q <= -2147483648.0f) return std::numeric_limits<int32_t>::min();
  return int32_t(std::rint(q));
}

template <class T>
struct float_mult_traits;

template <>
struct float_mult_traits<float> {
  using SignedMult = int32_t;
};
template <>
struct float_mult_traits<double> {
  using SignedMult = int64_t;
};

}  // namespace detail

// Splits numbers into one or two latent variables according to `mode`.
// join(split(x)) == x bit-exactly for every input, NaN payloads included.
template <class T>
LatentVars<latent_t<T>> split(std::span<const T> numbers, const Mode& mode) {
  using L = latent_t<T>;
  constexpr int B = bit_width_of<T>;
  constexpr L kHalf = L(1) << (B - 1);

  LatentVars<L> out;
  out.primary.resize(numbers.size());

  switch (mode.tag) {
    case Mode::Tag::Classic: {
      for (size_t i = 0; i < numbers.size(); ++i)
        out.primary[i] = classic_to_latent(numbers[i]);
      return out;
    }
    case Mode::Tag::IntMult: {
      if constexpr (std::is_floating_point_v<T>) {
        throw InvalidModeForData("IntMult cannot split float numbers");
      } else {
        L m = L(mode.mult);
        if (m < 2) throw InvalidConfig("IntMult multiplier must be >= 2");
        out.secondary.emplace(numbers.size());
        for (size_t i = 0; i < numbers.size(); ++i) {
          L u = classic_to_latent(numbers[i]);
          out.primary[i] = u / m;
          (*out.secondary)[i] = u % m;
        }
        return out;
      }
    }
    case Mode::Tag::FloatMult: {
      if constexpr (!std::is_floating_point_v<T>) {
        throw InvalidModeForData("FloatMult requires float numbers");
      } else {
        T base = T(mode.base);
        if (!std::isfinite(base) || base == T(0))
          throw InvalidConfig("FloatMult base must be finite and nonzero");
        out.secondary.emplace(numbers.size());
        for (size_t i = 0; i < numbers.size(); ++i) {
          T x = numbers[i];
          auto mult = detail::round_multiplier(x / base);
          L approx = classic_to_latent(T(mult) * base);
          L ulp_gap = L(classic_to_latent(x) - approx);  // wrapping
          out.primary[i] = L(mult) ^ kHalf;              // order-preserving
          (*out.secondary)[i] = L(ulp_gap + kHalf);
        }
        return out;
      }
    }
    case Mode::Tag::FloatQuant: {
      if constexpr (!std::is_floating_point_v<T>) {
        throw InvalidModeForData("FloatQuant requires float numbers");
      } else {
        unsigned k = mode.quant_bits;
        if (k < 1 || int(k) >= mantissa_bits(kind_of<T>))
          throw InvalidConfig("FloatQuant bit count out of range");
        out.secondary.emplace(numbers.size());
        L mask = (L(1) << k) - 1;
        for (size_t i = 0; i < numbers.size(); ++i) {
          L u = classic_to_latent(numbers[i]);
          out.primary[i] = u >> k;
          (*out.secondary)[i] = u & mask;
        }
        return out;
      }
    }
  }
  throw InvalidConfig("unknown mode tag");
}

// Inverse of split.
template <class T>
std::vector<T> join(const LatentVars<latent_t<T>>& vars, const Mode& mode) {
  using L = latent_t<T>;
  constexpr int B = bit_width_of<T>;
  constexpr L kHalf = L(1) << (B - 1);

  size_t n = vars.primary.size();
  if (mode.latent_var_count() == 2) {
    if (!vars.secondary.has_value())
      throw CorruptLatents("mode requires a secondary latent variable");
    if (vars.secondary->size() != n)
      throw CorruptLatents("latent variable lengths differ");
  }

  std::vector<T> out(n);
  switch (mode.tag) {
    case Mode::Tag::Classic: {
      for (size_t i = 0; i < n; ++i)
        out[i] = latent_to_classic<T>(vars.primary[i]);
      return out;
    }
    case Mode::Tag::IntMult: {
      if constexpr (std::is_floating_point_v<T>) {
        throw InvalidModeForData("IntMult cannot join float numbers");
      } else {
        L m = L(mode.mult);
        for (size_t i = 0; i < n; ++i) {
          L u = L(vars.primary[i] * m + (*vars.secondary)[i]);  // wrapping
          out[i] = latent_to_classic<T>(u);
        }
        return out;
      }
    }
    case Mode::Tag::FloatMult: {
      if constexpr (!std::is_floating_point_v<T>) {
        throw InvalidModeForData("FloatMult requires float numbers");
      } else {
        using SM = typename detail::float_mult_traits<T>::SignedMult;
        T base = T(mode.base);
        for (size_t i = 0; i < n; ++i) {
          SM mult = SM(vars.primary[i] ^ kHalf);
          L approx = classic_to_latent(T(mult) * base);
          L u = L(approx + ((*vars.secondary)[i] - kHalf));  // wrapping
          out[i] = latent_to_classic<T>(u);
        }
        return out;
      }
    }
    case Mode::Tag::FloatQuant: {
      if constexpr (!std::is_floating_point_v<T>) {
        throw InvalidModeForData("FloatQuant requires float numbers");
      } else {
        unsigned k = mode.quant_bits;
        for (size_t i = 0; i < n; ++i) {
          L u = (vars.primary[i] << k) | (*vars.secondary)[i];
          out[i] = latent_to_classic<T>(u);
        }
        return out;
      }
    }
  }
  throw InvalidConfig("unknown mode tag");
}

}  // namespace numcodec
