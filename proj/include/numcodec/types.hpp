#pragma once

#include <cstdint>
#include <string>
#include <type_traits>

#include "error.hpp"

namespace numcodec {

// Every supported number type maps onto an unsigned latent of the same bit
// width. All internal machinery (binning, deltas, entropy coding) works on
// latents only.
enum class NumberKind : uint8_t {
  U32 = 0,
  U64 = 1,
  I32 = 2,
  I64 = 3,
  F32 = 4,
  F64 = 5,
};

inline constexpr int kNumberKindCount = 6;

constexpr int kind_bit_width(NumberKind k) {
  switch (k) {
    case NumberKind::U32:
    case NumberKind::I32:
    case NumberKind::F32:
      return 32;
    default:
      return 64;
  }
}

constexpr bool kind_is_float(NumberKind k) {
  return k == NumberKind::F32 || k == NumberKind::F64;
}

constexpr bool kind_is_signed_int(NumberKind k) {
  return k == NumberKind::I32 || k == NumberKind::I64;
}

constexpr bool kind_is_int(NumberKind k) { return !kind_is_float(k); }

inline const char* kind_name(NumberKind k) {
  switch (k) {
    case NumberKind::U32: return "u32";
    case NumberKind::U64: return "u64";
    case NumberKind::I32: return "i32";
    case NumberKind::I64: return "i64";
    case NumberKind::F32: return "f32";
    default: return "f64";
  }
}

inline NumberKind kind_from_name(const std::string& name) {
  if (name == "u32") return NumberKind::U32;
  if (name == "u64") return NumberKind::U64;
  if (name == "i32") return NumberKind::I32;
  if (name == "i64") return NumberKind::I64;
  if (name == "f32") return NumberKind::F32;
  if (name == "f64") return NumberKind::F64;
  throw InvalidConfig("unknown number kind: " + name);
}

template <class T>
struct NumberTraits;

template <>
struct NumberTraits<uint32_t> {
  using Latent = uint32_t;
  static constexpr NumberKind kind = NumberKind::U32;
};
template <>
struct NumberTraits<uint64_t> {
  using Latent = uint64_t;
  static constexpr NumberKind kind = NumberKind::U64;
};
template <>
struct NumberTraits<int32_t> {
  using Latent = uint32_t;
  static constexpr NumberKind kind = NumberKind::I32;
};
template <>
struct NumberTraits<int64_t> {
  using Latent = uint64_t;
  static constexpr NumberKind kind = NumberKind::I64;
};
template <>
struct NumberTraits<float> {
  using Latent = uint32_t;
  static constexpr NumberKind kind = NumberKind::F32;
};
template <>
struct NumberTraits<double> {
  using Latent = uint64_t;
  static constexpr NumberKind kind = NumberKind::F64;
};

template <class T>
using latent_t = typename NumberTraits<T>::Latent;

template <class T>
inline constexpr NumberKind kind_of = NumberTraits<T>::kind;

template <class T>
inline constexpr int bit_width_of = int(sizeof(T) * 8);

// Calls f with a default-constructed value of the C++ type behind `kind`,
// so callers can deduce T from the argument.
template <class F>
decltype(auto) dispatch_kind(NumberKind kind, F&& f) {
  switch (kind) {
    case NumberKind::U32: return f(uint32_t{});
    case NumberKind::U64: return f(uint64_t{});
    case NumberKind::I32: return f(int32_t{});
    case NumberKind::I64: return f(int64_t{});
    case NumberKind::F32: return f(float{});
    default: return f(double{});
  }
}

}  // namespace numcodec
