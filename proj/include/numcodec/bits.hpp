#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "error.hpp"

namespace numcodec {

// Bit order is LSB-first within each byte: the first bit written lands in
// bit 0 of byte 0. The final byte is zero-padded.

class BitWriter {
 public:
  void write_bits(uint64_t value, unsigned nbits) {
    if (nbits == 0) return;
    if (nbits < 64) value &= (uint64_t(1) << nbits) - 1;
    size_t idx = size_t(bit_len_ >> 3);
    unsigned off = unsigned(bit_len_ & 7);
    bit_len_ += nbits;
    bytes_.resize(size_t((bit_len_ + 7) >> 3), 0);
    bytes_[idx] |= uint8_t((value & 0xff) << off);
    unsigned written = 8 - off;
    value >>= written;
    while (written < nbits) {
      bytes_[++idx] |= uint8_t(value & 0xff);
      value >>= 8;
      written += 8;
    }
  }

  void append(const BitWriter& other) {
    uint64_t left = other.bit_len_;
    size_t idx = 0;
    while (left >= 8) {
      write_bits(other.bytes_[idx++], 8);
      left -= 8;
    }
    if (left > 0) write_bits(other.bytes_[idx], unsigned(left));
  }

  uint64_t bit_length() const { return bit_len_; }

  // Zero-padded to a whole number of bytes.
  const std::vector<uint8_t>& bytes() const { return bytes_; }
  std::vector<uint8_t> take_bytes() { return std::move(bytes_); }

  void clear() {
    bytes_.clear();
    bit_len_ = 0;
  }

 private:
  std::vector<uint8_t> bytes_;
  uint64_t bit_len_ = 0;
};

// What to throw when a read runs past the end of the buffer; metadata and
// page payloads surface different error types.
enum class BitstreamKind : uint8_t { Metadata, Page };

class BitReader {
 public:
  BitReader(std::span<const uint8_t> data, BitstreamKind kind)
      : data_(data.data()),
        nbytes_(data.size()),
        bit_end_(uint64_t(data.size()) * 8),
        kind_(kind) {}

  uint64_t read_bits(unsigned nbits) {
    if (nbits == 0) return 0;
    if (nbits > 57) {
      uint64_t lo = read_bits(32);
      uint64_t hi = read_bits(nbits - 32);
      return lo | (hi << 32);
    }
    if (bit_pos_ + nbits > bit_end_) fail();
    size_t idx = size_t(bit_pos_ >> 3);
    unsigned off = unsigned(bit_pos_ & 7);
    uint64_t window = 0;
    size_t avail = nbytes_ - idx;
    std::memcpy(&window, data_ + idx, avail < 8 ? avail : 8);
    bit_pos_ += nbits;
    return (window >> off) & ((uint64_t(1) << nbits) - 1);
  }

  uint64_t bit_position() const { return bit_pos_; }
  uint64_t bits_remaining() const { return bit_end_ - bit_pos_; }

  [[noreturn]] void fail() const {
    if (kind_ == BitstreamKind::Metadata)
      throw CorruptMetadata("metadata bitstream ended early");
    throw CorruptPage("page bitstream ended early");
  }

 private:
  const uint8_t* data_;
  size_t nbytes_;
  uint64_t bit_pos_ = 0;
  uint64_t bit_end_;
  BitstreamKind kind_;
};

}  // namespace numcodec
