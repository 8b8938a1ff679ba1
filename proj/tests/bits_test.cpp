#include <catch2/catch_amalgamated.hpp>

#include <numcodec/bits.hpp>

using namespace numcodec;

TEST_CASE("bit writer packs LSB-first within each byte") {
  BitWriter w;
  w.write_bits(0b1, 1);
  w.write_bits(0b0, 1);
  w.write_bits(0b11, 2);
  w.write_bits(0b1010, 4);
  // bits in order 1,0,1,1,0,1,0,1 -> byte 0b10101101
  REQUIRE(w.bytes() == std::vector<uint8_t>{0xad});
  REQUIRE(w.bit_length() == 8);
}

TEST_CASE("bit writer crosses byte boundaries") {
  BitWriter w;
  w.write_bits(0x1ff, 9);   // nine ones
  w.write_bits(0x0, 3);
  w.write_bits(0xf, 4);
  REQUIRE(w.bytes() == std::vector<uint8_t>{0xff, 0xf1});
  REQUIRE(w.bit_length() == 16);
}

TEST_CASE("bit writer handles full 64-bit values") {
  BitWriter w;
  w.write_bits(0x0123456789abcdefull, 64);
  REQUIRE(w.bytes() ==
          std::vector<uint8_t>{0xef, 0xcd, 0xab, 0x89, 0x67, 0x45, 0x23, 0x01});
}

TEST_CASE("bit writer masks values wider than the field") {
  BitWriter w;
  w.write_bits(0xff, 3);  // only low three bits land
  w.write_bits(0, 5);
  REQUIRE(w.bytes() == std::vector<uint8_t>{0x07});
}

TEST_CASE("zero-width writes are no-ops") {
  BitWriter w;
  w.write_bits(0xffff, 0);
  REQUIRE(w.bit_length() == 0);
  REQUIRE(w.bytes().empty());
}

TEST_CASE("append splices at unaligned positions") {
  BitWriter a;
  a.write_bits(0b101, 3);
  BitWriter b;
  b.write_bits(0xabcd, 16);
  b.write_bits(0b11, 2);
  a.append(b);
  REQUIRE(a.bit_length() == 21);

  BitReader r(a.bytes(), BitstreamKind::Metadata);
  REQUIRE(r.read_bits(3) == 0b101);
  REQUIRE(r.read_bits(16) == 0xabcd);
  REQUIRE(r.read_bits(2) == 0b11);
}

TEST_CASE("reader reproduces an arbitrary write sequence") {
  BitWriter w;
  struct Field {
    uint64_t value;
    unsigned width;
  };
  std::vector<Field> fields;
  uint64_t state = 12345;
  for (int i = 0; i < 500; ++i) {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    unsigned width = 1 + unsigned((state >> 32) % 64);
    uint64_t value =
        width == 64 ? state : state & ((uint64_t(1) << width) - 1);
    fields.push_back({value, width});
    w.write_bits(value, width);
  }
  BitReader r(w.bytes(), BitstreamKind::Page);
  for (const auto& f : fields) REQUIRE(r.read_bits(f.width) == f.value);
}

TEST_CASE("reading past the end throws the stream's error type") {
  BitWriter w;
  w.write_bits(0xab, 8);
  {
    BitReader r(w.bytes(), BitstreamKind::Metadata);
    r.read_bits(5);
    REQUIRE_THROWS_AS(r.read_bits(4), CorruptMetadata);
  }
  {
    BitReader r(w.bytes(), BitstreamKind::Page);
    r.read_bits(5);
    REQUIRE_THROWS_AS(r.read_bits(4), CorruptPage);
  }
}

TEST_CASE("reader tracks position and remaining bits") {
  BitWriter w;
  w.write_bits(0, 13);
  BitReader r(w.bytes(), BitstreamKind::Page);
  REQUIRE(r.bits_remaining() == 16);  // rounded up to whole bytes
  r.read_bits(10);
  REQUIRE(r.bit_position() == 10);
  REQUIRE(r.bits_remaining() == 6);
}

TEST_CASE("reads above 57 bits split correctly") {
  BitWriter w;
  w.write_bits(0b1, 1);
  w.write_bits(0xfedcba9876543210ull, 64);
  BitReader r(w.bytes(), BitstreamKind::Page);
  REQUIRE(r.read_bits(1) == 1);
  REQUIRE(r.read_bits(64) == 0xfedcba9876543210ull);
}
