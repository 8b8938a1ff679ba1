#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <vector>

#include <numcodec/pipeline.hpp>

using namespace numcodec;

namespace {

uint64_t rng_state = 0x082efa98ec4e6c89ull;
uint64_t next_u64() {
  rng_state ^= rng_state << 13;
  rng_state ^= rng_state >> 7;
  rng_state ^= rng_state << 17;
  return rng_state;
}

template <class T>
void check_roundtrip(const std::vector<T>& input,
                     const CompressorConfig& cfg = {}) {
  auto bytes = compress(std::span<const T>(input), cfg);
  auto back = decompress<T>(bytes);
  REQUIRE(back.size() == input.size());
  REQUIRE(std::memcmp(back.data(), input.data(), input.size() * sizeof(T)) ==
          0);
}

std::vector<uint64_t> skewed_values(size_t n) {
  std::vector<uint64_t> out(n);
  for (auto& v : out) {
    // geometric-ish: low values common, occasional large ones
    int shift = int(next_u64() % 40);
    v = next_u64() >> (24 + shift);
  }
  return out;
}

}  // namespace

TEST_CASE("constant data compresses to almost nothing") {
  std::vector<int64_t> input(1000, -123456789);
  auto bytes = compress(std::span<const int64_t>(input));
  REQUIRE(bytes.size() < 100);
  REQUIRE(decompress<int64_t>(bytes) == input);
}

TEST_CASE("short and boundary-length inputs round trip") {
  for (size_t n : {size_t(1), size_t(2), size_t(255), size_t(256), size_t(257),
                   size_t(65536)}) {
    std::vector<uint32_t> input(n);
    for (auto& v : input) v = uint32_t(next_u64());
    check_roundtrip(input);
  }
}

TEST_CASE("every forced mode and delta round trips on every kind") {
  auto deltas = {DeltaEncoding::none(), DeltaEncoding::consecutive(1),
                 DeltaEncoding::consecutive(7), DeltaEncoding::lookback(2),
                 DeltaEncoding::lookback(256)};

  auto run = [&]<class T>(T, std::vector<Mode> modes) {
    std::vector<T> input(3000);
    for (auto& v : input) {
      uint64_t bits = next_u64();
      std::memcpy(&v, &bits, sizeof(T));
    }
    for (const Mode& mode : modes) {
      for (const DeltaEncoding& delta : deltas) {
        CompressorConfig cfg;
        cfg.mode_override = mode;
        cfg.delta_override = delta;
        check_roundtrip(input, cfg);
      }
    }
  };

  run(uint32_t{}, {Mode::classic(), Mode::int_mult(2), Mode::int_mult(101),
                   Mode::int_mult(4294967295ull)});
  run(uint64_t{}, {Mode::classic(), Mode::int_mult(101),
                   Mode::int_mult(~uint64_t(0))});
  run(int32_t{}, {Mode::classic(), Mode::int_mult(3)});
  run(int64_t{}, {Mode::classic(), Mode::int_mult(1000000)});
  run(float{}, {Mode::classic(), Mode::float_mult(0.5), Mode::float_mult(0.1),
                Mode::float_quant(1), Mode::float_quant(22)});
  run(double{}, {Mode::classic(), Mode::float_mult(0.1),
                 Mode::float_quant(16), Mode::float_quant(51)});
}

TEST_CASE("pages split at the configured size and decode independently") {
  CompressorConfig cfg;
  cfg.page_size = 1000;

  // a random walk, so the delta snapshot at each page boundary matters
  std::vector<int64_t> input(2500);
  int64_t at = 0;
  for (auto& v : input) {
    at += int64_t(next_u64() % 201) - 100;
    v = at;
  }
  auto bytes = compress(std::span<const int64_t>(input), cfg);
  REQUIRE(decompress<int64_t>(bytes) == input);

  Container c = parse_container(bytes);
  REQUIRE(c.chunks.size() == 1);
  REQUIRE(c.chunks[0].pages.size() == 3);
  REQUIRE(c.chunks[0].page_counts ==
          std::vector<uint32_t>{1000, 1000, 500});

  ChunkMeta meta = parse_chunk_meta(c.chunks[0].meta);
  REQUIRE(meta.delta == DeltaEncoding::consecutive(1));

  // pages decode in any order, each standing alone
  ParsedChunk chunk = parse_chunk(c.chunks[0].meta);
  for (size_t p = c.chunks[0].pages.size(); p-- > 0;) {
    auto nums = decompress_page<int64_t>(chunk, c.chunks[0].pages[p],
                                         c.chunks[0].page_counts[p]);
    size_t start = p * cfg.page_size;
    REQUIRE(nums.size() == c.chunks[0].page_counts[p]);
    REQUIRE(std::equal(nums.begin(), nums.end(), input.begin() + start));
  }
}

TEST_CASE("lookback state carries across page boundaries") {
  CompressorConfig cfg;
  cfg.page_size = 512;
  cfg.delta_override = DeltaEncoding::lookback(16);

  std::vector<uint64_t> input(2000);
  const uint64_t pattern[7] = {10, 99, 3, 1000000, 42, 99, 7};
  for (size_t i = 0; i < input.size(); ++i) input[i] = pattern[i % 7];

  auto bytes = compress(std::span<const uint64_t>(input), cfg);
  Container c = parse_container(bytes);
  ParsedChunk chunk = parse_chunk(c.chunks[0].meta);
  REQUIRE(c.chunks[0].pages.size() == 4);

  // decode only the last page: its snapshot must reconstruct the ring
  auto tail = decompress_page<uint64_t>(chunk, c.chunks[0].pages[3],
                                        c.chunks[0].page_counts[3]);
  REQUIRE(std::equal(tail.begin(), tail.end(), input.begin() + 3 * 512));
}

TEST_CASE("compression is deterministic") {
  auto input = skewed_values(20000);
  auto a = compress(std::span<const uint64_t>(input));
  auto b = compress(std::span<const uint64_t>(input));
  REQUIRE(a == b);

  CompressorConfig other;
  other.seed = 7;
  auto d = compress(std::span<const uint64_t>(input), other);
  REQUIRE(decompress<uint64_t>(d) == input);
}

TEST_CASE("incompressible data stays near its raw size") {
  std::vector<uint64_t> input(50000);
  for (auto& v : input) v = next_u64();
  auto bytes = compress(std::span<const uint64_t>(input));
  double raw = double(input.size()) * 8.0;
  REQUIRE(double(bytes.size()) < raw * 1.02 + 200.0);
  REQUIRE(double(bytes.size()) > raw * 0.98);
  REQUIRE(decompress<uint64_t>(bytes) == input);
}

TEST_CASE("structured data compresses well end to end") {
  // multiples of 101 with a random-walk quotient: mode and delta both help
  std::vector<uint64_t> input(50000);
  uint64_t q = 1 << 30;
  for (auto& v : input) {
    q += (next_u64() % 9) - 4;
    v = 101 * q + 55;
  }
  auto bytes = compress(std::span<const uint64_t>(input));
  REQUIRE(decompress<uint64_t>(bytes) == input);
  double bits_per_num = double(bytes.size()) * 8.0 / double(input.size());
  REQUIRE(bits_per_num < 16.0);  // vs 64 raw

  auto report = inspect_container(bytes);
  REQUIRE(report.chunks.size() == 1);
  REQUIRE(report.chunks[0].mode == Mode::int_mult(101));
  REQUIRE(report.chunks[0].delta == DeltaEncoding::consecutive(1));
}

TEST_CASE("inspection estimates payload size accurately") {
  auto input = skewed_values(100000);
  auto bytes = compress(std::span<const uint64_t>(input));
  auto report = inspect_container(bytes);

  REQUIRE(report.number_count == input.size());
  REQUIRE(report.total_bytes == bytes.size());
  REQUIRE(report.chunks.size() == 1);
  const auto& cr = report.chunks[0];
  REQUIRE(cr.kind == NumberKind::U64);
  REQUIRE(cr.number_count == input.size());
  REQUIRE(cr.page_count == 1);

  double actual = double(cr.payload_bytes) * 8.0 / double(cr.number_count);
  REQUIRE(std::abs(cr.est_bits_per_number - actual) / actual < 0.01);
}

TEST_CASE("runtime-typed decompression recovers kind and bytes") {
  std::vector<float> input(4096);
  for (auto& v : input) v = 0.25f * float(int(next_u64() % 4000) - 2000);
  auto bytes = compress(std::span<const float>(input));

  REQUIRE(container_kind(bytes) == NumberKind::F32);
  auto [kind, raw] = decompress_bytes(bytes);
  REQUIRE(kind == NumberKind::F32);
  REQUIRE(raw.size() == input.size() * sizeof(float));
  REQUIRE(std::memcmp(raw.data(), input.data(), raw.size()) == 0);

  // mixing kinds across chunks is rejected
  std::vector<uint32_t> ints(100, 3);
  auto other = compress(std::span<const uint32_t>(ints));
  Container merged = parse_container(bytes);
  Container b2 = parse_container(other);
  merged.chunks.push_back(b2.chunks[0]);
  REQUIRE_THROWS_AS(decompress_bytes(serialize_container(merged)),
                    CorruptMetadata);
}

TEST_CASE("kind mismatches are invalid configurations") {
  std::vector<uint64_t> input(100, 7);
  auto bytes = compress(std::span<const uint64_t>(input));
  REQUIRE_THROWS_AS(decompress<double>(bytes), InvalidConfig);
  REQUIRE_THROWS_AS(decompress<uint32_t>(bytes), InvalidConfig);
}

TEST_CASE("empty input produces an empty container") {
  std::vector<uint64_t> empty;
  auto bytes = compress(std::span<const uint64_t>(empty));
  REQUIRE(decompress<uint64_t>(bytes).empty());
  REQUIRE_THROWS_AS(compress_chunk(std::span<const uint64_t>(empty)),
                    InvalidConfig);
}

TEST_CASE("compressor configuration bounds are enforced") {
  std::vector<uint64_t> input(10, 1);
  std::span<const uint64_t> s(input);

  CompressorConfig cfg;
  cfg.level = -1;
  REQUIRE_THROWS_AS(compress(s, cfg), InvalidConfig);
  cfg.level = 13;
  REQUIRE_THROWS_AS(compress(s, cfg), InvalidConfig);

  cfg = {};
  cfg.page_size = 0;
  REQUIRE_THROWS_AS(compress(s, cfg), InvalidConfig);
  cfg.page_size = kMaxPageNumbers + 1;
  REQUIRE_THROWS_AS(compress(s, cfg), InvalidConfig);

  cfg = {};
  cfg.delta_override = DeltaEncoding::consecutive(8);
  REQUIRE_THROWS_AS(compress(s, cfg), InvalidConfig);

  cfg = {};
  cfg.mode_override = Mode::int_mult(1);
  REQUIRE_THROWS_AS(compress(s, cfg), InvalidConfig);

  cfg = {};
  cfg.mode_override = Mode::float_mult(0.5);  // float mode, integer data
  REQUIRE_THROWS_AS(compress(s, cfg), InvalidModeForData);

  // a chunk cannot exceed what its pages can address
  cfg = {};
  cfg.page_size = 1;
  std::vector<uint64_t> big(65536, 1);
  REQUIRE_THROWS_AS(compress_chunk(std::span<const uint64_t>(big), cfg),
                    InvalidConfig);
}

TEST_CASE("page decode validates its count argument") {
  std::vector<uint64_t> input(1000);
  for (auto& v : input) v = next_u64() % 100;
  auto bytes = compress(std::span<const uint64_t>(input));
  Container c = parse_container(bytes);
  ParsedChunk chunk = parse_chunk(c.chunks[0].meta);
  const auto& page = c.chunks[0].pages[0];

  REQUIRE_THROWS_AS(decompress_page<uint64_t>(chunk, page, 0), CorruptPage);
  REQUIRE_THROWS_AS(decompress_page<uint64_t>(chunk, page, 1300), CorruptPage);
  REQUIRE_THROWS_AS(decompress_page<uint64_t>(chunk, page, kMaxPageNumbers + 1),
                    CorruptPage);
  // a count off by a whole batch disagrees with the stored batch count
  REQUIRE_THROWS_AS(decompress_page<uint64_t>(chunk, page, 700), CorruptPage);
}

TEST_CASE("pages with trailing bytes are rejected") {
  std::vector<uint64_t> input(500, 42);
  auto bytes = compress(std::span<const uint64_t>(input));
  Container c = parse_container(bytes);
  c.chunks[0].pages[0].push_back(0xff);
  c.chunks[0].pages[0].push_back(0xff);
  auto damaged = serialize_container(c);
  REQUIRE_THROWS_AS(decompress<uint64_t>(damaged), CorruptPage);
}

TEST_CASE("bin budget follows level and data size") {
  REQUIRE(max_bins_for(8, 1000000) == 256);
  REQUIRE(max_bins_for(0, 1000000) == 1);
  REQUIRE(max_bins_for(12, 1000000) == 4096);
  REQUIRE(max_bins_for(8, 100) == 7);
  REQUIRE(max_bins_for(8, 1) == 1);
}

TEST_CASE("all levels round trip") {
  auto input = skewed_values(5000);
  for (int level = 0; level <= 12; level += 3) {
    CompressorConfig cfg;
    cfg.level = level;
    check_roundtrip(input, cfg);
  }
}
