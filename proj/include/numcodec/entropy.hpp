#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "bits.hpp"
#include "error.hpp"

namespace numcodec {

inline constexpr size_t kBatchSize = 256;
inline constexpr int kAnsLanes = 4;
inline constexpr int kMinSizeLog = 1;
inline constexpr int kMaxSizeLog = 14;

// Table size rule: enough resolution that quantization waste stays small,
// bounded so tables stay cache-resident.
inline int ans_size_log_for(size_t bin_count) {
  int ceil_log = bin_count <= 1 ? 0 : std::bit_width(bin_count - 1);
  return std::clamp(ceil_log + 2, 4, 12);
}

// Normalized symbol weights summing to 1 << size_log, every weight >= 1.
struct AnsSpec {
  uint8_t size_log = 0;
  std::vector<uint32_t> weights;

  uint32_t table_size() const { return uint32_t(1) << size_log; }

  friend bool operator==(const AnsSpec&, const AnsSpec&) = default;
};

// Largest-remainder apportionment of raw counts onto 2^size_log slots with a
// floor of one slot per symbol. The heaviest symbol keeps (weakly) the
// largest weight.
inline AnsSpec build_ans_spec(std::span<const uint64_t> raw_weights,
                              int size_log) {
  if (size_log < kMinSizeLog || size_log > kMaxSizeLog)
    throw InvalidConfig("ans size_log out of range");
  size_t k = raw_weights.size();
  uint32_t total_slots = uint32_t(1) << size_log;
  if (k == 0) throw InvalidConfig("ans spec needs at least one symbol");
  if (k > total_slots)
    throw InvalidConfig("more symbols than ans table slots");

  uint64_t total = 0;
  for (uint64_t w : raw_weights) {
    if (w == 0) throw InvalidConfig("ans raw weights must be positive");
    total += w;
  }

  AnsSpec spec;
  spec.size_log = uint8_t(size_log);
  spec.weights.resize(k);

  std::vector<double> remainders(k);
  int64_t assigned = 0;
  for (size_t s = 0; s < k; ++s) {
    double quota = double(raw_weights[s]) * double(total_slots) / double(total);
    uint32_t w = uint32_t(quota);
    double rem = quota - double(w);
    if (w == 0) {
      w = 1;
      rem = -1.0;  // already above quota; last in line for leftovers
    }
    spec.weights[s] = w;
    remainders[s] = rem;
    assigned += w;
  }

  if (assigned < int64_t(total_slots)) {
    std::vector<uint32_t> order(k);
    for (size_t s = 0; s < k; ++s) order[s] = uint32_t(s);
    std::stable_sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
      return remainders[a] > remainders[b];
    });
    size_t at = 0;
    while (assigned < int64_t(total_slots)) {
      spec.weights[order[at % k]]++;
      ++assigned;
      ++at;
    }
  } else {
    // Floor-of-one pushed us over; take back from the currently largest
    // weight. Ties prefer the smaller raw count (the most over-represented
    // symbol), then the later index, so the first raw argmax keeps a
    // maximal weight throughout.
    while (assigned > int64_t(total_slots)) {
      size_t largest = 0;
      for (size_t s = 1; s < k; ++s) {
        if (spec.weights[s] > spec.weights[largest] ||
            (spec.weights[s] == spec.weights[largest] &&
             raw_weights[s] <= raw_weights[largest]))
          largest = s;
      }
      if (spec.weights[largest] <= 1)
        throw InvalidConfig("cannot normalize ans weights");
      spec.weights[largest]--;
      --assigned;
    }
  }
  return spec;
}

// Encode and decode views of one coding table. States live in
// [table_size, 2 * table_size).
struct AnsTable {
  uint8_t size_log = 0;
  uint32_t size = 0;

  // per symbol
  std::vector<uint32_t> weight;
  std::vector<uint32_t> cum;       // start into state_of_sub
  std::vector<uint8_t> nb_base;    // size_log - floor(log2 w) bits
  std::vector<uint32_t> threshold; // states >= this emit nb_base bits

  // flattened per (symbol, sub - weight): next encoder state
  std::vector<uint32_t> state_of_sub;

  // per decode slot (state - size)
  std::vector<uint16_t> slot_symbol;
  std::vector<uint16_t> slot_sub;   // value in [w, 2w)
  std::vector<uint8_t> slot_nbits;  // bits to refill after emitting symbol
};

// Builds the shared table: symbols are spread over the slots by a fixed
// stride, then slot t of symbol s (in slot order) represents sub-state
// w_s + t.
inline AnsTable build_ans_table(const AnsSpec& spec) {
  AnsTable t;
  t.size_log = spec.size_log;
  t.size = spec.table_size();
  size_t k = spec.weights.size();

  uint32_t checksum = 0;
  for (uint32_t w : spec.weights) checksum += w;
  if (checksum != t.size)
    throw CorruptMetadata("ans weights do not sum to the table size");

  std::vector<uint16_t> spread(t.size);
  uint32_t step = (t.size >> 1) + (t.size >> 3) + 3;
  if ((step & 1) == 0) step |= 1;  // keep the stride coprime to the size
  uint32_t pos = 0;
  for (size_t s = 0; s < k; ++s) {
    for (uint32_t i = 0; i < spec.weights[s]; ++i) {
      spread[pos] = uint16_t(s);
      pos = (pos + step) & (t.size - 1);
    }
  }

  t.weight.assign(spec.weights.begin(), spec.weights.end());
  t.cum.resize(k);
  t.nb_base.resize(k);
  t.threshold.resize(k);
  uint32_t acc = 0;
  for (size_t s = 0; s < k; ++s) {
    t.cum[s] = acc;
    acc += t.weight[s];
    uint32_t nb = uint32_t(t.size_log) - (std::bit_width(t.weight[s]) - 1);
    t.nb_base[s] = uint8_t(nb);
    t.threshold[s] = t.weight[s] << nb;
  }

  t.state_of_sub.resize(t.size);
  t.slot_symbol.resize(t.size);
  t.slot_sub.resize(t.size);
  t.slot_nbits.resize(t.size);
  std::vector<uint32_t> next_sub(k);
  for (size_t s = 0; s < k; ++s) next_sub[s] = t.weight[s];
  for (uint32_t slot = 0; slot < t.size; ++slot) {
    uint16_t s = spread[slot];
    uint32_t sub = next_sub[s]++;
    t.state_of_sub[t.cum[s] + (sub - t.weight[s])] = t.size + slot;
    t.slot_symbol[slot] = s;
    t.slot_sub[slot] = uint16_t(sub);
    t.slot_nbits[slot] =
        uint8_t(uint32_t(t.size_log) - (std::bit_width(sub) - 1));
  }
  return t;
}

struct AnsEncoded {
  // tANS code bits, one fragment per batch of kBatchSize symbols
  std::vector<BitWriter> batch_bits;
  // encoder's final states == decoder's initial states, lanes 0..3
  std::array<uint32_t, kAnsLanes> decode_states;
};

// Encodes symbols in reverse (last to first); symbol i belongs to lane
// i % 4. Within each batch fragment the bit units are laid out in decode
// order, so a forward reader consumes them naturally.
inline AnsEncoded ans_encode_reverse(std::span<const uint16_t> symbols,
                                     const AnsTable& t) {
  AnsEncoded out;
  size_t n = symbols.size();
  size_t nbatches = (n + kBatchSize - 1) / kBatchSize;
  out.batch_bits.resize(nbatches);
  out.decode_states.fill(t.size);

  struct Unit {
    uint32_t bits;
    uint8_t nbits;
  };
  std::vector<Unit> units;

  size_t i = n;
  for (size_t b = nbatches; b-- > 0;) {
    size_t batch_lo = b * kBatchSize;
    units.clear();
    while (i > batch_lo) {
      --i;
      uint16_t s = symbols[i];
      uint32_t& x = out.decode_states[i & 3];
      uint32_t nb = t.nb_base[s] - (x < t.threshold[s] ? 1 : 0);
      units.push_back(Unit{x & ((uint32_t(1) << nb) - 1), uint8_t(nb)});
      uint32_t sub = x >> nb;
      x = t.state_of_sub[t.cum[s] + (sub - t.weight[s])];
    }
    BitWriter& w = out.batch_bits[b];
    for (size_t u = units.size(); u-- > 0;)
      w.write_bits(units[u].bits, units[u].nbits);
  }
  return out;
}

// Streaming decoder for one latent variable of one page. Lane states carry
// across batches; each batch's code bits are a contiguous bit run.
class AnsDecoder {
 public:
  AnsDecoder(const AnsTable& table, std::array<uint32_t, kAnsLanes> states)
      : t_(table), states_(states) {
    for (uint32_t s : states_)
      if (s < t_.size || s >= 2 * t_.size)
        throw CorruptPage("ans state out of range");
  }

  void decode_batch(BitReader& reader, std::span<uint16_t> out) {
    for (size_t i = 0; i < out.size(); ++i) {
      uint32_t& x = states_[i & 3];
      uint32_t slot = x - t_.size;
      uint16_t s = t_.slot_symbol[slot];
      uint32_t nb = t_.slot_nbits[slot];
      x = (uint32_t(t_.slot_sub[slot]) << nb) |
          uint32_t(reader.read_bits(nb));
      out[i] = s;
    }
  }

  const std::array<uint32_t, kAnsLanes>& states() const { return states_; }

 private:
  const AnsTable& t_;
  std::array<uint32_t, kAnsLanes> states_;
};

}  // namespace numcodec
