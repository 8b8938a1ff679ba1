// Command-line front end: compress / decompress / inspect / bench / synth.
//
// Exit codes: 0 success, 1 usage or configuration errors, 2 corrupt or
// unsupported input streams.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <numcodec/numcodec.hpp>

namespace nc = numcodec;

namespace {

// ---------------------------------------------------------------------------
// I/O helpers; "-" means stdin / stdout.
// ---------------------------------------------------------------------------

std::vector<uint8_t> read_input(const std::string& path) {
  std::vector<uint8_t> data;
  if (path == "-") {
    char buf[1 << 16];
    size_t got;
    while ((got = std::fread(buf, 1, sizeof(buf), stdin)) > 0)
      data.insert(data.end(), buf, buf + got);
    return data;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw nc::InvalidConfig("cannot open input file: " + path);
  in.seekg(0, std::ios::end);
  data.resize(size_t(in.tellg()));
  in.seekg(0);
  in.read(reinterpret_cast<char*>(data.data()),
          std::streamsize(data.size()));
  if (!in) throw nc::InvalidConfig("failed reading input file: " + path);
  return data;
}

void write_output(const std::string& path, const std::vector<uint8_t>& data) {
  if (path == "-") {
    if (std::fwrite(data.data(), 1, data.size(), stdout) != data.size())
      throw nc::InvalidConfig("failed writing to stdout");
    std::fflush(stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw nc::InvalidConfig("cannot open output file: " + path);
  out.write(reinterpret_cast<const char*>(data.data()),
            std::streamsize(data.size()));
  if (!out) throw nc::InvalidConfig("failed writing output file: " + path);
}

template <class T>
std::vector<T> typed_view(const std::vector<uint8_t>& bytes) {
  if (bytes.size() % sizeof(T) != 0)
    throw nc::InvalidConfig("input size is not a multiple of the element size");
  std::vector<T> out(bytes.size() / sizeof(T));
  std::memcpy(out.data(), bytes.data(), bytes.size());
  return out;
}

// ---------------------------------------------------------------------------
// Option spellings
// ---------------------------------------------------------------------------

std::optional<nc::Mode> parse_mode_spec(const std::string& s) {
  if (s == "auto") return std::nullopt;
  if (s == "classic") return nc::Mode::classic();
  auto tail = [&](const char* prefix) -> std::optional<std::string> {
    size_t len = std::strlen(prefix);
    if (s.rfind(prefix, 0) == 0) return s.substr(len);
    return std::nullopt;
  };
  try {
    if (auto t = tail("int-mult:")) return nc::Mode::int_mult(std::stoull(*t));
    if (auto t = tail("intmult:")) return nc::Mode::int_mult(std::stoull(*t));
    if (auto t = tail("float-mult:")) return nc::Mode::float_mult(std::stod(*t));
    if (auto t = tail("floatmult:")) return nc::Mode::float_mult(std::stod(*t));
    if (auto t = tail("float-quant:"))
      return nc::Mode::float_quant(uint8_t(std::stoi(*t)));
    if (auto t = tail("floatquant:"))
      return nc::Mode::float_quant(uint8_t(std::stoi(*t)));
  } catch (const nc::Error&) {
    throw;
  } catch (const std::exception&) {
    throw nc::InvalidConfig("bad mode spec: " + s);
  }
  throw nc::InvalidConfig("bad mode spec: " + s);
}

std::optional<nc::DeltaEncoding> parse_delta_spec(const std::string& s) {
  if (s == "auto") return std::nullopt;
  if (s == "none") return nc::DeltaEncoding::none();
  if (s == "lookback") return nc::DeltaEncoding::lookback();
  try {
    if (s.rfind("consecutive:", 0) == 0)
      return nc::DeltaEncoding::consecutive(uint8_t(std::stoi(s.substr(12))));
    if (s.rfind("lookback:", 0) == 0)
      return nc::DeltaEncoding::lookback(uint16_t(std::stoi(s.substr(9))));
  } catch (const nc::Error&) {
    throw;
  } catch (const std::exception&) {
    throw nc::InvalidConfig("bad delta spec: " + s);
  }
  throw nc::InvalidConfig("bad delta spec: " + s);
}

std::string mode_to_string(const nc::Mode& m) {
  char buf[64];
  switch (m.tag) {
    case nc::Mode::Tag::Classic:
      return "classic";
    case nc::Mode::Tag::IntMult:
      std::snprintf(buf, sizeof(buf), "int-mult:%llu",
                    (unsigned long long)m.mult);
      return buf;
    case nc::Mode::Tag::FloatMult:
      std::snprintf(buf, sizeof(buf), "float-mult:%.17g", m.base);
      return buf;
    case nc::Mode::Tag::FloatQuant:
      std::snprintf(buf, sizeof(buf), "float-quant:%d", int(m.quant_bits));
      return buf;
  }
  return "?";
}

std::string delta_to_string(const nc::DeltaEncoding& d) {
  char buf[32];
  switch (d.tag) {
    case nc::DeltaEncoding::Tag::None:
      return "none";
    case nc::DeltaEncoding::Tag::Consecutive:
      std::snprintf(buf, sizeof(buf), "consecutive:%d", int(d.order));
      return buf;
    case nc::DeltaEncoding::Tag::Lookback:
      std::snprintf(buf, sizeof(buf), "lookback:%d", int(d.window));
      return buf;
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

struct CompressArgs {
  std::string input, output, kind, mode = "auto", delta = "auto";
  int level = nc::kDefaultLevel;
  uint32_t page_size = nc::kDefaultPageSize;
  uint64_t seed = 0;
};

int run_compress(const CompressArgs& args) {
  nc::NumberKind kind = nc::kind_from_name(args.kind);
  nc::CompressorConfig cfg;
  cfg.level = args.level;
  cfg.page_size = args.page_size;
  cfg.seed = args.seed;
  cfg.mode_override = parse_mode_spec(args.mode);
  cfg.delta_override = parse_delta_spec(args.delta);

  std::vector<uint8_t> raw = read_input(args.input);
  if (raw.empty()) throw nc::InvalidConfig("input is empty");
  std::vector<uint8_t> out;
  size_t count = 0;
  auto t0 = std::chrono::steady_clock::now();
  nc::dispatch_kind(kind, [&](auto zero) {
    using T = decltype(zero);
    std::vector<T> numbers = typed_view<T>(raw);
    count = numbers.size();
    out = nc::compress<T>(numbers, cfg);
  });
  double seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - t0)
                       .count();

  write_output(args.output, out);
  double ratio = out.empty() ? 0.0 : double(raw.size()) / double(out.size());
  double bits = count == 0 ? 0.0 : double(out.size()) * 8.0 / double(count);
  // stats stay off the data stream when it goes to stdout
  std::FILE* sink = args.output == "-" ? stderr : stdout;
  std::fprintf(sink, "ratio=%.6g bits_per_num=%.6g seconds=%.6g\n", ratio,
               bits, seconds);
  return 0;
}

int run_decompress(const std::string& input, const std::string& output) {
  std::vector<uint8_t> data = read_input(input);
  auto [kind, raw] = nc::decompress_bytes(data);
  write_output(output, raw);
  return 0;
}

int run_inspect(const std::string& input, bool as_json) {
  std::vector<uint8_t> data = read_input(input);
  nc::ContainerReport report = nc::inspect_container(data);

  if (as_json) {
    nlohmann::json j;
    j["numbers"] = report.number_count;
    j["bytes"] = report.total_bytes;
    j["chunks"] = nlohmann::json::array();
    for (const auto& c : report.chunks) {
      nlohmann::json jc;
      jc["kind"] = nc::kind_name(c.kind);
      jc["mode"] = mode_to_string(c.mode);
      jc["delta"] = delta_to_string(c.delta);
      jc["pages"] = c.page_count;
      jc["numbers"] = c.number_count;
      jc["payload_bytes"] = c.payload_bytes;
      jc["meta_bytes"] = c.meta_bytes;
      jc["est_bits_per_num"] = c.est_bits_per_number;
      jc["vars"] = nlohmann::json::array();
      for (const auto& v : c.vars)
        jc["vars"].push_back({{"bins", v.bin_count},
                              {"size_log", v.ans_size_log},
                              {"est_bits_per_num", v.est_bits_per_number}});
      j["chunks"].push_back(jc);
    }
    std::printf("%s\n", j.dump(2).c_str());
    return 0;
  }

  double bits = report.number_count == 0
                    ? 0.0
                    : double(report.total_bytes) * 8.0 /
                          double(report.number_count);
  std::printf("chunks=%zu numbers=%llu bytes=%llu bits_per_num=%.6g\n",
              report.chunks.size(),
              (unsigned long long)report.number_count,
              (unsigned long long)report.total_bytes, bits);
  for (size_t i = 0; i < report.chunks.size(); ++i) {
    const auto& c = report.chunks[i];
    std::printf(
        "chunk=%zu kind=%s mode=%s delta=%s pages=%zu numbers=%llu "
        "est_bits_per_num=%.6g\n",
        i, nc::kind_name(c.kind), mode_to_string(c.mode).c_str(),
        delta_to_string(c.delta).c_str(), c.page_count,
        (unsigned long long)c.number_count, c.est_bits_per_number);
    for (size_t v = 0; v < c.vars.size(); ++v)
      std::printf("  var=%zu bins=%zu size_log=%d est_bits_per_num=%.6g\n", v,
                  c.vars[v].bin_count, c.vars[v].ans_size_log,
                  c.vars[v].est_bits_per_number);
  }
  return 0;
}

struct BenchArgs {
  std::string input, kind;
  int iters = 5;
  int threads = 1;
  int level = nc::kDefaultLevel;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int run_bench(const BenchArgs& args) {
  if (args.iters < 1) throw nc::InvalidConfig("iters must be positive");
  if (args.threads < 1) throw nc::InvalidConfig("threads must be positive");
  nc::NumberKind kind = nc::kind_from_name(args.kind);
  std::vector<uint8_t> raw = read_input(args.input);
  if (raw.empty()) throw nc::InvalidConfig("bench needs non-empty input");
  double mib = double(raw.size()) / (1024.0 * 1024.0);

  struct Result {
    double compress_mibs = 0.0, decompress_mibs = 0.0;
  };
  std::vector<Result> results(args.threads);

  auto work = [&](int tid) {
    nc::dispatch_kind(kind, [&](auto zero) {
      using T = decltype(zero);
      std::vector<T> numbers = typed_view<T>(raw);
      nc::CompressorConfig cfg;
      cfg.level = args.level;
      auto compressed = nc::compress<T>(numbers, cfg);  // warm-up
      auto restored = nc::decompress<T>(compressed);    // warm-up
      if (restored != numbers)
        throw nc::CorruptState("bench round-trip mismatch");

      std::vector<double> cspeed, dspeed;
      for (int i = 0; i < args.iters; ++i) {
        auto t0 = std::chrono::steady_clock::now();
        auto c = nc::compress<T>(numbers, cfg);
        auto t1 = std::chrono::steady_clock::now();
        auto d = nc::decompress<T>(c);
        auto t2 = std::chrono::steady_clock::now();
        cspeed.push_back(mib /
                         std::chrono::duration<double>(t1 - t0).count());
        dspeed.push_back(mib /
                         std::chrono::duration<double>(t2 - t1).count());
      }
      results[tid] = {median(cspeed), median(dspeed)};
    });
  };

  if (args.threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < args.threads; ++t) pool.emplace_back(work, t);
    for (auto& t : pool) t.join();
  }

  double csum = 0.0, dsum = 0.0;
  for (int t = 0; t < args.threads; ++t) {
    csum += results[t].compress_mibs;
    dsum += results[t].decompress_mibs;
    if (args.threads > 1)
      std::printf("thread=%d compress_mibs=%.1f decompress_mibs=%.1f\n", t,
                  results[t].compress_mibs, results[t].decompress_mibs);
  }
  std::printf("compress_mibs=%.1f decompress_mibs=%.1f\n", csum, dsum);
  return 0;
}

struct SynthArgs {
  std::string output, dist;
  uint64_t count = 0;
  uint64_t seed = 0;
  bool convergence = false;
  std::string bins = "16,64,256";
};

int run_synth(const SynthArgs& args) {
  nc::SyntheticDist dist = nc::parse_dist_spec(args.dist);
  if (args.count == 0) throw nc::InvalidConfig("count must be positive");

  if (args.convergence) {
    std::vector<int> budgets;
    size_t at = 0;
    while (at <= args.bins.size()) {
      size_t comma = args.bins.find(',', at);
      if (comma == std::string::npos) comma = args.bins.size();
      try {
        budgets.push_back(std::stoi(args.bins.substr(at, comma - at)));
      } catch (const std::exception&) {
        throw nc::InvalidConfig("bad bin list: " + args.bins);
      }
      at = comma + 1;
    }
    auto rows = nc::convergence_report(dist, args.count, budgets, args.seed);
    std::string csv = nc::convergence_csv(rows);
    write_output(args.output,
                 std::vector<uint8_t>(csv.begin(), csv.end()));
    return 0;
  }

  std::vector<uint64_t> data = nc::generate(dist, args.count, args.seed);
  std::vector<uint8_t> raw(data.size() * sizeof(uint64_t));
  std::memcpy(raw.data(), data.data(), raw.size());
  write_output(args.output, raw);
  return 0;
}

int guarded(const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const nc::CorruptMetadata& e) {
    std::fprintf(stderr, "CorruptMetadata: %s\n", e.what());
    return 2;
  } catch (const nc::CorruptPage& e) {
    std::fprintf(stderr, "CorruptPage: %s\n", e.what());
    return 2;
  } catch (const nc::CorruptLatents& e) {
    std::fprintf(stderr, "CorruptLatents: %s\n", e.what());
    return 2;
  } catch (const nc::CorruptState& e) {
    std::fprintf(stderr, "CorruptState: %s\n", e.what());
    return 2;
  } catch (const nc::UnsupportedVersion& e) {
    std::fprintf(stderr, "UnsupportedVersion: %s\n", e.what());
    return 2;
  } catch (const nc::InvalidModeForData& e) {
    std::fprintf(stderr, "InvalidModeForData: %s\n", e.what());
    return 1;
  } catch (const nc::InvalidConfig& e) {
    std::fprintf(stderr, "InvalidConfig: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "Error: %s\n", e.what());
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lossless compressor for dense numerical data"};
  app.require_subcommand(1);

  const std::string kind_help = "element type: u32, u64, i32, i64, f32, f64";

  CompressArgs cargs;
  CLI::App* compress =
      app.add_subcommand("compress", "Compress a raw array of numbers");
  compress->add_option("input", cargs.input, "raw input file, or - for stdin")
      ->required();
  compress->add_option("output", cargs.output, "output file, or - for stdout")
      ->required();
  compress->add_option("--kind", cargs.kind, kind_help)->required();
  compress->add_option("--level", cargs.level, "effort level 0..12");
  compress->add_option("--mode", cargs.mode,
                       "auto, classic, int-mult:M, float-mult:BASE, "
                       "float-quant:K");
  compress->add_option("--delta", cargs.delta,
                       "auto, none, consecutive:ORDER, lookback[:WINDOW]");
  compress->add_option("--page-size", cargs.page_size, "numbers per page");
  compress->add_option("--seed", cargs.seed, "sampling seed");

  std::string din, dout;
  CLI::App* decompress =
      app.add_subcommand("decompress", "Restore the raw array of numbers");
  decompress->add_option("input", din, "compressed file, or - for stdin")
      ->required();
  decompress->add_option("output", dout, "output file, or - for stdout")
      ->required();

  std::string iin;
  bool ijson = false;
  CLI::App* inspect =
      app.add_subcommand("inspect", "Describe a compressed stream");
  inspect->add_option("input", iin, "compressed file, or - for stdin")
      ->required();
  inspect->add_flag("--json", ijson, "emit JSON");

  BenchArgs bargs;
  CLI::App* bench =
      app.add_subcommand("bench", "Measure round-trip throughput");
  bench->add_option("input", bargs.input, "raw input file")->required();
  bench->add_option("--kind", bargs.kind, kind_help)->required();
  bench->add_option("--iters", bargs.iters, "timed iterations (default 5)");
  bench->add_option("--threads", bargs.threads, "parallel workers");
  bench->add_option("--level", bargs.level, "effort level 0..12");

  SynthArgs sargs;
  CLI::App* synth =
      app.add_subcommand("synth", "Generate synthetic test data");
  synth->add_option("output", sargs.output, "output file, or - for stdout")
      ->required();
  synth
      ->add_option("--dist", sargs.dist,
                   "lomax:SHAPE:SCALE, geometric:P, uniform[:LO:HI]")
      ->required();
  synth->add_option("-n,--count", sargs.count, "numbers to generate")
      ->required();
  synth->add_option("--seed", sargs.seed, "generator seed");
  synth->add_flag("--convergence", sargs.convergence,
                  "write a size-vs-bin-budget CSV instead of raw data");
  synth->add_option("--bins", sargs.bins,
                    "bin budgets for --convergence (default 16,64,256)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (app.got_subcommand(compress))
    return guarded([&] { return run_compress(cargs); });
  if (app.got_subcommand(decompress))
    return guarded([&] { return run_decompress(din, dout); });
  if (app.got_subcommand(inspect))
    return guarded([&] { return run_inspect(iin, ijson); });
  if (app.got_subcommand(bench))
    return guarded([&] { return run_bench(bargs); });
  if (app.got_subcommand(synth))
    return guarded([&] { return run_synth(sargs); });
  return 1;
}
