#include "optsmart/harness.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "optsmart/errors.hpp"
#include "optsmart/miner.hpp"

namespace optsmart {

std::int64_t blockSizeBytes(std::int64_t nAUs) {
  if (nAUs < 0) throw InputError("AU count must be non-negative");
  return 200 * nAUs;
}

std::int64_t bgSizeBytes(std::int64_t nVertices, std::int64_t nEdges) {
  if (nVertices < 0 || nEdges < 0) throw InputError("graph counts must be non-negative");
  return 28 * nVertices + 20 * nEdges;
}

double bgSizeBytes(double nVertices, double nEdges) { return 28.0 * nVertices + 20.0 * nEdges; }

double bgOverheadPct(double bgBytes, double blockBytes) {
  if (blockBytes == 0) throw std::domain_error("block size is zero");
  return bgBytes * 100.0 / blockBytes;
}

double averageBlockTime(const std::vector<std::vector<double>>& times) {
  if (times.empty()) throw UsageError("no iterations");
  const std::size_t m = times.front().size();
  if (m < 2) throw UsageError("need at least two blocks per iteration (the first is warm-up)");
  double sum = 0;
  for (const auto& iteration : times) {
    if (iteration.size() != m) throw UsageError("iterations have different block counts");
    for (std::size_t b = 1; b < m; ++b) sum += iteration[b];
  }
  return sum / static_cast<double>(times.size() * (m - 1));
}

const char* toString(WorkloadKind w) {
  switch (w) {
    case WorkloadKind::W1: return "w1";
    case WorkloadKind::W2: return "w2";
    case WorkloadKind::W3: return "w3";
  }
  return "?";
}

WorkloadKind parseWorkloadKind(const std::string& text) {
  if (text == "w1") return WorkloadKind::W1;
  if (text == "w2") return WorkloadKind::W2;
  if (text == "w3") return WorkloadKind::W3;
  throw InputError("unknown workload: " + text);
}

ExperimentConfig deskProfile(WorkloadKind w, std::size_t hardwareThreads) {
  ExperimentConfig c;
  c.workload = w;
  c.iterations = 3;
  c.blocks = 4;
  c.validators = 3;
  c.aus = 300;
  c.objects = 2000;
  const std::size_t hw = std::max<std::size_t>(1, hardwareThreads);
  c.threads = std::min<std::size_t>(50, hw);
  switch (w) {
    case WorkloadKind::W1: c.sweep = {50, 100, 150, 200, 250, 300}; break;
    case WorkloadKind::W2:
      for (std::size_t t = 1; t < hw; t *= 2) c.sweep.push_back(t);
      c.sweep.push_back(hw);
      break;
    case WorkloadKind::W3: c.sweep = {1000, 2000, 3000, 4000, 5000, 6000}; break;
  }
  return c;
}

ExperimentConfig fullScaleProfile(WorkloadKind w) {
  ExperimentConfig c;
  c.workload = w;
  c.iterations = 15;
  c.blocks = 10;
  c.validators = 10;
  c.aus = 300;
  c.threads = 50;
  c.objects = 2000;
  switch (w) {
    case WorkloadKind::W1: c.sweep = {50, 100, 150, 200, 250, 300, 350, 400}; break;
    case WorkloadKind::W2: c.sweep = {10, 20, 30, 40, 50, 60}; break;
    case WorkloadKind::W3: c.sweep = {1000, 2000, 3000, 4000, 5000, 6000}; break;
  }
  return c;
}

std::vector<std::size_t> sweepPoints(const ExperimentConfig& config) {
  if (!config.sweep.empty()) return config.sweep;
  return fullScaleProfile(config.workload).sweep;
}

const std::vector<std::string>& csvColumns() {
  static const std::vector<std::string> kColumns{
      "contract",          "workload",          "aus",
      "threads",           "objects",           "protocol",
      "mode",              "validator",         "iterations",
      "blocks",            "seed",              "miner_time_ms",
      "serial_miner_time_ms", "miner_speedup",  "validator_time_ms",
      "serial_validator_time_ms", "validator_speedup", "bg_vertices",
      "bg_edges",          "bg_bytes",          "block_bytes",
      "bg_pct",            "aborts",            "conc_bin"};
  return kColumns;
}

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double msSince(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

MetricsRow runReading(const ExperimentConfig& c) {
  if (c.threads < 1 || c.aus < 1 || c.objects < 1 || c.iterations < 1 || c.validators < 1)
    throw UsageError("threads, aus, objects, iterations and validators must be at least 1");
  if (c.blocks < 2) throw UsageError("need at least two blocks per iteration (the first is warm-up)");

  const std::size_t n = c.iterations, m = c.blocks;
  auto grid = [&] { return std::vector<std::vector<double>>(n, std::vector<double>(m, 0.0)); };
  auto miner = grid(), serialMiner = grid(), validator = grid(), serialValidatorT = grid();
  auto vertices = grid(), edges = grid(), aborts = grid(), bin = grid();
  std::size_t auCount = 0;

  for (std::size_t i = 0; i < n; ++i) {
    Digest prev = kZeroDigest;
    for (std::size_t b = 0; b < m; ++b) {
      WorkloadSpec spec{c.contract, c.aus, c.objects, splitmix(c.seed ^ splitmix(i * 1000003 + b)),
                        c.zipf, 1.0, c.work};
      const Workload w = generateWorkload(spec);
      auCount = w.aus.size();

      auto start = std::chrono::steady_clock::now();
      const auto serialState = serialMine(w.aus, w.initialState);
      serialMiner[i][b] = msSince(start);
      (void)serialState;

      const MinedBlock mined = mineBlock(w, c.protocol, {c.threads, c.mode, 1000, false}, prev);
      miner[i][b] = mined.stats.wallMs;
      vertices[i][b] = static_cast<double>(mined.stats.bgVertices);
      edges[i][b] = static_cast<double>(mined.stats.bgEdges);
      aborts[i][b] = static_cast<double>(mined.stats.aborts);
      bin[i][b] = static_cast<double>(mined.stats.concBinSize);

      const auto bad = checkInvariants(w, w.initialState, mined.block.finalState);
      if (!bad.empty()) throw std::runtime_error("contract invariant violated: " + bad.front());

      double total = 0;
      for (std::size_t v = 0; v < c.validators; ++v) {
        const auto out = validateBlock(c.validator, mined.block, c.threads);
        if (!out.accept) throw std::runtime_error("validator rejected a mined block: " + out.rejectReason);
        total += out.wallMs;
      }
      validator[i][b] = total / static_cast<double>(c.validators);

      const auto serial = serialValidator(mined.block);
      if (!serial.accept)
        throw std::runtime_error("serial validator rejected a mined block: " + serial.rejectReason);
      serialValidatorT[i][b] = serial.wallMs;
      prev = blockDigest(mined.block);
    }
  }

  MetricsRow row;
  row.contract = toString(c.contract);
  row.workload = toString(c.workload);
  row.aus = c.aus;
  row.threads = c.threads;
  row.objects = c.objects;
  row.protocol = toString(c.protocol);
  row.mode = toString(c.mode);
  row.validator = toString(c.validator);
  row.iterations = n;
  row.blocks = m;
  row.seed = c.seed;
  row.minerTimeMs = averageBlockTime(miner);
  row.serialMinerTimeMs = averageBlockTime(serialMiner);
  row.minerSpeedup = row.minerTimeMs > 0 ? row.serialMinerTimeMs / row.minerTimeMs : 0;
  row.validatorTimeMs = averageBlockTime(validator);
  row.serialValidatorTimeMs = averageBlockTime(serialValidatorT);
  row.validatorSpeedup = row.validatorTimeMs > 0 ? row.serialValidatorTimeMs / row.validatorTimeMs : 0;
  row.bgVertices = averageBlockTime(vertices);
  row.bgEdges = averageBlockTime(edges);
  row.bgBytes = bgSizeBytes(row.bgVertices, row.bgEdges);
  row.blockBytes = static_cast<double>(blockSizeBytes(static_cast<std::int64_t>(auCount)));
  row.bgPct = bgOverheadPct(row.bgBytes, row.blockBytes);
  row.aborts = averageBlockTime(aborts);
  row.concBin = averageBlockTime(bin);
  return row;
}

std::vector<MetricsRow> runExperiment(const ExperimentConfig& config) {
  std::vector<MetricsRow> rows;
  for (std::size_t point : sweepPoints(config)) {
    ExperimentConfig c = config;
    switch (c.workload) {
      case WorkloadKind::W1: c.aus = point; break;
      case WorkloadKind::W2: c.threads = point; break;
      case WorkloadKind::W3: c.objects = point; break;
    }
    rows.push_back(runReading(c));
  }
  return rows;
}

namespace {

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void writeCsv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  const auto& cols = csvColumns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : rows) {
    out << r.contract << ',' << r.workload << ',' << r.aus << ',' << r.threads << ',' << r.objects
        << ',' << r.protocol << ',' << r.mode << ',' << r.validator << ',' << r.iterations << ','
        << r.blocks << ',' << r.seed << ',' << fmt(r.minerTimeMs) << ',' << fmt(r.serialMinerTimeMs)
        << ',' << fmt(r.minerSpeedup) << ',' << fmt(r.validatorTimeMs) << ','
        << fmt(r.serialValidatorTimeMs) << ',' << fmt(r.validatorSpeedup) << ','
        << fmt(r.bgVertices) << ',' << fmt(r.bgEdges) << ',' << fmt(r.bgBytes) << ','
        << fmt(r.blockBytes) << ',' << fmt(r.bgPct) << ',' << fmt(r.aborts) << ','
        << fmt(r.concBin) << '\n';
  }
}

void writeCsvFile(const std::string& path, const std::vector<MetricsRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  writeCsv(out, rows);
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path);
}

namespace {

template <class T>
T parseField(const std::string& s, std::size_t line) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(line, "bad numeric field '" + s + "'");
  return v;
}

}  // namespace

std::vector<MetricsRow> readCsv(std::istream& in) {
  std::vector<MetricsRow> rows;
  std::string line;
  std::size_t lineNo = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string f;
    while (std::getline(ss, f, ',')) out.push_back(f);
    if (!s.empty() && s.back() == ',') out.emplace_back();
    return out;
  };
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  ++lineNo;
  if (split(line) != csvColumns()) throw ParseError(1, "header does not match the schema");
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != csvColumns().size()) throw ParseError(lineNo, "wrong number of columns");
    MetricsRow r;
    std::size_t k = 0;
    r.contract = f[k++];
    r.workload = f[k++];
    r.aus = parseField<std::size_t>(f[k++], lineNo);
    r.threads = parseField<std::size_t>(f[k++], lineNo);
    r.objects = parseField<std::size_t>(f[k++], lineNo);
    r.protocol = f[k++];
    r.mode = f[k++];
    r.validator = f[k++];
    r.iterations = parseField<std::size_t>(f[k++], lineNo);
    r.blocks = parseField<std::size_t>(f[k++], lineNo);
    r.seed = parseField<std::uint64_t>(f[k++], lineNo);
    for (double* d : {&r.minerTimeMs, &r.serialMinerTimeMs, &r.minerSpeedup, &r.validatorTimeMs,
                      &r.serialValidatorTimeMs, &r.validatorSpeedup, &r.bgVertices, &r.bgEdges,
                      &r.bgBytes, &r.blockBytes, &r.bgPct, &r.aborts, &r.concBin})
      *d = parseField<double>(f[k++], lineNo);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace optsmart
