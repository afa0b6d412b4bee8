#include <doctest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "optsmart/errors.hpp"
#include "optsmart/harness.hpp"

using namespace optsmart;

TEST_CASE("block and graph sizes") {
  CHECK(blockSizeBytes(100) == 20000);
  CHECK(blockSizeBytes(0) == 0);
  CHECK(blockSizeBytes(400) == 80000);
  CHECK(bgSizeBytes(std::int64_t{10}, std::int64_t{15}) == 580);
  CHECK(bgSizeBytes(std::int64_t{0}, std::int64_t{0}) == 0);
  CHECK(bgSizeBytes(2.5, 1.5) == doctest::Approx(100.0));
  CHECK_THROWS_AS(blockSizeBytes(-1), InputError);
  CHECK_THROWS_AS(bgSizeBytes(std::int64_t{-1}, std::int64_t{0}), InputError);
}

TEST_CASE("graph overhead percentage") {
  CHECK(std::abs(bgOverheadPct(580, 20000) - 2.9) < 1e-9);
  CHECK(bgOverheadPct(0, 20000) == 0.0);
  CHECK_THROWS_AS(bgOverheadPct(580, 0), std::domain_error);
}

TEST_CASE("block time average drops the warm-up block") {
  std::vector<std::vector<double>> flat(2, std::vector<double>(3, 10.0));
  flat[0][0] = flat[1][0] = 500.0;  // warm-ups do not count
  CHECK(averageBlockTime(flat) == doctest::Approx(10.0));

  // 15 iterations of 10 blocks: the denominator is 15 * 9 = 135.
  std::vector<std::vector<double>> grid(15, std::vector<double>(10, 0.0));
  grid[3][4] = 135.0;
  CHECK(averageBlockTime(grid) == doctest::Approx(1.0));

  CHECK_THROWS_AS(averageBlockTime({{1.0}}), UsageError);
  CHECK_THROWS_AS(averageBlockTime({}), UsageError);
  CHECK_THROWS_AS(averageBlockTime({{1.0, 2.0}, {1.0}}), UsageError);
}

TEST_CASE("profiles") {
  const auto w1 = fullScaleProfile(WorkloadKind::W1);
  CHECK(w1.iterations == 15);
  CHECK(w1.blocks == 10);
  CHECK(w1.validators == 10);
  CHECK(w1.sweep.front() == 50);
  CHECK(w1.sweep.back() == 400);
  CHECK(w1.threads == 50);
  CHECK(w1.objects == 2000);
  CHECK(fullScaleProfile(WorkloadKind::W2).sweep == std::vector<std::size_t>{10, 20, 30, 40, 50, 60});
  CHECK(fullScaleProfile(WorkloadKind::W3).sweep.back() == 6000);

  const auto desk = deskProfile(WorkloadKind::W2, 6);
  CHECK(desk.iterations == 3);
  CHECK(desk.blocks == 4);
  CHECK(desk.threads == 6);
  CHECK(desk.sweep == std::vector<std::size_t>{1, 2, 4, 6});
  CHECK(deskProfile(WorkloadKind::W2, 1).sweep == std::vector<std::size_t>{1});
  CHECK(deskProfile(WorkloadKind::W1, 128).threads == 50);
  CHECK(deskProfile(WorkloadKind::W1, 4).sweep.back() == 300);

  ExperimentConfig c;
  c.workload = WorkloadKind::W3;
  CHECK(sweepPoints(c) == fullScaleProfile(WorkloadKind::W3).sweep);
  c.sweep = {7};
  CHECK(sweepPoints(c) == std::vector<std::size_t>{7});
  CHECK((parseWorkloadKind("w2") == WorkloadKind::W2));
  CHECK_THROWS_AS(parseWorkloadKind("w4"), InputError);
}

namespace {

ExperimentConfig tiny() {
  ExperimentConfig c;
  c.contract = ContractKind::Mix;
  c.aus = 45;
  c.threads = 2;
  c.objects = 300;
  c.iterations = 2;
  c.blocks = 2;
  c.validators = 2;
  c.seed = 17;
  return c;
}

}  // namespace

TEST_CASE("a reading validates every block and reports consistent metrics") {
  const auto row = runReading(tiny());
  CHECK(row.contract == "mix");
  CHECK(row.aus == 45);
  CHECK(row.blockBytes == 200.0 * 45);
  CHECK(row.bgBytes == bgSizeBytes(row.bgVertices, row.bgEdges));
  CHECK(row.bgPct == bgOverheadPct(row.bgBytes, row.blockBytes));
  CHECK(row.bgVertices + row.concBin == doctest::Approx(45.0));
  CHECK(row.minerTimeMs > 0);
  CHECK(row.validatorTimeMs > 0);
  CHECK(row.serialMinerTimeMs > 0);
}

TEST_CASE("the same seed gives the same graph statistics") {
  auto c = tiny();
  c.threads = 1;  // a single miner thread makes the commit order deterministic
  const auto a = runReading(c), b = runReading(c);
  CHECK(a.bgVertices == b.bgVertices);
  CHECK(a.bgEdges == b.bgEdges);
  CHECK(a.concBin == b.concBin);
  CHECK(a.aborts == 0);
}

TEST_CASE("infeasible configurations are usage errors") {
  auto c = tiny();
  c.threads = 0;
  CHECK_THROWS_AS(runReading(c), UsageError);
  c = tiny();
  c.aus = 0;
  CHECK_THROWS_AS(runReading(c), UsageError);
  c = tiny();
  c.blocks = 1;
  CHECK_THROWS_AS(runReading(c), UsageError);
}

TEST_CASE("an experiment yields one row per sweep point") {
  auto c = tiny();
  c.contract = ContractKind::Coin;
  c.workload = WorkloadKind::W1;
  c.sweep = {20, 40};
  const auto rows = runExperiment(c);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].aus == 20);
  CHECK(rows[1].aus == 40);
  CHECK(rows[1].blockBytes == 8000);
  c.workload = WorkloadKind::W2;
  c.sweep = {1, 3};
  const auto t = runExperiment(c);
  CHECK(t[1].threads == 3);
}

TEST_CASE("CSV schema, header-only output and round trip") {
  const auto& cols = csvColumns();
  CHECK(cols.size() == 24);
  CHECK(cols.front() == "contract");
  CHECK(cols.back() == "conc_bin");

  std::ostringstream empty;
  writeCsv(empty, {});
  std::string header;
  for (std::size_t i = 0; i < cols.size(); ++i) header += (i ? "," : "") + cols[i];
  CHECK(empty.str() == header + "\n");

  MetricsRow r;
  r.contract = "coin";
  r.workload = "w1";
  r.aus = 100;
  r.threads = 4;
  r.objects = 2000;
  r.protocol = "bto";
  r.mode = "optimized";
  r.validator = "dec";
  r.iterations = 3;
  r.blocks = 4;
  r.seed = 18446744073709551615ull;
  r.minerTimeMs = 0.1 + 0.2;  // not exactly representable in short decimal
  r.serialMinerTimeMs = 1.0 / 3.0;
  r.minerSpeedup = 1e-300;
  r.bgVertices = 10;
  r.bgEdges = 15;
  r.bgBytes = 580;
  r.blockBytes = 20000;
  r.bgPct = 2.9;
  std::stringstream io;
  writeCsv(io, {r, r});
  const auto back = readCsv(io);
  REQUIRE(back.size() == 2);
  CHECK(back[0] == r);
  CHECK(back[1] == r);
  // The overhead column is recomputable from the size columns.
  CHECK(std::abs(bgOverheadPct(bgSizeBytes(back[0].bgVertices, back[0].bgEdges),
                               static_cast<double>(blockSizeBytes(static_cast<std::int64_t>(back[0].aus)))) -
                 back[0].bgPct) < 1e-9);
}

TEST_CASE("the plotting columns are part of the schema") {
  // Columns the figure families read: speedup, graph statistics, space share.
  const auto& cols = csvColumns();
  for (const char* needed : {"contract", "workload", "aus", "threads", "objects", "protocol", "mode",
                             "miner_speedup", "validator_speedup", "bg_vertices", "bg_edges", "bg_pct"})
    CHECK(std::find(cols.begin(), cols.end(), needed) != cols.end());
}

TEST_CASE("malformed CSV input") {
  std::istringstream none("");
  CHECK_THROWS_AS(readCsv(none), ParseError);
  std::istringstream wrong("a,b,c\n");
  CHECK_THROWS_AS(readCsv(wrong), ParseError);
  std::ostringstream good;
  writeCsv(good, {MetricsRow{}});
  std::string text = good.str();
  text.insert(text.find('\n') + 1, "x,");
  std::istringstream extra(text);
  try {
    readCsv(extra);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("unwritable CSV path is an I/O error") {
  CHECK_THROWS_AS(writeCsvFile("/nonexistent-dir/out.csv", {}), std::runtime_error);
}
