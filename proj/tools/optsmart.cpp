// Command-line driver: experiment sweeps plus gen/mine/validate/check on files.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include "optsmart/block.hpp"
#include "optsmart/checker.hpp"
#include "optsmart/errors.hpp"
#include "optsmart/harness.hpp"
#include "optsmart/miner.hpp"
#include "optsmart/validator.hpp"

using namespace optsmart;

namespace {

std::ifstream openIn(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return in;
}

template <class Fn>
void withOutput(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  fn(out);
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::size_t hardwareThreads() { return std::max(1u, std::thread::hardware_concurrency()); }

std::optional<std::size_t> envThreads() {
  const char* v = std::getenv("OPTSMART_THREADS");
  if (!v || !*v) return std::nullopt;
  const long long n = std::stoll(v);
  if (n < 1) throw UsageError("OPTSMART_THREADS must be at least 1");
  return static_cast<std::size_t>(n);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Concurrent smart-contract execution: miner, validators and benchmarks"};
  app.require_subcommand(0, 1);

  // Experiment (no subcommand).
  std::string contract = "coin", workload = "w1", protocol = "bto", mode = "optimized",
              validator = "dec", out;
  std::size_t aus = 0, threads = 0, objects = 0, iterations = 0, blocks = 0, validators = 0;
  std::uint64_t seed = 1;
  std::int64_t work = 0;
  bool fullScale = false, zipf = false;
  app.add_option("--contract", contract, "coin|ballot|auction|mix")
      ->check(CLI::IsMember({"coin", "ballot", "auction", "mix"}));
  app.add_option("--workload", workload, "w1 (sweep AUs) | w2 (sweep threads) | w3 (sweep objects)")
      ->check(CLI::IsMember({"w1", "w2", "w3"}));
  auto* ausOpt = app.add_option("--aus", aus, "AUs per block (fixes the W1 sweep)");
  auto* threadsOpt = app.add_option("--threads", threads, "worker threads (fixes the W2 sweep)");
  auto* objectsOpt = app.add_option("--objects", objects, "shared objects (fixes the W3 sweep)");
  app.add_option("--protocol", protocol)->check(CLI::IsMember({"bto", "mvto"}));
  app.add_option("--mode", mode)->check(CLI::IsMember({"default", "optimized"}));
  app.add_option("--validator", validator)->check(CLI::IsMember({"dec", "fj", "serial"}));
  auto* itOpt = app.add_option("--iterations", iterations, "iterations n");
  auto* blocksOpt = app.add_option("--blocks", blocks, "blocks per iteration m (first is warm-up)");
  auto* valOpt = app.add_option("--validators", validators, "validators per block");
  app.add_option("--seed", seed);
  app.add_option("--work", work, "LOCAL computation rounds per AU")->check(CLI::NonNegativeNumber);
  app.add_option("--out", out, "CSV output path (default stdout)");
  app.add_flag("--full-scale", fullScale, "15 iterations x 10 blocks, 10 validators, full sweeps");
  app.add_flag("--zipf", zipf, "Zipf-distributed object selection");

  // gen
  auto* gen = app.add_subcommand("gen", "write a generated workload");
  std::string genContract = "coin", genOut;
  std::size_t genAus = 100, genObjects = 2000;
  std::uint64_t genSeed = 1;
  std::int64_t genWork = 0;
  bool genZipf = false;
  gen->add_option("--contract", genContract)->check(CLI::IsMember({"coin", "ballot", "auction", "mix"}));
  gen->add_option("--aus", genAus);
  gen->add_option("--objects", genObjects);
  gen->add_option("--seed", genSeed);
  gen->add_option("--work", genWork)->check(CLI::NonNegativeNumber);
  gen->add_flag("--zipf", genZipf);
  gen->add_option("--out", genOut, "workload file (default stdout)");

  // mine
  auto* mine = app.add_subcommand("mine", "mine a workload file into a block file");
  std::string mineIn, mineOut, mineHistory, mineProtocol = "bto", mineMode = "optimized", minePrev;
  std::size_t mineThreads = 4;
  mine->add_option("--in", mineIn, "workload file")->required();
  mine->add_option("--out", mineOut, "block file (default stdout)");
  mine->add_option("--history", mineHistory, "write the STM event history here");
  mine->add_option("--protocol", mineProtocol)->check(CLI::IsMember({"bto", "mvto"}));
  mine->add_option("--mode", mineMode)->check(CLI::IsMember({"default", "optimized"}));
  mine->add_option("--threads", mineThreads);
  mine->add_option("--prev", minePrev, "previous block digest (hex); default all-zero");

  // validate
  auto* val = app.add_subcommand("validate", "re-execute a block file; prints `accept time phase1 phase2`");
  std::string valIn, valKind = "dec";
  std::size_t valThreads = 4;
  val->add_option("--block", valIn)->required();
  val->add_option("--validator", valKind)->check(CLI::IsMember({"dec", "fj", "serial"}));
  val->add_option("--threads", valThreads);

  // check
  auto* check = app.add_subcommand("check", "run the correctness checkers on a history file");
  std::string checkIn, checkState;
  check->add_option("--history", checkIn)->required();
  check->add_option("--workload", checkState, "workload file supplying the initial state");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      WorkloadSpec spec{parseContractKind(genContract), genAus, genObjects, genSeed, genZipf, 1.0, genWork};
      const Workload w = generateWorkload(spec);
      withOutput(genOut, [&](std::ostream& o) { writeWorkload(o, w); });
      return 0;
    }
    if (*mine) {
      auto in = openIn(mineIn);
      const Workload w = readWorkload(in);
      const std::size_t t = envThreads().value_or(mineThreads);
      auto stm = makeStm(parseProtocol(mineProtocol.c_str()), w.initialState,
                         {!mineHistory.empty(), 0.0});
      auto run = concMiner(w.aus, *stm, {t, parseMinerMode(mineMode.c_str()), 1000, false});
      const Block block = assembleBlock(w.aus, w.initialState, run,
                                        minePrev.empty() ? kZeroDigest : digestFromHex(minePrev), *stm);
      withOutput(mineOut, [&](std::ostream& o) { writeBlock(o, block); });
      if (!mineHistory.empty())
        withOutput(mineHistory, [&](std::ostream& o) { writeHistory(o, stm->history().events()); });
      std::cerr << "mined " << w.aus.size() << " AUs in " << run.stats.wallMs << " ms, "
                << run.stats.aborts << " aborts, graph " << run.stats.bgVertices << " vertices "
                << run.stats.bgEdges << " edges, bin " << run.stats.concBinSize << "\n"
                << "digest " << toHex(blockDigest(block)) << "\n";
      return 0;
    }
    if (*val) {
      auto in = openIn(valIn);
      const Block block = readBlock(in);
      const auto outcome =
          validateBlock(parseValidatorKind(valKind), block, envThreads().value_or(valThreads));
      std::cout << (outcome.accept ? "accept" : "reject") << ' ' << outcome.wallMs << ' '
                << outcome.phase1Ms << ' ' << outcome.phase2Ms << '\n';
      if (!outcome.accept) std::cerr << outcome.rejectReason << '\n';
      return outcome.accept ? 0 : 2;
    }
    if (*check) {
      auto in = openIn(checkIn);
      const auto events = readHistory(in);
      std::vector<Value> initial;
      if (!checkState.empty()) {
        auto ws = openIn(checkState);
        initial = readWorkload(ws).initialState;
      }
      bool ok = true;
      auto report = [&](const char* name, const CheckResult& r) {
        std::cout << name << ' ' << (r.pass ? "PASS" : "FAIL");
        if (!r.pass) std::cout << ' ' << r.detail;
        std::cout << '\n';
        ok = ok && r.pass;
      };
      report("csr", checkCSR(events));
      report("co-opacity-graph", checkCoOpacityGraph(events, initial));
      report("ts-witness", checkTimestampWitness(events, initial));
      std::size_t checked = 0, skipped = 0, failedWindows = 0;
      for (const auto& w : quiescentWindows(events, initial)) {
        if (w.txnCount > kBruteForceLimit) {
          ++skipped;
          continue;
        }
        ++checked;
        if (!checkOpacity(w.events, w.initial).pass) ++failedWindows;
      }
      std::cout << "opacity-windows " << (failedWindows == 0 ? "PASS" : "FAIL") << ' ' << checked
                << " checked " << skipped << " too large\n";
      return ok && failedWindows == 0 ? 0 : 1;
    }

    // Experiment sweep.
    const auto wk = parseWorkloadKind(workload);
    ExperimentConfig c = fullScale ? fullScaleProfile(wk) : deskProfile(wk, hardwareThreads());
    c.contract = parseContractKind(contract);
    c.protocol = parseProtocol(protocol.c_str());
    c.mode = parseMinerMode(mode.c_str());
    c.validator = parseValidatorKind(validator);
    c.seed = seed;
    c.zipf = zipf;
    c.work = work;
    if (*itOpt) c.iterations = iterations;
    if (*blocksOpt) c.blocks = blocks;
    if (*valOpt) c.validators = validators;
    auto fix = [&](CLI::Option* opt, std::size_t value, std::size_t& field, WorkloadKind swept) {
      if (!*opt) return;
      field = value;
      if (c.workload == swept) c.sweep = {value};
    };
    fix(ausOpt, aus, c.aus, WorkloadKind::W1);
    fix(threadsOpt, threads, c.threads, WorkloadKind::W2);
    fix(objectsOpt, objects, c.objects, WorkloadKind::W3);
    if (auto t = envThreads()) {
      c.threads = *t;
      if (c.workload == WorkloadKind::W2) c.sweep = {*t};
    }
    const auto rows = runExperiment(c);
    if (out.empty())
      writeCsv(std::cout, rows);
    else
      writeCsvFile(out, rows);
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 64;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
