#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "optsmart/block.hpp"
#include "optsmart/harness.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int status;
  std::string out;
};

Run sh(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " '" OPTSMART_CLI "' " + args + " 2>/dev/null";
  Run r{0, {}};
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) r.out.append(buf, n);
  const int raw = pclose(p);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("optsmart-cli-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const char* name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("gen, mine, validate and check round-trip through files") {
  TempDir dir;
  const auto wl = dir / "w.txt", blk = dir / "b.txt", hist = dir / "h.txt";
  REQUIRE(sh("gen --contract mix --aus 60 --objects 150 --seed 3 --out " + wl).status == 0);
  REQUIRE(sh("mine --in " + wl + " --out " + blk + " --history " + hist + " --protocol mvto --threads 3")
              .status == 0);
  for (const char* v : {"dec", "fj", "serial"}) {
    const auto r = sh(std::string("validate --validator ") + v + " --threads 2 --block " + blk);
    CHECK(r.status == 0);
    CHECK(r.out.starts_with("accept "));
  }
  const auto c = sh("check --history " + hist + " --workload " + wl);
  CHECK(c.status == 0);
  CHECK(c.out.find("ts-witness PASS") != std::string::npos);
  CHECK(c.out.find("opacity-windows PASS") != std::string::npos);

  // A flipped final-state value is rejected with exit code 2.
  auto block = optsmart::parseBlock(slurp(blk));
  block.finalState[0] += 1;
  {
    std::ofstream o(dir / "bad.txt");
    optsmart::writeBlock(o, block);
  }
  const auto bad = sh("validate --block " + (dir / "bad.txt"));
  CHECK(bad.status == 2);
  CHECK(bad.out.starts_with("reject "));
}

TEST_CASE("gen is deterministic and mine chains the previous digest") {
  TempDir dir;
  CHECK(sh("gen --contract coin --aus 30 --objects 40 --seed 9").out ==
        sh("gen --contract coin --aus 30 --objects 40 --seed 9").out);
  REQUIRE(sh("gen --contract coin --aus 30 --objects 40 --out " + (dir / "w.txt")).status == 0);
  const std::string prev(64, 'a');
  REQUIRE(sh("mine --in " + (dir / "w.txt") + " --prev " + prev + " --out " + (dir / "b.txt")).status == 0);
  CHECK(optsmart::toHex(optsmart::parseBlock(slurp(dir / "b.txt")).prevHash) == prev);
}

TEST_CASE("the experiment writes the CSV schema") {
  TempDir dir;
  const auto csv = dir / "r.csv";
  const auto r = sh("--contract coin --workload w1 --aus 30 --objects 100 --iterations 1 --blocks 2 "
                    "--validators 1 --threads 2 --out " + csv);
  REQUIRE(r.status == 0);
  std::istringstream in(slurp(csv));
  const auto rows = optsmart::readCsv(in);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].aus == 30);
  CHECK(rows[0].threads == 2);
  CHECK(rows[0].blockBytes == 6000);
}

TEST_CASE("OPTSMART_THREADS overrides --threads") {
  const auto r = sh("--contract coin --workload w2 --aus 20 --objects 100 --iterations 1 --blocks 2 "
                    "--validators 1 --threads 2",
                    "OPTSMART_THREADS=3");
  REQUIRE(r.status == 0);
  std::istringstream in(r.out);
  const auto rows = optsmart::readCsv(in);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].threads == 3);
}

TEST_CASE("bad invocations fail with distinct exit codes") {
  CHECK(sh("--protocol tl2").status != 0);
  CHECK(sh("mine").status != 0);
  CHECK(sh("validate --block /nonexistent/block.txt").status == 1);
  CHECK(sh("--aus 10 --objects 50 --iterations 1 --blocks 1 --threads 1").status == 64);
  CHECK(sh("--aus 10 --objects 50 --iterations 1 --blocks 2 --threads 1", "OPTSMART_THREADS=0").status ==
        64);
}
