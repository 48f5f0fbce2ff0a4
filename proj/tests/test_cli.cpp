// End-to-end runs of the installed binary: the gen -> train -> attack ->
// eval pipeline at toy scale, exit codes, and the replay determinism
// contract.
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const std::string kBin = WADV_CLI_PATH;

int run(const std::string& args) {
  const std::string cmd = kBin + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(f), {});
}

fs::path find_one(const fs::path& dir, const std::string& needle) {
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().filename().string().find(needle) != std::string::npos)
      return e.path();
  return {};
}

struct Workspace {
  fs::path dir{"tmp_cli_ws"};
  Workspace() {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
};

}  // namespace

TEST_CASE("cli: help exits 0 on every verb") {
  CHECK(run("--help") == 0);
  for (const char* verb :
       {"gen-mod", "gen-fp", "import-radioml", "train", "attack", "firnet",
        "eval", "sweep", "report"})
    CHECK(run(std::string(verb) + " --help") == 0);
}

TEST_CASE("cli: usage, io, and schema failures use distinct exit codes") {
  CHECK(run("no-such-verb") == 2);
  CHECK(run("gen-mod --bogus-flag 1") == 2);
  CHECK(run("train --dataset does-not-exist --out x.ckpt") == 3);
  Workspace ws;
  const std::string bad = (ws.dir / "bad.ckpt").string();
  std::ofstream(bad) << "not a checkpoint";
  CHECK(run("eval --model " + bad + " --dataset also-missing") == 4);
}

TEST_CASE("cli: gen -> train -> attack -> eval produces a fooling report") {
  Workspace ws;
  const std::string d = ws.dir.string();
  REQUIRE(run("gen-fp --devices 3 --slices 40 --ni 96 --seed 7 --out " + d +
              "/ds") == 0);
  REQUIRE(fs::exists(ws.dir / "ds" / "manifest.json"));
  REQUIRE(run("train --dataset " + d + "/ds --epochs 6 --lr 2e-3 --batch 32 "
              "--seed 5 --out " + d + "/model.ckpt") == 0);
  REQUIRE(run("attack aws --model " + d + "/model.ckpt --dataset " + d +
              "/ds --taps 8 --eps 0.5 --target 1 --payload-class 0 "
              "--slices 4 --max-outer 2 --max-ncg 4 --out " + d +
              "/attacks") == 0);
  const fs::path artifact = find_one(ws.dir / "attacks", "aws-src0-tgt1");
  REQUIRE(!artifact.empty());
  REQUIRE(run("eval --model " + d + "/model.ckpt --dataset " + d +
              "/ds --attack " + artifact.string() + " --seeds 2 --out " + d +
              "/eval") == 0);
  const fs::path report = find_one(ws.dir / "eval", "report-");
  REQUIRE(!report.empty());
  CHECK(slurp(report).find("\"fooling_rate\"") != std::string::npos);
  CHECK(!find_one(ws.dir / "eval", ".csv").empty());
}

TEST_CASE("cli: replaying the same eval yields byte-identical report JSON") {
  Workspace ws;
  const std::string d = ws.dir.string();
  REQUIRE(run("gen-mod --schemes bpsk,qpsk --snr 20 --slices 24 --ni 64 "
              "--seed 3 --out " + d + "/ds") == 0);
  REQUIRE(run("train --dataset " + d + "/ds --epochs 4 --lr 2e-3 --batch 16 "
              "--seed 5 --out " + d + "/model.ckpt") == 0);
  REQUIRE(run("attack awj-u --model " + d + "/model.ckpt --dataset " + d +
              "/ds --eps 0.1 --nj 16 --class 0 --slices 4 --max-outer 2 "
              "--max-ncg 3 --out " + d + "/attacks") == 0);
  const fs::path artifact = find_one(ws.dir / "attacks", "awj-u-src0");
  REQUIRE(!artifact.empty());
  const std::string eval_args = "eval --model " + d + "/model.ckpt --dataset " +
                                d + "/ds --attack " + artifact.string() +
                                " --seeds 2 ";
  REQUIRE(run(eval_args + "--out " + d + "/eval1") == 0);
  REQUIRE(run(eval_args + "--out " + d + "/eval2") == 0);
  const fs::path r1 = find_one(ws.dir / "eval1", "report-");
  const fs::path r2 = find_one(ws.dir / "eval2", "report-");
  REQUIRE(!r1.empty());
  REQUIRE(!r2.empty());
  CHECK(r1.filename() == r2.filename());  // digest-derived name
  CHECK(slurp(r1) == slurp(r2));
}

TEST_CASE("cli: report verb re-emits CSV from a JSON report") {
  Workspace ws;
  const std::string d = ws.dir.string();
  REQUIRE(run("gen-mod --schemes bpsk,qpsk --snr 20 --slices 12 --ni 64 "
              "--seed 3 --out " + d + "/ds") == 0);
  REQUIRE(run("train --dataset " + d + "/ds --epochs 2 --batch 16 --out " + d +
              "/model.ckpt") == 0);
  REQUIRE(run("eval --model " + d + "/model.ckpt --dataset " + d +
              "/ds --seeds 1 --formats json --out " + d + "/eval") == 0);
  const fs::path report = find_one(ws.dir / "eval", "report-");
  REQUIRE(!report.empty());
  REQUIRE(run("report --in " + report.string() + " --formats csv --out " + d +
              "/reemit") == 0);
  CHECK(!find_one(ws.dir / "reemit", ".csv").empty());
}
