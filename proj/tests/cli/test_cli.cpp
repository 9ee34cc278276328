// Runs the forge executable end to end.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>

#include "../unit/support.hpp"
#include "forge/io/grid_io.hpp"
#include "forge/io/json_io.hpp"

#ifndef FORGE_BIN
#error "FORGE_BIN must name the forge executable"
#endif
#ifndef FORGE_SOURCE_DIR
#error "FORGE_SOURCE_DIR must point at the source tree"
#endif

namespace fs = std::filesystem;
using forge::io::json;

namespace {

const fs::path kSource = FORGE_SOURCE_DIR;

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

// Runs `forge <args>` through the shell with both streams captured.
Run forge_run(const std::string& args, const fs::path& dir, const std::string& env = "") {
  const auto out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" + std::string(FORGE_BIN) + "\" " + args + " > \"" +
                          out.string() + "\" 2> \"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = forge::io::read_text(out);
  r.err = forge::io::read_text(err);
  return r;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

json last_json_line(const std::string& text) {
  std::istringstream in(text);
  std::string line, last;
  while (std::getline(in, line)) {
    if (!line.empty()) last = line;
  }
  return json::parse(last);
}

void expect_all_hundred(const json& metrics) {
  for (const char* view : {"top", "front"}) {
    for (const char* cls : {"rack", "box"}) {
      EXPECT_EQ(metrics.at(view).at(cls).at("miou").get<double>(), 100.0) << view << " " << cls;
      EXPECT_EQ(metrics.at(view).at(cls).at("map").get<double>(), 100.0) << view << " " << cls;
    }
  }
}

}  // namespace

TEST(Cli, SelftestPasses) {
  const auto dir = forge::test::scratch_dir("cli_selftest");
  const auto r = forge_run("selftest", dir);
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("selftest passed"), std::string::npos);
}

TEST(Cli, VersionAndUsageErrors) {
  const auto dir = forge::test::scratch_dir("cli_usage");
  const auto v = forge_run("--version", dir);
  EXPECT_EQ(v.code, 0);
  EXPECT_NE(v.out.find("forge 1.0.0"), std::string::npos);
  EXPECT_EQ(forge_run("", dir).code, 2);
  EXPECT_EQ(forge_run("gen --out x --bogus", dir).code, 2);
  EXPECT_EQ(forge_run("gen", dir).code, 2);  // --out is required
}

TEST(Cli, FailuresPrintOneJsonErrorLine) {
  const auto dir = forge::test::scratch_dir("cli_errors");
  fs::create_directories(dir / "empty");
  const auto r = forge_run("eval --truth " + q(dir / "empty") + " --pred " + q(dir / "empty"), dir);
  EXPECT_EQ(r.code, 1);
  const auto line = last_json_line(r.err);
  EXPECT_EQ(line.at("error"), "IoError");
  EXPECT_NE(line.at("message").get<std::string>().find("manifest.json"), std::string::npos);

  forge::io::write_text(dir / "bad.json", R"({"grid": {"resolution": "many"}})");
  const auto c = forge_run("gen --config " + q(dir / "bad.json") + " --out " + q(dir / "d"), dir);
  EXPECT_EQ(c.code, 1);
  const auto cl = last_json_line(c.err);
  EXPECT_EQ(cl.at("error"), "ValidationError");
  EXPECT_NE(cl.at("message").get<std::string>().find("grid.resolution"), std::string::npos);
}

TEST(Cli, SeedComesFromTheEnvironmentUnlessGiven) {
  const auto dir = forge::test::scratch_dir("cli_seed");
  const std::string base = "gen --sequences 1 --frames 2 --config " + q(kSource / "configs/reference.json");
  ASSERT_EQ(forge_run(base + " --out " + q(dir / "flag") + " --seed 3", dir).code, 0);
  ASSERT_EQ(forge_run(base + " --out " + q(dir / "env"), dir, "FORGE_SEED=3").code, 0);
  ASSERT_EQ(forge_run(base + " --out " + q(dir / "both") + " --seed 3", dir, "FORGE_SEED=4").code, 0);
  const auto flag = forge::io::read_text(dir / "flag/manifest.json");
  EXPECT_EQ(flag, forge::io::read_text(dir / "env/manifest.json"));
  EXPECT_EQ(flag, forge::io::read_text(dir / "both/manifest.json"));
  EXPECT_NE(forge_run("gen", dir).err.find("--out"), std::string::npos);
}

TEST(Cli, ResolvedSettingsAreLogged) {
  const auto dir = forge::test::scratch_dir("cli_log");
  const auto r = forge_run("gen --sequences 1 --frames 2 --seed 5 --out " + q(dir / "d"), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto pos = r.err.find("forge gen: {");
  ASSERT_NE(pos, std::string::npos);
  const auto line = json::parse(r.err.substr(pos + 11, r.err.find('\n', pos) - pos - 11));
  EXPECT_EQ(line.at("command"), "gen");
  EXPECT_EQ(line.at("settings").at("config").at("seed"), 5);
}

// gen -> degrade -> eval -> recon -> stitch -> compare -> export-obj on the
// reference configuration. The noisy metrics are pinned as a regression
// check; everything else is checked against exact expectations.
TEST(Cli, ReferencePipeline) {
  const auto dir = forge::test::scratch_dir("cli_pipeline");
  const auto data = dir / "data", pred = dir / "pred", frames = dir / "frames";
  const auto configs = kSource / "configs";

  auto ok = [&](const std::string& args) {
    const auto r = forge_run(args, dir);
    EXPECT_EQ(r.code, 0) << args << "\n" << r.err;
    return r;
  };
  ok("gen --config " + q(configs / "reference.json") + " --out " + q(data) + " --jobs 2");
  expect_all_hundred(json::parse(ok("eval --truth " + q(data) + " --pred " + q(data)).out));

  ok("degrade --in " + q(data) + " --noise " + q(configs / "noise_a.json") + " --seed 7 --out " + q(pred));
  ok("eval --truth " + q(data) + " --pred " + q(pred) + " --out " + q(dir / "metrics.json"));
  const auto metrics = json::parse(forge::io::read_text(dir / "metrics.json"));
  const auto pinned = json::parse(forge::io::read_text(kSource / "tests/data/reference_noise_a_seed7_metrics.json"));
  for (const char* view : {"top", "front"}) {
    for (const char* cls : {"rack", "box"}) {
      for (const char* m : {"miou", "map"}) {
        EXPECT_NEAR(metrics.at(view).at(cls).at(m).get<double>(), pinned.at(view).at(cls).at(m).get<double>(), 1e-9)
            << view << " " << cls << " " << m;
      }
    }
  }

  const auto loss = json::parse(ok("loss --truth " + q(data) + " --pred " + q(pred)).out);
  EXPECT_GT(loss.at("l_sup").get<double>(), 0.0);
  EXPECT_EQ(loss.at("sequences").size(), 4u);

  // Noise-free reconstruction of the first sequence matches its scene.
  ok("recon --layouts " + q(data) + " --config " + q(configs / "recon.json") + " --out " + q(frames));
  ok("stitch --frames " + q(frames / "seq_0000") + " --out " + q(dir / "world.json"));
  const auto cmp = json::parse(
      ok("compare --world " + q(dir / "world.json") + " --scene " + q(data / "seq_0000/scene.json")).out);
  EXPECT_EQ(cmp.at("precision"), 1.0);
  EXPECT_EQ(cmp.at("recall"), 1.0);

  ok("export-obj --world " + q(dir / "world.json") + " --out " + q(dir / "world.obj"));
  ok("export-obj --scene " + q(data / "seq_0000/scene.json") + " --out " + q(dir / "scene.obj"));
  for (const char* name : {"world.obj", "scene.obj"}) {
    const auto text = forge::io::read_text(dir / name);
    EXPECT_NE(text.find("\nv "), std::string::npos) << name;
    EXPECT_NE(text.find("\nf "), std::string::npos) << name;
  }
  fs::remove_all(dir);
}
