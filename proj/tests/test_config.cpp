#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "ppgf/config.hpp"

using namespace ppgf;

namespace {

std::string write_cfg(const std::string& name, const std::string& content) {
  std::filesystem::create_directories("tmp_cfg");
  const std::string path = "tmp_cfg/" + name;
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("defaults, overrides and schema validation") {
  RunConfig rc = RunConfig::defaults();
  CHECK(rc.get_int("batch_size") == 32);
  CHECK(rc.get_double("lambda3") == 5.0);
  CHECK(rc.get_bool("detach_confidence_gate"));
  rc.set("lambda3", "2.5");
  CHECK(rc.get_double("lambda3") == 2.5);
  CHECK(!rc.is_default("lambda3"));
  CHECK(rc.is_default("lambda1"));
  CHECK_THROWS_AS(rc.set("no_such_key", "1"), Error);
  CHECK_THROWS_AS(rc.set("batch_size", "abc"), Error);
  CHECK_THROWS_AS(rc.set("batch_size", "1.5"), Error);
  CHECK_THROWS_AS(rc.set("detach_confidence_gate", "maybe"), Error);
  CHECK_THROWS_AS(rc.set("grid_lr", "1e-3,,"), Error);
}

TEST_CASE("config files: sections, comments, later keys win") {
  const auto path = write_cfg("a.cfg",
                              "# demo\n"
                              "[data]\n"
                              "path = foo.csv\n"
                              "target_column = y\n"
                              "[train]\n"
                              "lr = 0.005\n"
                              "lr = 0.001\n");
  RunConfig rc = RunConfig::defaults();
  rc.load_file(path);
  CHECK(rc.get_str("path") == "foo.csv");
  CHECK(rc.get_double("lr") == 0.001);
  const auto bad = write_cfg("bad.cfg", "just words\n");
  RunConfig rc2 = RunConfig::defaults();
  CHECK_THROWS_AS(rc2.load_file(bad), Error);
  RunConfig rc3 = RunConfig::defaults();
  CHECK_THROWS_AS(rc3.load_file("tmp_cfg/missing.cfg"), Error);
}

TEST_CASE("resolved text is canonical and reparses to itself") {
  RunConfig rc = RunConfig::defaults();
  rc.set("path", "data.csv");
  rc.set("target_column", "load");
  rc.set("seed", "7");
  const std::string r1 = rc.resolved();
  const auto path = write_cfg("resolved.cfg", r1);
  RunConfig rc2 = RunConfig::defaults();
  rc2.load_file(path);
  CHECK(rc2.resolved() == r1);
}

TEST_CASE("typed extraction") {
  RunConfig rc = RunConfig::defaults();
  rc.set("lookback", "16");
  rc.set("groups", "4");
  rc.set("ablation", "no_conv,no_grn");
  PPGFConfig mc = rc.model_config(3);
  CHECK(mc.L == 16);
  CHECK(mc.D == 3);
  CHECK(mc.K == 4);
  CHECK(mc.has(Ablation::NoConv));
  CHECK(mc.has(Ablation::NoGrn));
  CHECK(!mc.has(Ablation::NoClassifier));
  rc.set("ablation", "bogus");
  CHECK_THROWS_AS(rc.model_config(3), Error);

  TrainConfig tc = rc.train_config();
  CHECK(tc.batch_size == 32);
  CHECK(tc.patience == 20);

  GridSpace gs = rc.grid_space();
  CHECK(gs.size() == 2000);  // paper defaults: 4*4*5*5*5

  SplitSpec sp = rc.split_spec();
  CHECK(sp.train_frac == 0.6);
}
