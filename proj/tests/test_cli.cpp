#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string cli() {
  const char* p = std::getenv("PRESHAPE_CLI");
  return p ? p : "preshape";
}

class Cli : public ::testing::Test {
 protected:
  fs::path dir;

  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("preshape_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  std::string write(const std::string& name, const std::string& text) {
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p.string();
  }

  int run(const std::string& args) {
    const std::string cmd = cli() + " " + args + " > " + (dir / "stdout.txt").string() + " 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  }

  std::string out() const { return slurp(dir / "stdout.txt"); }

  static std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
  }
};

const char* kCubic = R"({"family":"type2","potential":"cubic","lambda":[0.5,1,2],"resolution":33})";

}  // namespace

TEST_F(Cli, ClassifyReportsVerdict) {
  const std::string cfg = write("a.json", kCubic);
  EXPECT_EQ(run("classify --config " + cfg + " --out " + (dir / "o").string()), 0);
  EXPECT_NE(out().find("TypeII"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "o" / "type2_classification.json"));
}

TEST_F(Cli, ClassifyGenericStillExitsZero) {
  std::ostringstream a, b;
  a << "x,y,value\n";
  b << "x,y,value\n";
  for (int j = 0; j <= 16; ++j)
    for (int i = 0; i <= 16; ++i) {
      const double x = i / 16.0, y = j / 16.0;
      a << x << "," << y << "," << 3 + 0.5 * y + 0.3 * std::sin(2 * x + 3 * y) << "\n";
      b << x << "," << y << "," << 0.5 + 0.4 * x + 0.1 * std::sin(x + 2 * y) << "\n";
    }
  const std::string fa = write("a.csv", a.str()), fb = write("b.csv", b.str());
  EXPECT_EQ(run("classify --csv " + fa + " --csv-b " + fb + " --out " + (dir / "o").string()), 0) << out();
  EXPECT_NE(out().find("Generic"), std::string::npos) << out();
}

TEST_F(Cli, MalformedJsonIsInputError) {
  const std::string cfg = write("bad.json", "{\"family\": ");
  EXPECT_EQ(run("classify --config " + cfg + " --out " + (dir / "o").string()), 2);
}

TEST_F(Cli, RepeatedRootIsInputError) {
  EXPECT_EQ(run("realize --family type2 --lambda 1,1,2 --out " + (dir / "o").string()), 2);
}

TEST_F(Cli, UnknownFlagIsInputError) {
  EXPECT_EQ(run("realize --no-such-flag"), 2);
}

TEST_F(Cli, SingularTorusExitsThree) {
  const std::string cfg =
      write("t.json", R"({"family":"type2","potential":"log","lambda":[-1,0.5,2],"torus":true,"resolution":32})");
  EXPECT_EQ(run("realize --config " + cfg + " --out " + (dir / "o").string()), 3);
  EXPECT_NE(out().find("PeriodNonzero"), std::string::npos);
}

TEST_F(Cli, RealizeWritesMeshAndReport) {
  const std::string cfg = write("a.json", kCubic);
  EXPECT_EQ(run("realize --config " + cfg + " --format ply --out " + (dir / "o").string()), 0) << out();
  EXPECT_TRUE(fs::exists(dir / "o" / "type2.ply"));
  const std::string rep = slurp(dir / "o" / "type2_report.json");
  EXPECT_NE(rep.find("round_trip"), std::string::npos);
  EXPECT_EQ(slurp(dir / "o" / "type2.ply").rfind("ply", 0), 0u);
}

TEST_F(Cli, FlagsOverrideConfig) {
  const std::string cfg = write("a.json", kCubic);
  EXPECT_EQ(run("realize --config " + cfg + " --resolution 65 --format csv --out " + (dir / "o").string()), 0);
  const std::string csv = slurp(dir / "o" / "type2.csv");
  // header plus one line per node
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 65 * 65 + 1);
}

TEST_F(Cli, SameSeedIsByteIdentical) {
  const std::string cfg = write("a.json", kCubic);
  ASSERT_EQ(run("realize --config " + cfg + " --seed 5 --out " + (dir / "r1").string()), 0);
  ASSERT_EQ(run("realize --config " + cfg + " --seed 5 --out " + (dir / "r2").string()), 0);
  EXPECT_EQ(slurp(dir / "r1" / "type2_report.json"), slurp(dir / "r2" / "type2_report.json"));
  EXPECT_EQ(slurp(dir / "r1" / "type2.obj"), slurp(dir / "r2" / "type2.obj"));
}

TEST_F(Cli, GalleryOnlyOneItem) {
  EXPECT_EQ(run("gallery --only enneper --resolution 33 --out " + (dir / "o").string()), 0) << out();
  EXPECT_TRUE(fs::exists(dir / "o" / "enneper.obj"));
  EXPECT_FALSE(fs::exists(dir / "o" / "quadric.obj"));
  EXPECT_NE(out().find("pass enneper"), std::string::npos);
}

TEST_F(Cli, GalleryUnknownItem) {
  EXPECT_EQ(run("gallery --only nothing --out " + (dir / "o").string()), 2);
}
