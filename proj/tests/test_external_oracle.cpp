#include <doctest.h>

#include <fstream>

#include "gjsscc/classifier.hpp"
#include "gjsscc/error.hpp"
#include "support.hpp"

using namespace gjsscc;
using namespace std::chrono_literals;
using gjsscc::test::TempDir;

namespace {

std::string fake(const std::string& mode, int classes, const std::string& log = {}) {
  std::string cmd = std::string(FAKE_ORACLE_PATH) + " " + mode + " " + std::to_string(classes);
  if (!log.empty()) cmd += " '" + log + "'";
  return cmd;
}

std::vector<std::string> lines_of(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("handshake announces the class count") {
  ExternalOracle o(fake("echo", 3));
  CHECK(o.class_count() == 3);
  CHECK_FALSE(o.concurrent());
}

TEST_CASE("requests use absolute paths and the 1-based target") {
  TempDir dir;
  const auto log = (dir / "requests.log").string();
  {
    ExternalOracle o(fake("echo", 3, log));
    const auto d = o.classify(Image(4, 4, 1, 9), 2);
    CHECK(d.probs == std::vector<double>{0.1, 0.7, 0.2});
    CHECK(d.target == 2);
    CHECK(d.target_probability() == 0.7);
    o.classify(Image(4, 4, 3, 9), 3);
  }
  const auto lines = lines_of(log);
  REQUIRE(lines.size() == 2);
  for (const auto& l : lines) {
    CHECK(l.starts_with("CLASSIFY /"));
  }
  CHECK(lines[0].ends_with(".pgm 2"));
  CHECK(lines[1].ends_with(".ppm 3"));
}

TEST_CASE("the oracle reads the image the caller wrote") {
  ExternalOracle o(fake("mean", 2));
  const auto dark = o.classify(Image(8, 8, 1, 51), 1);
  CHECK(dark.probs[0] == doctest::Approx(0.2));
  const auto bright = o.classify(Image(8, 8, 3, 204), 1);
  CHECK(bright.probs[0] == doctest::Approx(0.8));
}

TEST_CASE("ERR responses surface as oracle errors and the session continues") {
  ExternalOracle o(fake("err", 3));
  for (int i = 0; i < 2; ++i) {
    try {
      o.classify(Image(2, 2, 1), 1);
      FAIL("expected OracleError");
    } catch (const OracleError& e) {
      CHECK(std::string(e.what()).find("model not loaded") != std::string::npos);
    }
  }
}

TEST_CASE("renormalised responses are flagged") {
  ExternalOracle o(fake("renorm", 3));
  const auto d = o.classify(Image(2, 2, 1), 1);
  CHECK(d.renormalized);
}

TEST_CASE("malformed responses are oracle errors") {
  ExternalOracle o(fake("garbage", 2));
  CHECK_THROWS_AS(o.classify(Image(2, 2, 1), 1), OracleError);
}

TEST_CASE("silent oracles time out") {
  ExternalOracle o(fake("silent", 2), 300ms);
  const auto start = std::chrono::steady_clock::now();
  CHECK_THROWS_AS(o.classify(Image(2, 2, 1), 1), OracleError);
  CHECK(std::chrono::steady_clock::now() - start < 10s);
}

TEST_CASE("handshake failures") {
  CHECK_THROWS_AS(ExternalOracle(fake("noready", 2), 2s), OracleError);
  CHECK_THROWS_AS(ExternalOracle(fake("badready", 2), 2s), OracleError);
  CHECK_THROWS_AS(ExternalOracle("exec /nonexistent/oracle-binary", 2s), OracleError);
}

TEST_CASE("a crashed oracle is an oracle error") {
  ExternalOracle o(fake("die-after-one", 2));
  CHECK_NOTHROW(o.classify(Image(2, 2, 1), 1));
  CHECK_THROWS_AS(o.classify(Image(2, 2, 1), 1), OracleError);
}

TEST_CASE("make_oracle builds external oracles") {
  auto o = make_oracle("external:" + fake("echo", 3));
  CHECK(o->class_count() == 3);
  CHECK(o->classify(Image(2, 2, 1), 3).target_probability() == 0.2);
}
