#include <doctest.h>

#include <fstream>

#include "gjsscc/classifier.hpp"
#include "gjsscc/error.hpp"
#include "support.hpp"

using namespace gjsscc;
using gjsscc::test::TempDir;
using gjsscc::test::textured;

TEST_CASE("input equal to a template is classified as that template") {
  const Image a(4, 4, 1, 10), b = textured(4, 4), c(4, 4, 1, 240);
  PrototypeModel m({a, b, c}, 1.0);
  const auto d = m.classify(b, 2);
  CHECK(d.argmax() == 2);
  CHECK(d.target_probability() > 0.99);
  CHECK(d.target == 2);
  CHECK_FALSE(d.renormalized);
}

TEST_CASE("identical templates give a uniform distribution") {
  const Image t = textured(5, 3);
  PrototypeModel m({t, t}, 0.3);
  for (std::uint8_t v : {0, 77, 255}) {
    const auto d = m.classify(Image(5, 3, 1, v), 1);
    CHECK(d.probs[0] == 0.5);
    CHECK(d.probs[1] == 0.5);
  }
}

TEST_CASE("three flat templates against mid-gray input") {
  // 40-digit softmax of -beta * MSE with MSE = 128^2, 0, 127^2 and beta = 1/255^2.
  PrototypeModel m({Image(6, 6, 1, 0), Image(6, 6, 1, 128), Image(6, 6, 1, 255)}, 1.0 / (255.0 * 255.0));
  const auto d = m.classify(Image(6, 6, 1, 128), 2);
  CHECK(std::abs(d.probs[0] - 0.30390704742522268) < 1e-15);
  CHECK(std::abs(d.probs[1] - 0.39099177290127950) < 1e-15);
  CHECK(std::abs(d.probs[2] - 0.30510117967349783) < 1e-15);
}

TEST_CASE("permuting templates permutes probabilities") {
  const Image t0(4, 4, 1, 30), t1 = textured(4, 4), t2(4, 4, 1, 200);
  const Image input = textured(4, 4, 1);
  const auto base = PrototypeModel({t0, t1, t2}, 0.01).classify(input, 1).probs;
  const auto perm = PrototypeModel({t2, t0, t1}, 0.01).classify(input, 1).probs;
  CHECK(perm[0] == base[2]);
  CHECK(perm[1] == base[0]);
  CHECK(perm[2] == base[1]);
}

TEST_CASE("beta scales logits and keeps the argmax") {
  const Image t0(4, 4, 1, 30), t1(4, 4, 1, 90), t2(4, 4, 1, 200);
  const Image input(4, 4, 1, 80);
  PrototypeModel lo({t0, t1, t2}, 0.001), hi({t0, t1, t2}, 0.004);
  const auto l1 = lo.logits(input), l4 = hi.logits(input);
  for (std::size_t i = 0; i < 3; ++i) CHECK(l4[i] == doctest::Approx(4 * l1[i]));
  CHECK(lo.classify(input, 1).argmax() == hi.classify(input, 1).argmax());
  CHECK(lo.classify(input, 1).probs == lo.classify(input, 1).probs);
}

TEST_CASE("distributions sum to one") {
  PrototypeModel m({Image(3, 3, 3, 0), textured(3, 3, 3), Image(3, 3, 3, 255)}, 0.002);
  const auto d = m.classify(textured(3, 3, 3), 3);
  double s = 0;
  for (double p : d.probs) {
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    s += p;
  }
  CHECK(std::abs(s - 1.0) < 1e-9);
}

TEST_CASE("prototype model preconditions") {
  CHECK_THROWS_AS(PrototypeModel({}, 1.0), DomainError);
  CHECK_THROWS_AS(PrototypeModel({Image(2, 2, 1)}, 0.0), DomainError);
  CHECK_THROWS_AS(PrototypeModel({Image(2, 2, 1), Image(3, 2, 1)}, 1.0), DomainError);
  PrototypeModel m({Image(2, 2, 1), Image(2, 2, 1, 9)}, 1.0);
  CHECK_THROWS_AS(m.classify(Image(3, 3, 1), 1), OracleError);
  CHECK_THROWS_AS(m.classify(Image(2, 2, 1), 3), DomainError);
}

TEST_CASE("prototype model loads from a JSON description") {
  TempDir dir;
  save_raster(Image(4, 4, 1, 0), dir / "a.pgm");
  save_raster(Image(4, 4, 1, 255), dir / "b.pgm");
  {
    std::ofstream out(dir / "model.json");
    out << R"({"beta": 0.5, "templates": ["a.pgm", "b.pgm"]})";
  }
  const auto m = PrototypeModel::load(dir / "model.json");
  CHECK(m.class_count() == 2);
  CHECK(m.beta() == 0.5);
  auto o = make_oracle("builtin:" + (dir / "model.json").string());
  CHECK(o->class_count() == 2);
  CHECK(o->classify(Image(4, 4, 1, 250), 2).argmax() == 2);
  CHECK_THROWS_AS(make_oracle("magic:foo"), ConfigError);
  CHECK_THROWS(make_oracle("builtin:" + (dir / "missing.json").string()));
}

TEST_CASE("protocol responses") {
  SUBCASE("OK line") {
    const auto d = parse_oracle_response("OK 0.1 0.7 0.2\n", 3, 2);
    CHECK(d.probs == std::vector<double>{0.1, 0.7, 0.2});
    CHECK(d.target == 2);
    CHECK(d.target_probability() == 0.7);
    CHECK_FALSE(d.renormalized);
  }
  SUBCASE("ERR line carries its message") {
    try {
      parse_oracle_response("ERR model not loaded", 3, 1);
      FAIL("expected OracleError");
    } catch (const OracleError& e) {
      CHECK(std::string(e.what()).find("model not loaded") != std::string::npos);
    }
  }
  SUBCASE("slightly off sums are renormalised and flagged") {
    const auto d = parse_oracle_response("OK 0.1 0.7 0.2000003", 3, 1);
    CHECK(d.renormalized);
    double s = 0;
    for (double p : d.probs) s += p;
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
  SUBCASE("malformed lines") {
    CHECK_THROWS_AS(parse_oracle_response("OK 0.5 banana", 2, 1), OracleError);
    CHECK_THROWS_AS(parse_oracle_response("OK", 1, 1), OracleError);
    CHECK_THROWS_AS(parse_oracle_response("OK ", 1, 1), OracleError);
    CHECK_THROWS_AS(parse_oracle_response("YES 1", 1, 1), OracleError);
    CHECK_THROWS_AS(parse_oracle_response("OK 0.5  0.5", 2, 1), OracleError);
    CHECK_THROWS_AS(parse_oracle_response("OK 0.5 0.5", 3, 1), OracleError);
    CHECK_THROWS_AS(parse_oracle_response("OK 1.5 -0.5", 2, 1), OracleError);
    CHECK_THROWS_AS(parse_oracle_response("OK 0.6 0.6", 2, 1), OracleError);
    CHECK_THROWS_AS(parse_oracle_response("OK nan 1", 2, 1), OracleError);
  }
}
