#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dcda/config.hpp"

#include <string>

using namespace dcda;

namespace {

bool mentions(const ParseResult& r, int line, const std::string& text) {
  for (const ConfigIssue& e : r.errors)
    if (e.line == line && e.message.find(text) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("minimal config parses") {
  const ParseResult r = parse_config(
      "problem.family = linreg\ngraph.kind = full\npolicy.kind = static\nchannel.kind = perfect\nT = 100\nseed = 1\n");
  REQUIRE(r.ok());
  CHECK(r.config->T == 100);
  CHECK(r.config->seed == 1);
  CHECK(r.config->d == 30);
  CHECK(r.config->m == 20);
}

TEST_CASE("family sets size defaults that explicit keys override") {
  const ParseResult r = parse_config("problem.family = robust\nproblem.m = 4\n");
  REQUIRE(r.ok());
  CHECK(r.config->d == 20);
  CHECK(r.config->m == 4);
}

TEST_CASE("comments and blank lines") {
  const ParseResult r = parse_config("# header\n\n  T = 7   # trailing\n\t\nseed=3\n");
  REQUIRE(r.ok());
  CHECK(r.config->T == 7);
  CHECK(r.config->seed == 3);
}

TEST_CASE("round robin block must divide d") {
  const ParseResult r = parse_config("policy.kind = round_robin\npolicy.m = 7\nproblem.d = 30\n");
  CHECK_FALSE(r.ok());
  CHECK(mentions(r, 2, "m must divide d"));
  const ParseResult f = parse_config("policy.kind = round_robin\npolicy.fraction = 0.5\nproblem.d = 30\n");
  REQUIRE(f.ok());
  CHECK(f.config->share_block() == 15);
}

TEST_CASE("duplicate keys report both lines") {
  const ParseResult r = parse_config("T = 5\nseed = 2\nT = 6\n");
  CHECK_FALSE(r.ok());
  CHECK(mentions(r, 3, "line 1"));
  CHECK(mentions(r, 3, "line 3"));
}

TEST_CASE("every error is reported with its line") {
  const ParseResult r = parse_config("T = ten\nbogus.key = 1\ngraph.kind = star\nno equals sign\nstep.C = -2\n");
  CHECK_FALSE(r.ok());
  CHECK(mentions(r, 1, "integer"));
  CHECK(mentions(r, 2, "unknown key"));
  CHECK(mentions(r, 3, "not one of"));
  CHECK(mentions(r, 4, "key = value"));
  CHECK(mentions(r, 5, "positive"));
  CHECK(r.errors.size() == 5);
  CHECK(r.error_text().find("line 3") != std::string::npos);
}

TEST_CASE("cross-field constraints") {
  CHECK_FALSE(parse_config("gradient.mode = minibatch\ngradient.batch = 50\n").ok());
  CHECK_FALSE(parse_config("policy.kind = randomized\npolicy.mode = all_to_all\npolicy.rho = 0\n").ok());
  CHECK_FALSE(parse_config("channel.kind = quantized\nchannel.zoom_beta = 1\n").ok());
  CHECK_FALSE(parse_config("problem.family = robust\nproblem.radius = 2\n").ok());
  CHECK_FALSE(parse_config("bounds.delta = 1\n").ok());
  CHECK_FALSE(parse_config("policy.kind = static\npolicy.fraction = 0.5\n").ok());
  CHECK(parse_config("policy.kind = randomized\npolicy.fraction = 0\n").ok());
}

TEST_CASE("step constant accepts auto") {
  const ParseResult r = parse_config("step.C = auto\n");
  REQUIRE(r.ok());
  CHECK(r.config->step_auto);
  CHECK(parse_config("step.C = 0.25\n").config->step_c == 0.25);
}

TEST_CASE("canonical text round-trips and ignores metadata") {
  ExperimentConfig c;
  c.family = "svm";
  c.policy = "randomized";
  c.fraction = 0.25;
  c.svm_sigma = 0.1 + 0.2;  // not exactly representable in short decimal
  c.step_auto = true;
  c.seed = 18446744073709551615ULL;
  const std::string text = to_text(c) + "meta.note = anything at all\n";
  const ParseResult r = parse_config(text);
  REQUIRE(r.ok());
  CHECK(equivalent(*r.config, c));
  CHECK(r.config->svm_sigma == c.svm_sigma);
  CHECK(r.config->meta.at("note") == "anything at all");
  ExperimentConfig other = c;
  other.T = 5;
  CHECK_FALSE(equivalent(other, c));
}

TEST_CASE("presets are valid configs") {
  for (const char* name : {"svm", "linreg", "robust"}) {
    const ParseResult r = parse_config(to_text(preset_base(name)));
    REQUIRE(r.ok());
    CHECK(r.config->T == 2000);
  }
  CHECK_THROWS(preset_base("nope"));
}

TEST_CASE("sweep files") {
  const SweepParseResult ok = parse_sweep(
      "problem.family = svm\npolicy.kind = randomized\nsweep.param = policy.fraction\nsweep.values = 0, 0.25, 0.5, 1\n"
      "sweep.seeds = 1, 2\nsweep.output_dir = out\n");
  REQUIRE(ok.spec);
  CHECK(ok.spec->params.size() == 1);
  CHECK(ok.spec->params[0].second.size() == 4);
  CHECK(ok.spec->seeds == std::vector<std::uint64_t>{1, 2});
  CHECK(ok.spec->output_dir == "out");

  const SweepParseResult two = parse_sweep(
      "sweep.param = graph.kind\nsweep.values = full, ring\nsweep.param2 = T\nsweep.values2 = 10, 20\n");
  REQUIRE(two.spec);
  CHECK(two.spec->params.size() == 2);

  CHECK_FALSE(parse_sweep("sweep.param = problem.nonsense\nsweep.values = 1\n").spec);
  CHECK_FALSE(parse_sweep("sweep.param = T\n").spec);
  CHECK_FALSE(parse_sweep("T = 5\n").spec);
  const SweepParseResult bad_value = parse_sweep("sweep.param = graph.kind\nsweep.values = full, star\n");
  CHECK_FALSE(bad_value.spec);
  CHECK_FALSE(parse_sweep("sweep.param = T\nsweep.values = 1\nsweep.bogus = 2\n").spec);
}
