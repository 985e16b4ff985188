#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <string>

#include "doctest.h"
#include "levym/config.hpp"

using namespace levym;

TEST_CASE("ini parsing: sections, comments, whitespace, last key wins") {
    const Config c = Config::parse_string(
        "# leading comment\n"
        "top = 1\n"
        "[model]\n"
        "mu = 0.25   ; trailing comment\n"
        "sigma=2\n"
        "\n"
        "[run]\n"
        "paths = 500\n"
        "paths = 700\n"
        "name = jump study\n");
    CHECK(c.has("top"));
    CHECK(c.get_num("model.mu", 0.0) == 0.25);
    CHECK(c.get_num("model.sigma", 0.0) == 2.0);
    CHECK(c.get_int("run.paths", 0) == 700);
    CHECK(c.get_str("run.name", "") == "jump study");
    CHECK_FALSE(c.has("run.missing"));
    CHECK(c.get_num("run.missing", -3.5) == -3.5);
    CHECK(c.get_str("run.missing", "dflt") == "dflt");
}

TEST_CASE("malformed lines and values carry origin and key in the error") {
    try {
        Config::parse_string("[run]\njust a bare token\n", "bad.ini");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("bad.ini") != std::string::npos);
        CHECK(msg.find("2") != std::string::npos);  // line number
    }

    const Config c = Config::parse_string("[run]\npaths = 12abc\nrate = nope\n");
    try {
        (void)c.get_num("run.rate", 0.0);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("run.rate") != std::string::npos);
    }
    // partially numeric values must be rejected, not truncated
    CHECK_THROWS_AS((void)c.get_int("run.paths", 0), ConfigError);
    CHECK_THROWS_AS((void)c.get_num("run.paths", 0.0), ConfigError);
}

TEST_CASE("model building with defaults and jump laws") {
    const LevyModel plain = Config::parse_string("").model();
    CHECK(plain.mu() == 0.0);
    CHECK(plain.sigma() == 1.0);
    CHECK(plain.horizon() == 1.0);
    CHECK(plain.intensity() == 0.0);

    const LevyModel two = Config::parse_string(
        "[model]\nmu = 0.1\nsigma = 0.5\nT = 2\n"
        "[jump]\nlaw = two_point\nz1 = 0.6\np1 = 0.25\nz2 = -0.2\nintensity = 3\n")
        .model();
    CHECK(two.mu() == 0.1);
    CHECK(two.horizon() == 2.0);
    CHECK(two.intensity() == 3.0);
    CHECK(two.jump().z1 == 0.6);
    CHECK(two.jump().p1 == 0.25);
    CHECK(two.jump().p2 == doctest::Approx(0.75));

    const LevyModel gauss = Config::parse_string(
        "[jump]\nlaw = gaussian\nsd = 0.4\n").model();
    CHECK(gauss.intensity() == 1.0);  // default intensity once a law is set

    const LevyModel uni = Config::parse_string(
        "[jump]\nlaw = uniform\nlo = -0.5\nhi = 0.5\nintensity = 2\n").model();
    CHECK(uni.jump().law == JumpLaw::uniform);

    try {
        (void)Config::parse_string("[jump]\nlaw = cauchy\n").model();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("jump.law") != std::string::npos);
    }
    CHECK_THROWS_AS((void)Config::parse_string("[model]\nsigma = 0\n").model(),
                    SigmaNotPositive);
}

TEST_CASE("missing file raises a config error") {
    CHECK_THROWS_AS((void)Config::parse_file("definitely_absent.ini"), ConfigError);
}
