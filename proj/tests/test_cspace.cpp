#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "thunder/cspace.hpp"

using namespace thunder;

TEST_CASE("distance and interpolate")
{
    const Config a{0.0, 0.0};
    const Config b{3.0, 4.0};
    CHECK(distance(a, b) == doctest::Approx(5.0));
    CHECK(distance(a, a) == 0.0);
    CHECK(interpolate(a, b, 0.5) == Config{1.5, 2.0});
    CHECK(interpolate(a, b, 0.0) == a);
    CHECK(interpolate(a, b, 1.0) == b);
    CHECK_THROWS_AS(interpolate(a, b, 1.5), Error);
    CHECK_THROWS_AS(distance(a, Config{1.0}), Error);
}

TEST_CASE("space bounds and sampling")
{
    const SpaceDefinition space({{0.0, 10.0}, {-1.0, 1.0}}, 0.05);
    CHECK(space.maximumExtent() == doctest::Approx(std::sqrt(104.0)));
    CHECK(space.makeConfig({12.0, -3.0}) == Config{10.0, -1.0});
    CHECK_FALSE(space.satisfiesBounds(Config{10.5, 0.0}));
    Rng rng(7);
    for (int i = 0; i < 1000; ++i)
        CHECK(space.satisfiesBounds(space.sampleUniform(rng)));
    CHECK_THROWS_AS(SpaceDefinition({{1.0, 0.0}}, 0.1), Error);
    CHECK_THROWS_AS(SpaceDefinition({{0.0, 1.0}}, 0.0), Error);
}

TEST_CASE("path length matches an arc-length walk")
{
    Rng rng(3);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int trial = 0; trial < 50; ++trial)
    {
        std::vector<Config> pts;
        for (int i = 0; i < 2 + trial % 7; ++i)
            pts.push_back(Config{u(rng), u(rng), u(rng)});
        const GeometricPath path(pts);
        CHECK(path.length() == doctest::Approx(oracle::arcLength(pts)).epsilon(1e-12));
        CHECK(path.reversed().length() == doctest::Approx(path.length()));
    }
}

TEST_CASE("stateAtArcLength walks the polyline")
{
    const GeometricPath path({Config{0.0, 0.0}, Config{1.0, 0.0}, Config{1.0, 2.0}});
    CHECK(path.stateAtArcLength(0.5) == Config{0.5, 0.0});
    const Config q = path.stateAtArcLength(2.0);
    CHECK(q[0] == doctest::Approx(1.0));
    CHECK(q[1] == doctest::Approx(1.0));
    CHECK(path.stateAtArcLength(-1.0) == path.front());
    CHECK(path.stateAtArcLength(99.0) == path.back());
}

TEST_CASE("discretizing a unit segment at 0.25 gives five states")
{
    const GeometricPath seg({Config{0.0, 0.0}, Config{1.0, 0.0}});
    const auto states = discretizePath(seg, 0.25);
    REQUIRE(states.size() == 5);
    for (std::size_t i = 0; i < states.size(); ++i)
        CHECK(states[i][0] == doctest::Approx(0.25 * static_cast<double>(i)));
}

TEST_CASE("discretization count and spacing")
{
    Rng rng(11);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int trial = 0; trial < 100; ++trial)
    {
        std::vector<Config> pts;
        for (int i = 0; i < 2 + trial % 5; ++i)
            pts.push_back(Config{u(rng), u(rng)});
        const double res = 0.05 + 0.01 * (trial % 10);
        const GeometricPath path(pts);
        const auto d = discretizePathWithArcLength(path, res);
        CHECK(d.states.size() == oracle::discretizedCount(pts, res));
        CHECK(d.states.size() == d.arcLength.size());
        for (std::size_t i = 1; i < d.states.size(); ++i)
            CHECK(distance(d.states[i - 1], d.states[i]) <= res + 1e-9);
        CHECK(d.states.front() == pts.front());
        CHECK(d.states.back() == pts.back());
        CHECK(d.arcLength.back() == doctest::Approx(path.length()));
    }
}

TEST_CASE("checkMotion agrees with a fine-resolution oracle on a disc")
{
    const auto valid = [](const Config &q) { return std::hypot(q[0] - 5.0, q[1] - 5.0) > 1.0; };
    Rng rng(5);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    int agree = 0, total = 0;
    for (int i = 0; i < 2000; ++i)
    {
        const Config a{u(rng), u(rng)};
        const Config b{u(rng), u(rng)};
        const bool fast = checkMotion(a, b, valid, 0.05);
        const bool fine = oracle::fineMotion(a, b, valid, 0.001);
        // Coarse sampling may only miss grazing contacts, never invent a collision.
        if (!fast)
            CHECK_FALSE(fine);
        agree += fast == fine ? 1 : 0;
        ++total;
    }
    CHECK(agree >= total * 99 / 100);
}

TEST_CASE("checkMotion is symmetric and includes endpoints")
{
    const auto valid = [](const Config &q) { return q[0] < 0.5 || q[0] > 0.52; };
    Rng rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 500; ++i)
    {
        const Config a{u(rng)};
        const Config b{u(rng)};
        CHECK(checkMotion(a, b, valid, 0.01) == checkMotion(b, a, valid, 0.01));
    }
    CHECK_FALSE(checkMotion(Config{0.51}, Config{0.9}, valid, 1.0));
    CHECK(checkPath(GeometricPath({Config{0.1}}), valid, 0.1));
    CHECK_FALSE(checkPath(GeometricPath(), valid, 0.1));
}
