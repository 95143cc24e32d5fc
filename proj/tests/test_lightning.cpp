#include <doctest.h>

#include <filesystem>

#include "oracles.hpp"
#include "thunder/lightning.hpp"

using namespace thunder;

namespace
{
const Environment &env(const std::string &id)
{
    static const EnvironmentSet set = builtinEnvironmentSet("point2d-five");
    return findEnvironment(set, id);
}

GeometricPath line(double x0, double y0, double x1, double y1)
{
    return GeometricPath({Config{x0, y0}, Config{x1, y1}});
}
}  // namespace

TEST_CASE("dtw distance")
{
    const GeometricPath p({Config{0.0, 0.0}, Config{1.0, 2.0}, Config{3.0, 1.0}});
    CHECK(dtwDistance(p, p) == 0.0);
    CHECK(dtwDistance(GeometricPath({Config{0.0, 0.0}}), GeometricPath({Config{3.0, 4.0}})) == doctest::Approx(5.0));
    const GeometricPath q({Config{0.5, 0.0}, Config{2.0, 2.5}, Config{2.5, 0.0}});
    CHECK(dtwDistance(p, q) == doctest::Approx(oracle::dtwEnumerate(p.waypoints(), q.waypoints())));
    CHECK(dtwDistance(p, q) == doctest::Approx(dtwDistance(q, p)));
    CHECK(dtwDistance(p, q) > 0.0);
    CHECK_THROWS_AS(dtwDistance(p, GeometricPath()), Error);
}

TEST_CASE("resampling keeps endpoints and spacing")
{
    const GeometricPath p({Config{0.0, 0.0}, Config{3.0, 0.0}, Config{3.0, 4.0}});
    const auto r = resamplePath(p, 8);
    REQUIRE(r.size() == 8);
    CHECK(r.front() == p.front());
    CHECK(r.back() == p.back());
    CHECK(r.length() <= p.length() + 1e-12);
    CHECK_THROWS_AS(resamplePath(p, 1), Error);
}

TEST_CASE("pscore")
{
    const Environment &open = env("open");
    const auto path = line(1.0, 5.0, 9.0, 5.0);
    CHECK(pscore(path, open.fullValidator(), 0.05) == 0.0);
    const Environment covered = open.withObstacles("c", {Box{{0.0, 4.0}, {10.0, 6.0}}});
    CHECK(pscore(path, covered.fullValidator(), 0.05) == 1.0);
    const Environment half = open.withObstacles("h", {Box{{5.0, 0.0}, {10.0, 10.0}}});
    const double step = 0.05 / path.length();
    CHECK(std::abs(pscore(path, half.fullValidator(), 0.05) - 0.5) <= step + 1e-9);
}

TEST_CASE("maybeStore filters near duplicates")
{
    PathStore store(2);
    const auto a = line(1.0, 1.0, 9.0, 1.0);
    CHECK(store.maybeStore(a));
    CHECK_FALSE(store.maybeStore(a));
    // Separated corpus: each line is far from all the others.
    for (int i = 1; i < 5; ++i)
    {
        const auto p = line(1.0, 1.0 + 2.0 * i, 9.0, 1.0 + 2.0 * i);
        for (std::size_t k = 0; k < store.size(); ++k)
            CHECK(dtwDistance(resamplePath(p, 32), resamplePath(store.path(k), 32)) > 40.0);
        CHECK(store.maybeStore(p));
    }
    CHECK(store.size() == 5);
    // A slight perturbation stays under the threshold.
    CHECK_FALSE(store.maybeStore(line(1.0, 1.05, 9.0, 1.05)));
    CHECK(store.size() == 5);
    CHECK_THROWS_AS(store.maybeStore(GeometricPath({Config{1.0}})), Error);
}

TEST_CASE("retrieveTopN matches the linear ranking oracle")
{
    PathStore store(2);
    CHECK(store.retrieveTopN(Config{0.0, 0.0}, Config{1.0, 1.0}).empty());
    store.add(line(1.0, 1.0, 2.0, 2.0));
    CHECK(store.retrieveTopN(Config{0.0, 0.0}, Config{1.0, 1.0}) == std::vector<std::size_t>{0});

    Rng rng(3);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    PathStore big(2);
    std::vector<Config> starts, goals;
    for (int i = 0; i < 100; ++i)
    {
        const auto p = line(u(rng), u(rng), u(rng), u(rng));
        starts.push_back(p.front());
        goals.push_back(p.back());
        big.add(p);
    }
    for (int q = 0; q < 20; ++q)
    {
        const Config s{u(rng), u(rng)};
        const Config g{u(rng), u(rng)};
        CHECK(big.retrieveTopN(s, g) == oracle::rankEndpoints(starts, goals, s, g, 10));
    }
}

TEST_CASE("path store persistence")
{
    PathStore store(2, 3.5);
    store.add(line(1.0, 1.0, 2.0, 2.0));
    store.add(GeometricPath({Config{0.0, 0.0}, Config{1.0, 0.0}, Config{1.0, 1.0}}));
    const auto bytes = serializePathStore(store);
    CHECK(bytes.size() == store.serializedBytes());
    CHECK(bytes.size() == 28 + (8 + 32) + (8 + 48));
    const auto back = deserializePathStore(bytes, 2);
    REQUIRE(back.size() == 2);
    CHECK(back.dtwThreshold() == 3.5);
    CHECK(back.path(1) == store.path(1));

    const std::string file = (std::filesystem::temp_directory_path() / "thunder_test_store.db").string();
    CHECK(savePathStore(store, file) == bytes.size());
    CHECK(loadPathStore(file).size() == 2);
    std::filesystem::remove(file);

    using Kind = RoadmapFileError::Kind;
    auto kindOf = [](std::span<const std::uint8_t> b, std::optional<std::size_t> dim = std::nullopt) {
        try
        {
            deserializePathStore(b, dim);
        }
        catch (const RoadmapFileError &e)
        {
            return e.kind();
        }
        FAIL("no error");
        return Kind::Open;
    };
    auto bad = bytes;
    bad[1] = 'X';
    CHECK(kindOf(bad) == Kind::BadMagic);
    bad = bytes;
    bad[4] = 2;
    CHECK(kindOf(bad) == Kind::VersionMismatch);
    CHECK(kindOf(bytes, 3) == Kind::DimensionMismatch);
    CHECK(kindOf(std::span(bytes).first(bytes.size() - 3)) == Kind::Truncated);
    CHECK_THROWS_AS(loadPathStore("/nonexistent/dir/store.db"), RoadmapFileError);
}

TEST_CASE("lightning: empty store solves from scratch, repeats are recalled")
{
    const Environment &e = env("narrow-passage");
    Lightning l(e, {.seed = 1, .deterministic = true});
    const auto p = randomGoalProblem(e, builtinStart("point2d-five"), 7);
    const auto first = l.solve(p, e);
    REQUIRE(first.ok());
    CHECK(first.solver == Solver::Scratch);
    CHECK(l.submitExperience(first));
    // Stored paths are dense.
    const auto stored = l.store()->path(0);
    for (std::size_t i = 1; i < stored.size(); ++i)
        CHECK(distance(stored[i - 1], stored[i]) <= e.resolution() + 1e-9);

    const auto again = l.solve(p, e);
    REQUIRE(again.ok());
    CHECK(again.solver == Solver::RecallExact);
    CHECK(oracle::pathRevalidates(again.path.waypoints(), e.fullValidator(), e.resolution()));
    CHECK(pscore(l.store()->path(0), e.fullValidator(), e.resolution()) == 0.0);
}

TEST_CASE("lightning recall repairs around a new obstacle")
{
    const Environment &open = env("open");
    PathStore store(2);
    store.add(GeometricPath(discretizePath(line(1.0, 5.0, 9.0, 5.0), 0.05)));
    const Environment blocked = open.withObstacles("b", {Disc{{5.0, 5.0}, 0.5}});
    PlanningProblem p{Config{1.0, 5.2}, Config{9.0, 4.8}, "b", 10.0, 3};
    const auto entry = lightningRecall(p, store, blocked, {}, PlannerBudget::forSeconds(10.0));
    REQUIRE(entry.ok());
    CHECK(entry.solver == Solver::RecallRepaired);
    CHECK(entry.repairSegments == 1);
    CHECK(oracle::pathRevalidates(entry.path.waypoints(), blocked.fullValidator(), blocked.resolution()));
}

TEST_CASE("lightning store never shrinks and snapshots stay stable")
{
    const Environment &e = env("clutter");
    Lightning l(e, {.seed = 2, .deterministic = true});
    std::size_t last = 0;
    std::shared_ptr<const PathStore> held;
    for (std::uint64_t i = 0; i < 30; ++i)
    {
        const auto r = l.solve(randomGoalProblem(e, builtinStart("point2d-five"), i), e);
        REQUIRE(r.ok());
        CHECK(oracle::pathRevalidates(r.path.waypoints(), e.fullValidator(), e.resolution()));
        if (i == 10)
            held = l.store();
        l.submitExperience(r);
        const auto s = l.snapshotStats();
        CHECK(s.paths >= last);
        last = s.paths;
    }
    REQUIRE(held);
    CHECK(held->size() <= 11);
    const auto s = l.snapshotStats();
    CHECK(s.stored + s.rejected == 30);
    CHECK(s.stored == s.paths);
}
