#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "thunder/retrieve_repair.hpp"

using namespace thunder;

namespace
{
const Environment &openEnv()
{
    static const EnvironmentSet set = builtinEnvironmentSet("point2d-five");
    return findEnvironment(set, "open");
}

/// Nodes along y = 5 every 1.0, chained.
SparseRoadmap corridorChain()
{
    SparseRoadmap r(2, 0.1 * openEnv().space().maximumExtent(), 1.2);
    for (int i = 0; i <= 9; ++i)
        r.addNode(Config{0.5 + i, 5.0}, GuardType::Coverage);
    for (NodeId i = 1; i < r.nodeCount(); ++i)
        r.addEdge(i - 1, i);
    return r;
}

/// Jittered grid with every pair within 1.5 joined.
SparseRoadmap randomGraph(Rng &rng, std::vector<oracle::WeightedEdge> *edges = nullptr)
{
    std::uniform_real_distribution<double> jitter(-0.3, 0.3);
    SparseRoadmap r(2, 1.5, 1.2);
    for (int x = 0; x < 10; ++x)
        for (int y = 0; y < 10; ++y)
            r.addNode(Config{0.5 + x + jitter(rng), 0.5 + y + jitter(rng)}, GuardType::Coverage);
    for (NodeId i = 0; i < r.nodeCount(); ++i)
        for (NodeId j = i + 1; j < r.nodeCount(); ++j)
            if (distance(r.node(i).config, r.node(j).config) < 1.5)
            {
                const EdgeId e = r.addEdge(i, j);
                if (edges)
                    edges->push_back({i, j, r.edges()[e].weight});
            }
    return r;
}
}  // namespace

TEST_CASE("A* returns optimal paths and expands in f order")
{
    Rng rng(1);
    std::vector<oracle::WeightedEdge> edges;
    const SparseRoadmap r = randomGraph(rng, &edges);
    for (int q = 0; q < 50; ++q)
    {
        const NodeId s = rng() % r.nodeCount();
        const NodeId g = rng() % r.nodeCount();
        std::vector<AStarExpansion> trace;
        const auto path = astarSearch(r, s, g, {}, &trace);
        REQUIRE(path.has_value());
        CHECK(path->front() == s);
        CHECK(path->back() == g);
        CHECK(nodePathCost(r, *path) == doctest::Approx(oracle::dijkstra(r.nodeCount(), edges, s, g)));
        for (std::size_t i = 1; i < trace.size(); ++i)
            CHECK(trace[i].costToCome + trace[i].heuristic >= trace[i - 1].costToCome + trace[i - 1].heuristic - 1e-9);
    }
    CHECK_THROWS_AS(astarSearch(r, 0, 100000, {}), Error);
}

TEST_CASE("lazy search equals Dijkstra over the graph minus disabled edges")
{
    Rng rng(2);
    const SparseRoadmap r = randomGraph(rng);
    const Environment blocked =
        openEnv().withObstacles("blocked", {Disc{{3.0, 4.0}, 1.2}, Disc{{6.5, 6.0}, 1.0}, Box{{4.6, 0.0}, {5.0, 3.0}}});
    for (int q = 0; q < 100; ++q)
    {
        NodeId s = rng() % r.nodeCount();
        NodeId g = rng() % r.nodeCount();
        if (!blocked.isStateValid(r.node(s).config) || !blocked.isStateValid(r.node(g).config))
            continue;
        EdgeValidityCache validity(r, blocked.fullValidator(), blocked.resolution());
        EdgeDisableSet disabled;
        const auto path = lazySearch(r, s, g, validity, disabled);
        std::vector<oracle::WeightedEdge> live;
        for (EdgeId e = 0; e < r.edgeCount(); ++e)
            if (!disabled.contains(e))
                live.push_back({r.edges()[e].a, r.edges()[e].b, r.edges()[e].weight});
        const double expect = oracle::dijkstra(r.nodeCount(), live, s, g);
        if (!path)
        {
            CHECK(std::isinf(expect));
            continue;
        }
        CHECK(nodePathCost(r, *path) == doctest::Approx(expect).epsilon(1e-12));
        for (std::size_t i = 1; i < path->size(); ++i)
            CHECK(checkMotion(r.node((*path)[i - 1]).config, r.node((*path)[i]).config, blocked.fullValidator(),
                              blocked.resolution()));
    }
}

TEST_CASE("findInvalidRanges brackets blocked stretches")
{
    const Environment env = openEnv().withObstacles("d", {Disc{{3.0, 5.0}, 0.3}, Disc{{7.0, 5.0}, 0.3}});
    const GeometricPath path(
        {Config{1.0, 5.0}, Config{2.0, 5.0}, Config{3.0, 5.0}, Config{4.0, 5.0}, Config{5.0, 5.0}, Config{6.5, 5.0},
         Config{7.5, 5.0}, Config{9.0, 5.0}});
    const auto ranges = findInvalidRanges(path, env.fullValidator(), env.resolution());
    REQUIRE(ranges.size() == 2);
    CHECK(ranges[0] == IndexRange{1, 3});
    CHECK(ranges[1] == IndexRange{5, 6});
    CHECK(findInvalidRanges(GeometricPath({Config{1.0, 1.0}, Config{2.0, 1.0}}), env.fullValidator(),
                            env.resolution())
              .empty());
    CHECK_THROWS_AS(findInvalidRanges(GeometricPath({Config{3.0, 5.0}, Config{9.0, 5.0}}), env.fullValidator(),
                                      env.resolution()),
                    Error);
}

TEST_CASE("repair splices new pieces and fails on sealed walls")
{
    const Environment env = openEnv().withObstacles("d", {Disc{{5.0, 5.0}, 1.0}});
    const GeometricPath path({Config{1.0, 5.0}, Config{9.0, 5.0}});
    const auto ranges = findInvalidRanges(path, env.fullValidator(), env.resolution());
    REQUIRE(ranges.size() == 1);
    const auto out = repairPath(path, ranges, env.space(), env.fullValidator(), PlannerBudget::forSeconds(10.0), 1);
    REQUIRE(out.ok());
    CHECK(out.segmentsRepaired == 1);
    CHECK(out.path.front() == path.front());
    CHECK(out.path.back() == path.back());
    CHECK(oracle::pathRevalidates(out.path.waypoints(), env.fullValidator(), env.resolution()));

    const Environment sealed = openEnv().withObstacles("sealed", {Box{{4.8, 0.0}, {5.2, 10.0}}});
    const auto wallRanges = findInvalidRanges(path, sealed.fullValidator(), sealed.resolution());
    PlannerBudget budget;
    budget.maxValidityChecks = 20000;
    const auto failed = repairPath(path, wallRanges, sealed.space(), sealed.fullValidator(), budget, 1);
    CHECK_FALSE(failed.ok());
    CHECK(failed.path.empty());
}

TEST_CASE("retrieve on an empty roadmap returns nothing")
{
    const SparseRoadmap empty(2, 1.4, 1.2);
    PlanningProblem p{Config{1.0, 1.0}, Config{9.0, 9.0}, "open"};
    const auto a = retrieve(p, empty, openEnv(), {}, PlannerBudget::forSeconds(1.0));
    CHECK_FALSE(a.result.has_value());
}

TEST_CASE("repeated query is recalled exactly from the first pair")
{
    const SparseRoadmap r = corridorChain();
    PlanningProblem p{Config{0.6, 5.3}, Config{9.4, 4.8}, "open"};
    const auto a = retrieve(p, r, openEnv(), {.seed = 3}, PlannerBudget::forSeconds(10.0));
    REQUIRE(a.result.has_value());
    CHECK(a.result->provenance == Solver::RecallExact);
    CHECK(a.result->candidatePairsTried == 1);
    CHECK(a.result->path.front() == p.start);
    CHECK(a.result->path.back() == p.goal);
    CHECK(oracle::pathRevalidates(a.result->path.waypoints(), openEnv().fullValidator(), openEnv().resolution()));
}

TEST_CASE("a new obstacle on one edge forces a single repair")
{
    const SparseRoadmap r = corridorChain();
    const Environment env = openEnv().withObstacles("d", {Disc{{5.0, 5.0}, 0.3}});
    PlanningProblem p{Config{0.6, 5.3}, Config{9.4, 4.8}, "d"};
    const auto a = retrieve(p, r, env, {.seed = 3}, PlannerBudget::forSeconds(10.0));
    REQUIRE(a.result.has_value());
    CHECK(a.result->provenance == Solver::RecallRepaired);
    CHECK(a.result->repairSegments == 1);
    CHECK(a.result->disabledEdges == 1);
    CHECK(oracle::pathRevalidates(a.result->path.waypoints(), env.fullValidator(), env.resolution()));

    const Environment sealed = openEnv().withObstacles("s", {Box{{4.8, 0.0}, {5.2, 10.0}}});
    PlannerBudget budget;
    budget.maxValidityChecks = 50000;
    CHECK_FALSE(retrieve(p, r, sealed, {.seed = 3}, budget).result.has_value());
}
