#include "thunder/retrieve_repair.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <tuple>

namespace thunder
{

const char *toString(Solver solver)
{
    switch (solver)
    {
        case Solver::Scratch:
            return "scratch";
        case Solver::RecallExact:
            return "recall-exact";
        case Solver::RecallRepaired:
            return "recall-repaired";
    }
    return "unknown";
}

EdgeValidityCache::EdgeValidityCache(const SparseRoadmap &roadmap, StateValidator validator, double resolution)
  : roadmap_(roadmap), validator_(std::move(validator)), resolution_(resolution)
{
}

bool EdgeValidityCache::valid(EdgeId edge)
{
    if (const auto it = cache_.find(edge); it != cache_.end())
        return it->second;
    const auto &e = roadmap_.edges().at(edge);
    const bool ok = checkMotion(roadmap_.node(e.a).config, roadmap_.node(e.b).config, validator_, resolution_);
    cache_.emplace(edge, ok);
    return ok;
}

std::vector<NodeId> connectEndpoints(const Config &q, const SparseRoadmap &roadmap, const StateValidator &validator,
                                     double resolution)
{
    std::vector<NodeId> out;
    for (NodeId id : roadmap.nearestWithinDelta(q))
        if (checkMotion(q, roadmap.node(id).config, validator, resolution))
            out.push_back(id);
    return out;
}

std::optional<std::vector<NodeId>> astarSearch(const SparseRoadmap &roadmap, NodeId start, NodeId goal,
                                               const EdgeDisableSet &disabled, std::vector<AStarExpansion> *trace)
{
    if (start >= roadmap.nodeCount() || goal >= roadmap.nodeCount())
        throw Error("A* endpoints are not roadmap nodes");
    constexpr double inf = std::numeric_limits<double>::infinity();
    const Config &goalConfig = roadmap.node(goal).config;
    const std::size_t n = roadmap.nodeCount();
    std::vector<double> g(n, inf);
    std::vector<NodeId> parent(n, std::numeric_limits<NodeId>::max());
    std::vector<bool> closed(n, false);

    // (f, g-tiebreak, id): deterministic ordering.
    using Entry = std::tuple<double, double, NodeId>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    g[start] = 0.0;
    open.push({distance(roadmap.node(start).config, goalConfig), 0.0, start});
    while (!open.empty())
    {
        const auto [f, gu, u] = open.top();
        open.pop();
        if (closed[u])
            continue;
        closed[u] = true;
        if (trace)
            trace->push_back({u, g[u], f - g[u]});
        if (u == goal)
        {
            std::vector<NodeId> path{goal};
            for (NodeId v = goal; v != start;)
            {
                v = parent[v];
                path.push_back(v);
            }
            std::reverse(path.begin(), path.end());
            return path;
        }
        for (const auto &adj : roadmap.adjacent(u))
        {
            if (closed[adj.neighbor] || disabled.contains(adj.edge))
                continue;
            const double candidate = g[u] + roadmap.edges()[adj.edge].weight;
            if (candidate < g[adj.neighbor])
            {
                g[adj.neighbor] = candidate;
                parent[adj.neighbor] = u;
                open.push({candidate + distance(roadmap.node(adj.neighbor).config, goalConfig), candidate,
                           adj.neighbor});
            }
        }
    }
    return std::nullopt;
}

double nodePathCost(const SparseRoadmap &roadmap, std::span<const NodeId> path)
{
    double cost = 0.0;
    for (std::size_t i = 1; i < path.size(); ++i)
        cost += distance(roadmap.node(path[i - 1]).config, roadmap.node(path[i]).config);
    return cost;
}

namespace
{
std::optional<EdgeId> edgeBetween(const SparseRoadmap &roadmap, NodeId a, NodeId b, const EdgeDisableSet &disabled)
{
    // Parallel edges cannot occur, but pick a live one if they ever do.
    for (const auto &adj : roadmap.adjacent(a))
        if (adj.neighbor == b && !disabled.contains(adj.edge))
            return adj.edge;
    return std::nullopt;
}
}  // namespace

std::optional<std::vector<NodeId>> lazySearch(const SparseRoadmap &roadmap, NodeId start, NodeId goal,
                                              EdgeValidityCache &validity, EdgeDisableSet &disabled,
                                              std::vector<CandidateNodePath> *candidates, const PlannerBudget *budget)
{
    while (true)
    {
        if (budget && budgetExhausted(*budget, 0, 0))
            return std::nullopt;
        auto path = astarSearch(roadmap, start, goal, disabled);
        if (!path)
            return std::nullopt;
        std::vector<EdgeId> invalid;
        for (std::size_t i = 1; i < path->size(); ++i)
        {
            const auto edge = edgeBetween(roadmap, (*path)[i - 1], (*path)[i], disabled);
            if (!validity.valid(*edge))
                invalid.push_back(*edge);
        }
        if (candidates)
            candidates->push_back({*path, invalid.size()});
        if (invalid.empty())
            return path;
        disabled.insert(invalid.begin(), invalid.end());
    }
}

std::vector<IndexRange> findInvalidRanges(const GeometricPath &path, const StateValidator &validator,
                                          double resolution)
{
    std::vector<IndexRange> out;
    if (path.empty())
        return out;
    if (!validator(path.front()) || !validator(path.back()))
        throw Error("path endpoints must be valid to locate repairable ranges");
    std::vector<std::size_t> anchors;
    for (std::size_t i = 0; i < path.size(); ++i)
        if (validator(path[i]))
            anchors.push_back(i);
    for (std::size_t k = 1; k < anchors.size(); ++k)
    {
        const std::size_t a = anchors[k - 1];
        const std::size_t b = anchors[k];
        if (b > a + 1 || !checkMotion(path[a], path[b], validator, resolution))
            out.push_back({a, b});
    }
    return out;
}

RepairOutcome repairPath(const GeometricPath &path, std::span<const IndexRange> invalid, const SpaceDefinition &space,
                         const StateValidator &validator, const PlannerBudget &budget, std::uint64_t seed,
                         double range)
{
    RepairOutcome out;
    if (invalid.empty())
    {
        out.path = path;
        return out;
    }
    std::vector<Config> spliced;
    std::size_t cursor = 0;
    for (std::size_t r = 0; r < invalid.size(); ++r)
    {
        const IndexRange &span = invalid[r];
        if (span.first >= span.last || span.last >= path.size() || span.first < cursor)
            throw Error("repair ranges must be ordered and inside the path");
        for (std::size_t i = cursor; i < span.first; ++i)
            spliced.push_back(path[i]);

        std::uint64_t checks = 0;
        RRTConnect planner(space, countingValidator(validator, checks), {range, seed + 7919 * (r + 1)});
        PlannerBudget sub = budget;
        if (sub.maxValidityChecks != 0)
            sub.maxValidityChecks = out.validityChecks >= sub.maxValidityChecks
                                        ? 1
                                        : sub.maxValidityChecks - out.validityChecks;
        const PlanOutcome piece = planner.solve(path[span.first], path[span.last], sub);
        out.validityChecks += checks;
        if (!piece.ok())
        {
            out.status = piece.status == PlanStatus::InvalidQuery ? PlanStatus::Timeout : piece.status;
            out.path = GeometricPath();
            return out;
        }
        // piece runs first..last inclusive; `last` is re-emitted by the next copy loop.
        for (std::size_t i = 0; i + 1 < piece.path.size(); ++i)
            spliced.push_back(piece.path[i]);
        cursor = span.last;
        ++out.segmentsRepaired;
    }
    for (std::size_t i = cursor; i < path.size(); ++i)
        spliced.push_back(path[i]);
    out.path = GeometricPath(std::move(spliced));
    return out;
}

namespace
{
GeometricPath assemble(const PlanningProblem &problem, const SparseRoadmap &roadmap, const std::vector<NodeId> &nodes)
{
    GeometricPath path;
    path.append(problem.start);
    for (NodeId id : nodes)
        path.append(roadmap.node(id).config);
    path.append(problem.goal);
    return path;
}

struct Candidate
{
    GeometricPath path;
    const CandidateNodePath *source;
};

// findInvalidRanges over start + nodes + goal, reusing what the lazy search already learned.
// Endpoint links passed connectEndpoints; roadmap edges are all in the cache; a waypoint is
// checked only when neither of its segments is known valid.
std::vector<IndexRange> cachedInvalidRanges(const SparseRoadmap &roadmap, const std::vector<NodeId> &nodes,
                                            EdgeValidityCache &validity, const StateValidator &validator)
{
    const EdgeDisableSet none;
    const std::size_t waypoints = nodes.size() + 2;
    // segmentOk[i]: waypoint i to i + 1.
    std::vector<bool> segmentOk(waypoints - 1, true);
    for (std::size_t i = 1; i < nodes.size(); ++i)
        segmentOk[i] = validity.valid(*edgeBetween(roadmap, nodes[i - 1], nodes[i], none));
    std::vector<std::size_t> anchors;
    for (std::size_t i = 0; i < waypoints; ++i)
    {
        const bool known = i == 0 || i + 1 == waypoints || segmentOk[i - 1] || segmentOk[i];
        if (known || validator(roadmap.node(nodes[i - 1]).config))
            anchors.push_back(i);
    }
    std::vector<IndexRange> out;
    for (std::size_t k = 1; k < anchors.size(); ++k)
        if (anchors[k] > anchors[k - 1] + 1 || !segmentOk[anchors[k - 1]])
            out.push_back({anchors[k - 1], anchors[k]});
    return out;
}
}  // namespace

RetrievalAttempt retrieve(const PlanningProblem &problem, const SparseRoadmap &roadmap, const Environment &env,
                          const RetrievalConfig &config, const PlannerBudget &budget)
{
    RetrievalAttempt attempt;
    if (roadmap.nodeCount() == 0 || problem.start == problem.goal)
        return attempt;
    if (roadmap.dimension() != env.space().dimension())
        throw Error("roadmap and environment dimensions differ");

    std::uint64_t checks = 0;
    const StateValidator validator = countingValidator(env.fullValidator(), checks);
    const double resolution = env.resolution();
    auto stopped = [&]() { return budgetExhausted(budget, 0, checks); };

    std::vector<NodeId> nearStart = connectEndpoints(problem.start, roadmap, validator, resolution);
    std::vector<NodeId> nearGoal = connectEndpoints(problem.goal, roadmap, validator, resolution);
    if (nearStart.size() > config.candidateCap)
        nearStart.resize(config.candidateCap);
    if (nearGoal.size() > config.candidateCap)
        nearGoal.resize(config.candidateCap);
    attempt.validityChecks = checks;
    if (nearStart.empty() || nearGoal.empty())
        return attempt;

    struct Pair
    {
        double cost;
        NodeId s;
        NodeId g;
    };
    std::vector<Pair> pairs;
    for (NodeId s : nearStart)
        for (NodeId g : nearGoal)
            pairs.push_back({distance(problem.start, roadmap.node(s).config) +
                                 distance(problem.goal, roadmap.node(g).config),
                             s, g});
    std::sort(pairs.begin(), pairs.end(), [](const Pair &a, const Pair &b) {
        return std::tie(a.cost, a.s, a.g) < std::tie(b.cost, b.s, b.g);
    });

    EdgeValidityCache validity(roadmap, validator, resolution);
    EdgeDisableSet disabled;
    std::vector<CandidateNodePath> candidates;
    Rng rng(config.seed);

    RetrievalResult result;
    for (const Pair &pair : pairs)
    {
        if (auto stop = stopped())
        {
            attempt.stoppedBy = stop;
            attempt.validityChecks = checks;
            return attempt;
        }
        if (!roadmap.sameComponent(pair.s, pair.g))
            continue;
        ++result.candidatePairsTried;
        auto nodes = lazySearch(roadmap, pair.s, pair.g, validity, disabled, &candidates, &budget);
        if (!nodes)
            continue;
        const GeometricPath raw = assemble(problem, roadmap, *nodes);
        result.path = smoothPath(raw, validator, resolution, config.smoothingRounds, rng, &budget);
        if (auto stop = stopped())
        {
            attempt.stoppedBy = stop;
            attempt.validityChecks = checks;
            return attempt;
        }
        result.provenance = Solver::RecallExact;
        result.disabledEdges = disabled.size();
        result.validityChecks = checks;
        attempt.result = std::move(result);
        attempt.validityChecks = checks;
        return attempt;
    }

    if (candidates.empty())
    {
        attempt.validityChecks = checks;
        return attempt;
    }
    // Fewest invalid edges first, then shortest.
    std::vector<Candidate> ranked;
    for (const auto &c : candidates)
        ranked.push_back({assemble(problem, roadmap, c.nodes), &c});
    const auto best = std::min_element(ranked.begin(), ranked.end(), [](const Candidate &a, const Candidate &b) {
        if (a.source->invalidEdges != b.source->invalidEdges)
            return a.source->invalidEdges < b.source->invalidEdges;
        return a.path.length() < b.path.length();
    });

    const auto ranges = cachedInvalidRanges(roadmap, best->source->nodes, validity, validator);
    PlannerBudget repairBudget = budget;
    if (repairBudget.maxValidityChecks != 0)
        repairBudget.maxValidityChecks =
            checks >= repairBudget.maxValidityChecks ? 1 : repairBudget.maxValidityChecks - checks;
    RepairOutcome repaired =
        repairPath(best->path, ranges, env.space(), env.fullValidator(), repairBudget, config.seed, config.rrtRange);
    checks += repaired.validityChecks;
    if (!repaired.ok())
    {
        if (repaired.status == PlanStatus::Canceled)
            attempt.stoppedBy = PlanStatus::Canceled;
        attempt.validityChecks = checks;
        return attempt;
    }
    result.path = smoothPath(repaired.path, validator, resolution, config.smoothingRounds, rng, &budget);
    if (auto stop = stopped())
    {
        attempt.stoppedBy = stop;
        attempt.validityChecks = checks;
        return attempt;
    }
    result.provenance = ranges.empty() ? Solver::RecallExact : Solver::RecallRepaired;
    result.repairSegments = repaired.segmentsRepaired;
    result.disabledEdges = disabled.size();
    result.validityChecks = checks;
    attempt.result = std::move(result);
    attempt.validityChecks = checks;
    return attempt;
}

}  // namespace thunder
