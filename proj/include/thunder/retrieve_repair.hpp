#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "thunder/cspace.hpp"
#include "thunder/environment.hpp"
#include "thunder/scratch_planner.hpp"
#include "thunder/sparse_roadmap.hpp"

namespace thunder
{

/// Which side of a race produced a path.
enum class Solver
{
    Scratch,
    RecallExact,
    RecallRepaired
};

const char *toString(Solver solver);
inline bool isRecall(Solver s)
{
    return s != Solver::Scratch;
}

/// Edges found invalid in the current environment. Lives for one query only.
using EdgeDisableSet = std::unordered_set<EdgeId>;

/// Per-query memo of edge validity against the current environment.
class EdgeValidityCache
{
public:
    EdgeValidityCache(const SparseRoadmap &roadmap, StateValidator validator, double resolution);

    bool valid(EdgeId edge);
    std::size_t checkedEdges() const
    {
        return cache_.size();
    }

private:
    const SparseRoadmap &roadmap_;
    StateValidator validator_;
    double resolution_;
    std::unordered_map<EdgeId, bool> cache_;
};

/// Roadmap nodes within delta of q whose straight motion from q passes the full predicate,
/// ascending by distance.
std::vector<NodeId> connectEndpoints(const Config &q, const SparseRoadmap &roadmap, const StateValidator &validator,
                                     double resolution);

struct AStarExpansion
{
    NodeId node;
    double costToCome;
    double heuristic;
};

/// A* over edges not in `disabled`, weights = distance, heuristic = straight-line distance
/// to the goal node. Returns the node sequence, or nothing when the goal is unreachable.
std::optional<std::vector<NodeId>> astarSearch(const SparseRoadmap &roadmap, NodeId start, NodeId goal,
                                               const EdgeDisableSet &disabled,
                                               std::vector<AStarExpansion> *trace = nullptr);

/// Sum of edge weights along a node path.
double nodePathCost(const SparseRoadmap &roadmap, std::span<const NodeId> path);

struct CandidateNodePath
{
    std::vector<NodeId> nodes;
    std::size_t invalidEdges;
};

/// Repeats A*, validating every edge of each candidate and disabling the invalid ones,
/// until a fully valid path is found or none remains. Each candidate is appended to
/// `candidates` when given.
std::optional<std::vector<NodeId>> lazySearch(const SparseRoadmap &roadmap, NodeId start, NodeId goal,
                                              EdgeValidityCache &validity, EdgeDisableSet &disabled,
                                              std::vector<CandidateNodePath> *candidates = nullptr,
                                              const PlannerBudget *budget = nullptr);

/// Waypoint indices of the valid states flanking a stretch that fails validation.
struct IndexRange
{
    std::size_t first;
    std::size_t last;

    friend bool operator==(const IndexRange &, const IndexRange &) = default;
};

/// Stretches of `path` between consecutive valid waypoints that contain an invalid
/// waypoint or segment. The path's endpoints must be valid.
std::vector<IndexRange> findInvalidRanges(const GeometricPath &path, const StateValidator &validator,
                                          double resolution);

struct RepairOutcome
{
    PlanStatus status = PlanStatus::Success;
    GeometricPath path;
    std::size_t segmentsRepaired = 0;
    std::uint64_t validityChecks = 0;

    bool ok() const
    {
        return status == PlanStatus::Success;
    }
};

/// Reconnects each invalid range with RRT-Connect and splices the pieces. Any sub-plan that
/// fails makes the whole repair fail.
RepairOutcome repairPath(const GeometricPath &path, std::span<const IndexRange> invalid, const SpaceDefinition &space,
                         const StateValidator &validator, const PlannerBudget &budget, std::uint64_t seed,
                         double range = 0.0);

struct RetrievalConfig
{
    std::size_t candidateCap = 10;  // per endpoint; pairs are capped at cap x cap
    unsigned smoothingRounds = 100;
    double rrtRange = 0.0;
    std::uint64_t seed = 0;
};

struct RetrievalResult
{
    GeometricPath path;
    Solver provenance = Solver::RecallExact;
    std::size_t disabledEdges = 0;
    std::size_t repairSegments = 0;
    std::size_t candidatePairsTried = 0;
    std::uint64_t validityChecks = 0;
};

struct RetrievalAttempt
{
    std::optional<RetrievalResult> result;
    /// Set when the attempt stopped on the budget rather than running out of options.
    std::optional<PlanStatus> stoppedBy;
    std::uint64_t validityChecks = 0;
};

/// Connects both endpoints, lazily searches candidate start/goal node pairs in ascending
/// combined connection distance, and falls back to repairing the candidate with the fewest
/// invalid segments. Returned paths are smoothed and re-validated.
RetrievalAttempt retrieve(const PlanningProblem &problem, const SparseRoadmap &roadmap, const Environment &env,
                          const RetrievalConfig &config, const PlannerBudget &budget);

}  // namespace thunder
