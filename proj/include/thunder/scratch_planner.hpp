#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <stop_token>

#include "thunder/cspace.hpp"

namespace thunder
{

using Clock = std::chrono::steady_clock;

/// Limits shared by every planner. A zero limit means "unbounded".
struct PlannerBudget
{
    Clock::time_point deadline = Clock::time_point::max();
    std::uint64_t maxIterations = 0;
    /// Logical clock used by deterministic races: total state-validity evaluations.
    std::uint64_t maxValidityChecks = 0;
    std::stop_token cancel;

    static PlannerBudget forSeconds(double seconds, std::stop_token cancel = {});
};

enum class PlanStatus
{
    Success,
    Timeout,
    Canceled,
    InvalidQuery
};

const char *toString(PlanStatus status);

/// Validator wrapper that counts evaluations into a worker-local counter.
StateValidator countingValidator(StateValidator inner, std::uint64_t &counter);

/// Canceled or Timeout when the budget is exhausted, otherwise nothing.
std::optional<PlanStatus> budgetExhausted(const PlannerBudget &budget, std::uint64_t iterations,
                                          std::uint64_t validityChecks);

struct PlanOutcome
{
    PlanStatus status = PlanStatus::Timeout;
    GeometricPath path;
    std::uint64_t iterations = 0;
    std::uint64_t validityChecks = 0;

    bool ok() const
    {
        return status == PlanStatus::Success;
    }
};

/// Bi-directional RRT-Connect. Each instance is single-threaded; instances may run
/// concurrently against the same validator.
class RRTConnect
{
public:
    struct Options
    {
        /// Maximum extension per step; 0 selects 5x the collision resolution.
        double range = 0.0;
        std::uint64_t seed = 0;
    };

    RRTConnect(const SpaceDefinition &space, StateValidator validator, Options options);
    RRTConnect(const RRTConnect &) = delete;
    RRTConnect &operator=(const RRTConnect &) = delete;

    PlanOutcome solve(const Config &start, const Config &goal, const PlannerBudget &budget);

    double range() const
    {
        return range_;
    }

private:
    struct Tree;
    enum class Extend
    {
        Trapped,
        Advanced,
        Reached
    };

    Extend extend(Tree &tree, const Config &target);

    const SpaceDefinition &space_;
    StateValidator validator_;
    std::uint64_t checks_ = 0;
    StateValidator counted_;
    double range_;
    Rng rng_;
};

/// Randomized shortcutting: pick two arc-length positions, splice in the straight segment
/// between them when it is valid and shorter. Endpoints are preserved and the length never
/// increases. Stops early when `budget` is exhausted.
GeometricPath smoothPath(const GeometricPath &path, const StateValidator &validator, double resolution,
                         unsigned rounds, Rng &rng, const PlannerBudget *budget = nullptr);

}  // namespace thunder
