#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "thunder/retrieve_repair.hpp"
#include "thunder/scratch_planner.hpp"

namespace thunder
{

/// What one racing worker reports back.
struct RaceEntry
{
    PlanStatus status = PlanStatus::Timeout;
    GeometricPath path;
    Solver solver = Solver::Scratch;
    std::uint64_t validityChecks = 0;
    std::uint64_t iterations = 0;
    std::size_t disabledEdges = 0;
    std::size_t repairSegments = 0;
    std::size_t candidatePairsTried = 0;

    bool ok() const
    {
        return status == PlanStatus::Success;
    }
};

using RaceWorker = std::function<RaceEntry(const PlannerBudget &)>;

struct RaceConfig
{
    double budgetSeconds = 10.0;
    /// Replace the wall clock by a validity-check count so results are reproducible.
    bool deterministic = false;
    double checksPerSecond = 1e6;
};

struct RaceOutcome
{
    std::optional<std::size_t> winner;
    std::vector<RaceEntry> entries;
    double wallSeconds = 0.0;
    /// Time from the winner's claim until every loser had returned.
    double loserStopSeconds = 0.0;
};

/// Runs the workers concurrently; the first success wins and every other worker is asked
/// to stop. In deterministic mode the workers run one after another and each later worker
/// only gets the check budget the current leader used, which yields the same winner a
/// race measured in validity checks would.
RaceOutcome runRace(const std::vector<RaceWorker> &workers, const RaceConfig &config);

/// splitmix64 finalizer, used to derive independent seeds.
std::uint64_t mixSeed(std::uint64_t a, std::uint64_t b);

}  // namespace thunder
