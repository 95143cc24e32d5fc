#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "thunder/environment.hpp"
#include "thunder/race.hpp"
#include "thunder/retrieve_repair.hpp"
#include "thunder/sparse_roadmap.hpp"

namespace thunder
{

struct ThunderConfig
{
    double deltaFraction = 0.1;
    double stretch = 1.2;
    /// 0 keeps each environment's own resolution.
    double collisionResolution = 0.0;
    unsigned smoothingRounds = 100;
    std::size_t candidatePairCap = 10;
    std::size_t insertionQueueCapacity = 64;
    std::uint64_t seed = 0;
    /// RRT-Connect step; 0 selects 5x the collision resolution.
    double rrtRange = 0.0;
    bool enableScratch = true;
    bool enableRecall = true;
    /// Independent RRT-Connect workers on the scratch side.
    std::size_t scratchWorkers = 1;
    bool deterministic = false;
    double checksPerSecond = 1e6;

    /// Throws Error when a field is out of range.
    void validate() const;
};

struct PlanResult
{
    PlanStatus status = PlanStatus::Timeout;
    GeometricPath path;
    Solver solver = Solver::Scratch;
    double wallTime = 0.0;
    PlanningProblem problem;

    std::uint64_t scratchChecks = 0;
    std::uint64_t recallChecks = 0;
    std::uint64_t scratchIterations = 0;
    std::uint64_t smoothingChecks = 0;
    /// Post-race shortcutting, on the same clock as wallTime but not included in it.
    double smoothingSeconds = 0.0;
    std::size_t disabledEdges = 0;
    std::size_t repairSegments = 0;
    std::size_t candidatePairsTried = 0;
    double loserStopSeconds = 0.0;

    bool ok() const
    {
        return status == PlanStatus::Success;
    }
};

/// The environment a query is checked against, honoring a resolution override.
Environment effectiveEnvironment(const Environment &env, double collisionResolution);

/// Scratch-side race worker: plain RRT-Connect. The winner is smoothed after the race.
RaceWorker scratchWorker(const Environment &env, const PlanningProblem &problem, double range, std::uint64_t seed);

/// Folds a race into a PlanResult.
PlanResult collectRace(RaceOutcome race, const PlanningProblem &problem);

/// Shortcuts the winning path with whatever budget the race left over. wallTime stays the
/// time to first solution; the smoothing cost goes to smoothingSeconds. No-op for failed results.
void smoothWinner(PlanResult &result, const Environment &env, unsigned rounds, std::uint64_t seed,
                  const RaceConfig &race);

struct ThunderStats
{
    std::size_t nodes = 0;
    std::size_t edges = 0;
    std::size_t components = 0;
    std::size_t queueDepth = 0;
    std::size_t scratchSolves = 0;
    std::size_t recallExactSolves = 0;
    std::size_t recallRepairedSolves = 0;
    std::size_t failures = 0;
    std::size_t insertions = 0;
    double insertionSeconds = 0.0;
    std::size_t dropped = 0;
    std::size_t guardsAdded = 0;
};

struct InsertionRecord
{
    std::uint64_t experience;
    InsertionReport report;
    double seconds;
};

/// Races plan-from-scratch against retrieve-and-repair over a sparse experience roadmap.
/// solve() is meant to be called from one thread at a time; a background thread owns all
/// database writes.
class Thunder
{
public:
    /// `reference` fixes the space and the invariant constraints shared by every environment
    /// later passed to solve().
    Thunder(const Environment &reference, ThunderConfig config = {});
    ~Thunder();
    Thunder(const Thunder &) = delete;
    Thunder &operator=(const Thunder &) = delete;

    PlanResult solve(const PlanningProblem &problem, const Environment &env);

    /// Queues a scratch result for insertion. Recall results are refused.
    bool submitExperience(const PlanResult &result);

    /// Blocks until the insertion queue is empty and idle.
    void drain();

    ThunderStats snapshotStats() const;
    std::vector<InsertionRecord> insertionHistory() const;
    /// Experience id -> solver that produced the inserted path.
    std::map<std::uint64_t, Solver> provenance() const;

    std::shared_ptr<const SparseRoadmap> database() const
    {
        return db_.snapshot();
    }
    std::uint64_t saveDatabase(const std::string &path) const;
    /// Replaces the database; call only while the queue is drained.
    void loadDatabase(const std::string &path);

    const ThunderConfig &config() const
    {
        return config_;
    }
    double delta() const
    {
        return delta_;
    }

private:
    struct Pending
    {
        std::uint64_t id;
        GeometricPath path;
    };

    void inserterLoop(std::stop_token stop);

    ThunderConfig config_;
    Environment reference_;
    double delta_;
    ExperienceDatabase db_;

    mutable std::mutex mutex_;
    std::condition_variable_any wake_;
    std::condition_variable_any idle_;
    std::deque<Pending> queue_;
    bool busy_ = false;
    std::uint64_t nextExperience_ = 1;
    ThunderStats counters_;
    std::vector<InsertionRecord> history_;
    std::map<std::uint64_t, Solver> provenance_;

    std::jthread inserter_;  // last: starts after everything above is constructed
};

}  // namespace thunder
