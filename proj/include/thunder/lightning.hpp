#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "thunder/environment.hpp"
#include "thunder/thunder.hpp"

namespace thunder
{

/// Dynamic time warping cost between two waypoint sequences, Euclidean ground distance.
double dtwDistance(const GeometricPath &a, const GeometricPath &b);

/// `count` waypoints evenly spaced by arc length, endpoints included.
GeometricPath resamplePath(const GeometricPath &path, std::size_t count);

/// Fraction of the path's discretized states that fail `validator`.
double pscore(const GeometricPath &path, const StateValidator &validator, double resolution);

/// Flat list of stored paths with an endpoint index. Grows monotonically.
class PathStore
{
public:
    static constexpr std::size_t kResampleCount = 32;

    explicit PathStore(std::size_t dimension, double dtwThreshold = 4.0);

    std::size_t dimension() const
    {
        return dimension_;
    }
    double dtwThreshold() const
    {
        return threshold_;
    }
    std::size_t size() const
    {
        return paths_.size();
    }
    const GeometricPath &path(std::size_t i) const
    {
        return paths_.at(i);
    }
    std::size_t totalWaypoints() const;

    /// Stores p unless some stored path lies within the DTW threshold (compared after
    /// resampling both to kResampleCount waypoints).
    bool maybeStore(const GeometricPath &p);
    /// Unconditional append, used by loading.
    void add(GeometricPath p);

    /// Indices of at most n paths ranked by d(start, front) + d(goal, back), ties by index.
    std::vector<std::size_t> retrieveTopN(const Config &start, const Config &goal, std::size_t n = 10) const;

    /// Size of the serialized form, without serializing.
    std::uint64_t serializedBytes() const;

private:
    std::size_t dimension_;
    double threshold_;
    std::vector<GeometricPath> paths_;
    std::vector<double> resampled_;  // kResampleCount x dimension per path
    std::vector<double> starts_;
    std::vector<double> goals_;
};

/// Store layout (little-endian): "LGHT", u32 version, u32 dimension, f64 threshold, u64 path
/// count, then per path u64 waypoint count and the waypoint coordinates as f64.
inline constexpr std::uint32_t kPathStoreFormatVersion = 1;

std::vector<std::uint8_t> serializePathStore(const PathStore &store);
PathStore deserializePathStore(std::span<const std::uint8_t> bytes,
                               std::optional<std::size_t> expectedDimension = std::nullopt);
std::uint64_t savePathStore(const PathStore &store, const std::string &path);
PathStore loadPathStore(const std::string &path, std::optional<std::size_t> expectedDimension = std::nullopt);

struct LightningConfig
{
    double dtwThreshold = 4.0;
    std::size_t candidatePaths = 10;
    double collisionResolution = 0.0;
    unsigned smoothingRounds = 100;
    std::uint64_t seed = 0;
    double rrtRange = 0.0;
    bool enableScratch = true;
    bool enableRecall = true;
    std::size_t scratchWorkers = 1;
    bool deterministic = false;
    double checksPerSecond = 1e6;

    void validate() const;
};

/// Recall side on its own: top-n candidates, lowest pscore, segment repair. The path comes back
/// unsmoothed; solve() smooths whichever side wins.
RaceEntry lightningRecall(const PlanningProblem &problem, const PathStore &store, const Environment &env,
                          const LightningConfig &config, const PlannerBudget &budget);

struct LightningStats
{
    std::size_t paths = 0;
    std::size_t waypoints = 0;
    std::size_t scratchSolves = 0;
    std::size_t recallExactSolves = 0;
    std::size_t recallRepairedSolves = 0;
    std::size_t failures = 0;
    std::size_t stored = 0;
    std::size_t rejected = 0;
};

/// Path-centric experience planner used as the comparison baseline.
class Lightning
{
public:
    Lightning(const Environment &reference, LightningConfig config = {});

    PlanResult solve(const PlanningProblem &problem, const Environment &env);

    /// Every successful result goes through maybeStore; the path is discretized first so
    /// the store holds the states the robot would execute.
    bool submitExperience(const PlanResult &result);

    LightningStats snapshotStats() const;
    std::shared_ptr<const PathStore> store() const;
    std::uint64_t saveStore(const std::string &path) const;
    void loadStore(const std::string &path);

private:
    LightningConfig config_;
    Environment reference_;
    mutable std::mutex mutex_;
    std::shared_ptr<PathStore> store_;
    LightningStats counters_;
};

}  // namespace thunder
