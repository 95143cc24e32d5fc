#pragma once

// Data-parallel inner loops. Every kernel has a serial reference used by the tests as the
// ground truth and an OpenMP variant; the unsuffixed entry point picks one by problem size.

#include <cstddef>
#include <span>
#include <vector>

#include "thunder/cspace.hpp"

namespace thunder::kernels
{

/// Problem size below which the dispatchers stay serial.
inline constexpr std::size_t kParallelThreshold = 4096;

struct Neighbor
{
    std::size_t index;
    double distance;

    friend bool operator==(const Neighbor &, const Neighbor &) = default;
};

/// Row-major point set: point i occupies flat[i*dim, (i+1)*dim).
struct PointSet
{
    std::span<const double> flat;
    std::size_t dim;

    std::size_t size() const
    {
        return dim == 0 ? 0 : flat.size() / dim;
    }
};

/// All points with distance <= radius, ascending by distance, ties by index.
std::vector<Neighbor> radiusScanSerial(PointSet points, std::span<const double> query, double radius);
std::vector<Neighbor> radiusScanParallel(PointSet points, std::span<const double> query, double radius);
std::vector<Neighbor> radiusScan(PointSet points, std::span<const double> query, double radius);

/// Classic dynamic-time-warping cost with Euclidean ground distance.
double dtw(PointSet a, PointSet b);

struct DtwMatch
{
    std::size_t index;  // position in the candidate list; equals candidates.size() when empty
    double cost;
};

/// Minimum DTW cost from `query` to any candidate; ties go to the lowest index.
DtwMatch minDtwSerial(std::span<const PointSet> candidates, PointSet query);
DtwMatch minDtwParallel(std::span<const PointSet> candidates, PointSet query);
DtwMatch minDtw(std::span<const PointSet> candidates, PointSet query);

/// Indices of the `n` entries with the smallest |start - s_i| + |goal - g_i|, ascending,
/// ties by index.
std::vector<Neighbor> rankByEndpointsSerial(PointSet starts, PointSet goals, std::span<const double> start,
                                            std::span<const double> goal, std::size_t n);
std::vector<Neighbor> rankByEndpointsParallel(PointSet starts, PointSet goals, std::span<const double> start,
                                              std::span<const double> goal, std::size_t n);
std::vector<Neighbor> rankByEndpoints(PointSet starts, PointSet goals, std::span<const double> start,
                                      std::span<const double> goal, std::size_t n);

/// Number of states rejected by `validator`. The validator must be safe to call concurrently.
std::size_t countInvalidSerial(std::span<const Config> states, const StateValidator &validator);
std::size_t countInvalidParallel(std::span<const Config> states, const StateValidator &validator);
std::size_t countInvalid(std::span<const Config> states, const StateValidator &validator);

}  // namespace thunder::kernels
