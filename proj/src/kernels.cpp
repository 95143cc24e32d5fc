#include "thunder/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <omp.h>

namespace thunder::kernels
{

namespace
{
double squaredDistance(const double *a, const double *b, std::size_t dim)
{
    double sum = 0.0;
    for (std::size_t k = 0; k < dim; ++k)
    {
        const double diff = a[k] - b[k];
        sum += diff * diff;
    }
    return sum;
}

bool neighborLess(const Neighbor &a, const Neighbor &b)
{
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
}

void checkQuery(PointSet points, std::span<const double> query)
{
    if (query.size() != points.dim)
        throw Error("query dimension does not match point set");
}
}  // namespace

std::vector<Neighbor> radiusScanSerial(PointSet points, std::span<const double> query, double radius)
{
    checkQuery(points, query);
    std::vector<Neighbor> out;
    const double r2 = radius * radius;
    const std::size_t n = points.size();
    for (std::size_t i = 0; i < n; ++i)
    {
        const double d2 = squaredDistance(points.flat.data() + i * points.dim, query.data(), points.dim);
        if (d2 <= r2)
        {
            const double d = std::sqrt(d2);
            if (d <= radius)
                out.push_back({i, d});
        }
    }
    std::sort(out.begin(), out.end(), neighborLess);
    return out;
}

std::vector<Neighbor> radiusScanParallel(PointSet points, std::span<const double> query, double radius)
{
    checkQuery(points, query);
    const double r2 = radius * radius;
    const auto n = static_cast<std::ptrdiff_t>(points.size());
    std::vector<std::vector<Neighbor>> perThread(static_cast<std::size_t>(omp_get_max_threads()));

#pragma omp parallel
    {
        auto &local = perThread[static_cast<std::size_t>(omp_get_thread_num())];
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < n; ++i)
        {
            const auto idx = static_cast<std::size_t>(i);
            const double d2 = squaredDistance(points.flat.data() + idx * points.dim, query.data(), points.dim);
            if (d2 <= r2)
            {
                const double d = std::sqrt(d2);
                if (d <= radius)
                    local.push_back({idx, d});
            }
        }
    }

    std::vector<Neighbor> out;
    for (auto &local : perThread)
        out.insert(out.end(), local.begin(), local.end());
    std::sort(out.begin(), out.end(), neighborLess);
    return out;
}

std::vector<Neighbor> radiusScan(PointSet points, std::span<const double> query, double radius)
{
    if (points.size() < kParallelThreshold)
        return radiusScanSerial(points, query, radius);
    return radiusScanParallel(points, query, radius);
}

double dtw(PointSet a, PointSet b)
{
    if (a.dim != b.dim)
        throw Error("DTW inputs differ in dimension");
    const std::size_t n = a.size();
    const std::size_t m = b.size();
    if (n == 0 || m == 0)
        throw Error("DTW needs non-empty sequences");
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> prev(m + 1, inf);
    std::vector<double> cur(m + 1, inf);
    prev[0] = 0.0;
    for (std::size_t i = 1; i <= n; ++i)
    {
        cur[0] = inf;
        const double *ai = a.flat.data() + (i - 1) * a.dim;
        for (std::size_t j = 1; j <= m; ++j)
        {
            const double cost = std::sqrt(squaredDistance(ai, b.flat.data() + (j - 1) * b.dim, a.dim));
            cur[j] = cost + std::min({prev[j], cur[j - 1], prev[j - 1]});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

DtwMatch minDtwSerial(std::span<const PointSet> candidates, PointSet query)
{
    DtwMatch best{candidates.size(), std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < candidates.size(); ++i)
    {
        const double c = dtw(candidates[i], query);
        if (c < best.cost)
            best = {i, c};
    }
    return best;
}

DtwMatch minDtwParallel(std::span<const PointSet> candidates, PointSet query)
{
    const auto n = static_cast<std::ptrdiff_t>(candidates.size());
    std::vector<double> costs(candidates.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        costs[static_cast<std::size_t>(i)] = dtw(candidates[static_cast<std::size_t>(i)], query);

    DtwMatch best{candidates.size(), std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < costs.size(); ++i)
        if (costs[i] < best.cost)
            best = {i, costs[i]};
    return best;
}

DtwMatch minDtw(std::span<const PointSet> candidates, PointSet query)
{
    // A single DTW over resampled paths is ~1k distance evaluations.
    if (candidates.size() * query.size() * query.size() < kParallelThreshold * 64)
        return minDtwSerial(candidates, query);
    return minDtwParallel(candidates, query);
}

namespace
{
std::vector<Neighbor> topN(std::vector<Neighbor> scored, std::size_t n)
{
    n = std::min(n, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), neighborLess);
    scored.resize(n);
    return scored;
}

void checkEndpoints(PointSet starts, PointSet goals, std::span<const double> start, std::span<const double> goal)
{
    if (starts.size() != goals.size() || starts.dim != goals.dim)
        throw Error("endpoint sets differ in shape");
    checkQuery(starts, start);
    checkQuery(goals, goal);
}
}  // namespace

std::vector<Neighbor> rankByEndpointsSerial(PointSet starts, PointSet goals, std::span<const double> start,
                                            std::span<const double> goal, std::size_t n)
{
    checkEndpoints(starts, goals, start, goal);
    std::vector<Neighbor> scored(starts.size());
    for (std::size_t i = 0; i < scored.size(); ++i)
        scored[i] = {i, std::sqrt(squaredDistance(starts.flat.data() + i * starts.dim, start.data(), starts.dim)) +
                            std::sqrt(squaredDistance(goals.flat.data() + i * goals.dim, goal.data(), goals.dim))};
    return topN(std::move(scored), n);
}

std::vector<Neighbor> rankByEndpointsParallel(PointSet starts, PointSet goals, std::span<const double> start,
                                              std::span<const double> goal, std::size_t n)
{
    checkEndpoints(starts, goals, start, goal);
    std::vector<Neighbor> scored(starts.size());
    const auto count = static_cast<std::ptrdiff_t>(scored.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t s = 0; s < count; ++s)
    {
        const auto i = static_cast<std::size_t>(s);
        scored[i] = {i, std::sqrt(squaredDistance(starts.flat.data() + i * starts.dim, start.data(), starts.dim)) +
                            std::sqrt(squaredDistance(goals.flat.data() + i * goals.dim, goal.data(), goals.dim))};
    }
    return topN(std::move(scored), n);
}

std::vector<Neighbor> rankByEndpoints(PointSet starts, PointSet goals, std::span<const double> start,
                                      std::span<const double> goal, std::size_t n)
{
    if (starts.size() < kParallelThreshold)
        return rankByEndpointsSerial(starts, goals, start, goal, n);
    return rankByEndpointsParallel(starts, goals, start, goal, n);
}

std::size_t countInvalidSerial(std::span<const Config> states, const StateValidator &validator)
{
    std::size_t invalid = 0;
    for (const auto &q : states)
        if (!validator(q))
            ++invalid;
    return invalid;
}

std::size_t countInvalidParallel(std::span<const Config> states, const StateValidator &validator)
{
    std::size_t invalid = 0;
    const auto n = static_cast<std::ptrdiff_t>(states.size());
#pragma omp parallel for reduction(+ : invalid) schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        if (!validator(states[static_cast<std::size_t>(i)]))
            ++invalid;
    return invalid;
}

std::size_t countInvalid(std::span<const Config> states, const StateValidator &validator)
{
    if (states.size() < kParallelThreshold)
        return countInvalidSerial(states, validator);
    return countInvalidParallel(states, validator);
}

}  // namespace thunder::kernels
