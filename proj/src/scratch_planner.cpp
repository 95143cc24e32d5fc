#include "thunder/scratch_planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace thunder
{

PlannerBudget PlannerBudget::forSeconds(double seconds, std::stop_token cancel)
{
    PlannerBudget budget;
    budget.deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(seconds));
    budget.cancel = std::move(cancel);
    return budget;
}

const char *toString(PlanStatus status)
{
    switch (status)
    {
        case PlanStatus::Success:
            return "success";
        case PlanStatus::Timeout:
            return "timeout";
        case PlanStatus::Canceled:
            return "canceled";
        case PlanStatus::InvalidQuery:
            return "invalid-query";
    }
    return "unknown";
}

StateValidator countingValidator(StateValidator inner, std::uint64_t &counter)
{
    return [inner = std::move(inner), &counter](const Config &q) {
        ++counter;
        return inner(q);
    };
}

std::optional<PlanStatus> budgetExhausted(const PlannerBudget &budget, std::uint64_t iterations,
                                          std::uint64_t validityChecks)
{
    if (budget.cancel.stop_requested())
        return PlanStatus::Canceled;
    if (budget.maxIterations != 0 && iterations >= budget.maxIterations)
        return PlanStatus::Timeout;
    if (budget.maxValidityChecks != 0 && validityChecks >= budget.maxValidityChecks)
        return PlanStatus::Timeout;
    if (budget.deadline != Clock::time_point::max() && Clock::now() >= budget.deadline)
        return PlanStatus::Timeout;
    return std::nullopt;
}

struct RRTConnect::Tree
{
    std::size_t dim;
    std::vector<double> flat;  // coordinates of every node, contiguous
    std::vector<Config> configs;
    std::vector<std::int64_t> parents;

    explicit Tree(std::size_t d) : dim(d)
    {
    }

    void add(const Config &q, std::int64_t parent)
    {
        flat.insert(flat.end(), q.coords().begin(), q.coords().end());
        configs.push_back(q);
        parents.push_back(parent);
    }

    std::size_t nearest(const Config &q) const
    {
        std::size_t best = 0;
        double bestD = std::numeric_limits<double>::infinity();
        const std::size_t n = configs.size();
        for (std::size_t i = 0; i < n; ++i)
        {
            const double *p = flat.data() + i * dim;
            double sum = 0.0;
            for (std::size_t k = 0; k < dim; ++k)
            {
                const double diff = p[k] - q[k];
                sum += diff * diff;
            }
            if (sum < bestD)
            {
                bestD = sum;
                best = i;
            }
        }
        return best;
    }

    std::vector<Config> branchToRoot(std::size_t node) const
    {
        std::vector<Config> out;
        for (auto i = static_cast<std::int64_t>(node); i >= 0; i = parents[static_cast<std::size_t>(i)])
            out.push_back(configs[static_cast<std::size_t>(i)]);
        return out;
    }
};

RRTConnect::RRTConnect(const SpaceDefinition &space, StateValidator validator, Options options)
  : space_(space)
  , validator_(std::move(validator))
  , counted_([this](const Config &q) {
      ++checks_;
      return validator_(q);
  })
  , range_(options.range > 0.0 ? options.range : 5.0 * space.collisionResolution())
  , rng_(options.seed)
{
}

RRTConnect::Extend RRTConnect::extend(Tree &tree, const Config &target)
{
    const std::size_t nearIdx = tree.nearest(target);
    const Config &near = tree.configs[nearIdx];
    const double d = distance(near, target);
    Extend result = Extend::Reached;
    Config next = target;
    if (d > range_)
    {
        next = interpolate(near, target, range_ / d);
        result = Extend::Advanced;
    }
    if (!checkMotion(near, next, counted_, space_.collisionResolution()))
        return Extend::Trapped;
    tree.add(next, static_cast<std::int64_t>(nearIdx));
    return result;
}

PlanOutcome RRTConnect::solve(const Config &start, const Config &goal, const PlannerBudget &budget)
{
    PlanOutcome out;
    if (start.dimension() != space_.dimension() || goal.dimension() != space_.dimension() ||
        !space_.satisfiesBounds(start) || !space_.satisfiesBounds(goal))
    {
        out.status = PlanStatus::InvalidQuery;
        return out;
    }
    checks_ = 0;
    if (!counted_(start) || !counted_(goal))
    {
        out.status = PlanStatus::InvalidQuery;
        out.validityChecks = checks_;
        return out;
    }
    out.validityChecks = checks_;
    if (start == goal)
    {
        out.status = PlanStatus::Success;
        out.path = GeometricPath({start});
        return out;
    }

    Tree startTree(space_.dimension());
    Tree goalTree(space_.dimension());
    startTree.add(start, -1);
    goalTree.add(goal, -1);
    Tree *a = &startTree;
    Tree *b = &goalTree;

    while (true)
    {
        out.validityChecks = checks_;
        if (auto stop = budgetExhausted(budget, out.iterations, checks_))
        {
            out.status = *stop;
            return out;
        }
        ++out.iterations;

        const Config sample = space_.sampleUniform(rng_);
        if (extend(*a, sample) != Extend::Trapped)
        {
            const Config target = a->configs.back();
            Extend status = Extend::Advanced;
            while (status == Extend::Advanced)
            {
                status = extend(*b, target);
                if (budget.cancel.stop_requested())
                    break;
            }
            if (status == Extend::Reached)
            {
                std::vector<Config> fromA = a->branchToRoot(a->configs.size() - 1);
                std::vector<Config> fromB = b->branchToRoot(b->configs.size() - 1);
                // fromA runs connection->rootA, fromB runs connection->rootB; both start at `target`.
                std::reverse(fromA.begin(), fromA.end());
                fromA.insert(fromA.end(), fromB.begin() + 1, fromB.end());
                GeometricPath path(std::move(fromA));
                if (a != &startTree)
                    path = path.reversed();
                out.status = PlanStatus::Success;
                out.path = std::move(path);
                out.validityChecks = checks_;
                return out;
            }
        }
        std::swap(a, b);
    }
}

namespace
{
// Index of the segment (waypoints i, i+1) that contains arc length s, together with the
// arc length at which that segment starts.
std::pair<std::size_t, double> locateSegment(const std::vector<double> &cumulative, double s)
{
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), s);
    std::size_t i = it == cumulative.begin() ? 0 : static_cast<std::size_t>(it - cumulative.begin()) - 1;
    i = std::min(i, cumulative.size() - 2);
    return {i, cumulative[i]};
}
}  // namespace

GeometricPath smoothPath(const GeometricPath &path, const StateValidator &validator, double resolution,
                         unsigned rounds, Rng &rng, const PlannerBudget *budget)
{
    if (path.size() < 3)
        return path;
    std::vector<Config> pts = path.waypoints();
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (unsigned round = 0; round < rounds && pts.size() > 2; ++round)
    {
        if (budget && budgetExhausted(*budget, 0, 0))
            break;
        std::vector<double> cumulative(pts.size(), 0.0);
        for (std::size_t i = 1; i < pts.size(); ++i)
            cumulative[i] = cumulative[i - 1] + distance(pts[i - 1], pts[i]);
        const double total = cumulative.back();
        if (total <= 0.0)
            break;

        double s1 = unit(rng) * total;
        double s2 = unit(rng) * total;
        if (s1 > s2)
            std::swap(s1, s2);
        const auto [i, base1] = locateSegment(cumulative, s1);
        const auto [j, base2] = locateSegment(cumulative, s2);
        if (i == j)
            continue;

        auto pointOn = [&](std::size_t seg, double base, double s) {
            const double len = cumulative[seg + 1] - cumulative[seg];
            if (len <= 0.0)
                return pts[seg];
            return interpolate(pts[seg], pts[seg + 1], std::clamp((s - base) / len, 0.0, 1.0));
        };
        const Config p1 = pointOn(i, base1, s1);
        const Config p2 = pointOn(j, base2, s2);
        const double old = s2 - s1;
        const double shortcut = distance(p1, p2);
        if (shortcut >= old - 1e-12 * std::max(1.0, total))
            continue;
        if (!checkMotion(p1, p2, validator, resolution))
            continue;
        // The trimmed pieces of the original segments are re-sampled differently, so they
        // must pass on their own for the result to re-validate.
        if (!(p1 == pts[i]) && !checkMotion(pts[i], p1, validator, resolution))
            continue;
        if (!(p2 == pts[j + 1]) && !checkMotion(p2, pts[j + 1], validator, resolution))
            continue;

        std::vector<Config> next(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(i) + 1);
        if (!(p1 == next.back()))
            next.push_back(p1);
        if (!(p2 == pts[j + 1]))
            next.push_back(p2);
        next.insert(next.end(), pts.begin() + static_cast<std::ptrdiff_t>(j) + 1, pts.end());
        pts = std::move(next);
    }
    return GeometricPath(std::move(pts));
}

}  // namespace thunder
