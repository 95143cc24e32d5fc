#include "thunder/cspace.hpp"

#include <algorithm>
#include <cmath>

namespace thunder
{

namespace
{
void requireSameDimension(const Config &a, const Config &b)
{
    if (a.dimension() != b.dimension())
        throw Error("config dimension mismatch: " + std::to_string(a.dimension()) + " vs " +
                    std::to_string(b.dimension()));
}

// Interior state i of n along a->b, computed from the nearer endpoint so that the
// sequence for b->a is the exact mirror image.
void symmetricInterior(const Config &a, const Config &b, std::size_t i, std::size_t n, Config &out)
{
    const std::size_t d = a.dimension();
    if (2 * i == n)
    {
        for (std::size_t k = 0; k < d; ++k)
            out[k] = 0.5 * (a[k] + b[k]);
    }
    else if (2 * i < n)
    {
        const double s = static_cast<double>(i) / static_cast<double>(n);
        for (std::size_t k = 0; k < d; ++k)
            out[k] = a[k] + s * (b[k] - a[k]);
    }
    else
    {
        const double s = static_cast<double>(n - i) / static_cast<double>(n);
        for (std::size_t k = 0; k < d; ++k)
            out[k] = b[k] + s * (a[k] - b[k]);
    }
}
}  // namespace

SpaceDefinition::SpaceDefinition(std::vector<AxisBounds> bounds, double collisionResolution)
  : bounds_(std::move(bounds)), resolution_(collisionResolution)
{
    if (bounds_.empty())
        throw Error("space must have at least one axis");
    double shortest = bounds_.front().high - bounds_.front().low;
    for (const auto &b : bounds_)
    {
        if (!(b.low < b.high))
            throw Error("axis bounds require low < high");
        shortest = std::min(shortest, b.high - b.low);
    }
    if (!(resolution_ > 0.0) || !(resolution_ < shortest))
        throw Error("collision resolution must be positive and below the shortest axis extent");
}

double SpaceDefinition::maximumExtent() const
{
    double sum = 0.0;
    for (const auto &b : bounds_)
        sum += (b.high - b.low) * (b.high - b.low);
    return std::sqrt(sum);
}

Config SpaceDefinition::makeConfig(std::vector<double> coords) const
{
    if (coords.size() != bounds_.size())
        throw Error("config has " + std::to_string(coords.size()) + " coordinates, space has " +
                    std::to_string(bounds_.size()));
    for (std::size_t i = 0; i < coords.size(); ++i)
        coords[i] = std::clamp(coords[i], bounds_[i].low, bounds_[i].high);
    return Config(std::move(coords));
}

bool SpaceDefinition::satisfiesBounds(const Config &q) const
{
    if (q.dimension() != bounds_.size())
        return false;
    for (std::size_t i = 0; i < bounds_.size(); ++i)
        if (q[i] < bounds_[i].low || q[i] > bounds_[i].high)
            return false;
    return true;
}

Config SpaceDefinition::sampleUniform(Rng &rng) const
{
    Config q(bounds_.size());
    for (std::size_t i = 0; i < bounds_.size(); ++i)
    {
        std::uniform_real_distribution<double> axis(bounds_[i].low, bounds_[i].high);
        q[i] = axis(rng);
    }
    return q;
}

double distance(const Config &a, const Config &b)
{
    requireSameDimension(a, b);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.dimension(); ++i)
    {
        const double diff = a[i] - b[i];
        sum += diff * diff;
    }
    return std::sqrt(sum);
}

Config interpolate(const Config &a, const Config &b, double s)
{
    requireSameDimension(a, b);
    if (!(s >= 0.0 && s <= 1.0))
        throw Error("interpolation parameter outside [0, 1]");
    if (s == 0.0)
        return a;
    if (s == 1.0)
        return b;
    Config out(a.dimension());
    for (std::size_t i = 0; i < a.dimension(); ++i)
        out[i] = a[i] + s * (b[i] - a[i]);
    return out;
}

GeometricPath::GeometricPath(std::vector<Config> waypoints) : waypoints_(std::move(waypoints))
{
    for (std::size_t i = 1; i < waypoints_.size(); ++i)
        length_ += distance(waypoints_[i - 1], waypoints_[i]);
}

void GeometricPath::append(Config q)
{
    if (!waypoints_.empty())
        length_ += distance(waypoints_.back(), q);
    waypoints_.push_back(std::move(q));
}

void GeometricPath::append(const GeometricPath &tail, bool skipFirst)
{
    for (std::size_t i = skipFirst ? 1 : 0; i < tail.size(); ++i)
        append(tail[i]);
}

GeometricPath GeometricPath::reversed() const
{
    return GeometricPath(std::vector<Config>(waypoints_.rbegin(), waypoints_.rend()));
}

Config GeometricPath::stateAtArcLength(double s) const
{
    if (waypoints_.empty())
        throw Error("arc-length lookup on an empty path");
    if (s <= 0.0)
        return waypoints_.front();
    double walked = 0.0;
    for (std::size_t i = 1; i < waypoints_.size(); ++i)
    {
        const double seg = distance(waypoints_[i - 1], waypoints_[i]);
        if (walked + seg >= s && seg > 0.0)
            return interpolate(waypoints_[i - 1], waypoints_[i], std::clamp((s - walked) / seg, 0.0, 1.0));
        walked += seg;
    }
    return waypoints_.back();
}

std::size_t segmentSubdivisions(double length, double resolution)
{
    if (!(resolution > 0.0))
        throw Error("resolution must be positive");
    if (length <= 0.0)
        return 0;
    const double ratio = length / resolution;
    // Absorb floating-point noise such as 1.0 / 0.25 -> 4.000000000000001.
    const auto n = static_cast<std::size_t>(std::ceil(ratio * (1.0 - 1e-12)));
    return std::max<std::size_t>(n, 1);
}

Discretization discretizePathWithArcLength(const GeometricPath &path, double resolution)
{
    if (path.empty())
        throw Error("cannot discretize an empty path");
    if (!(resolution > 0.0))
        throw Error("resolution must be positive");
    Discretization out;
    out.states.push_back(path.front());
    out.arcLength.push_back(0.0);
    double walked = 0.0;
    for (std::size_t w = 1; w < path.size(); ++w)
    {
        const Config &a = path[w - 1];
        const Config &b = path[w];
        const double seg = distance(a, b);
        if (seg == 0.0)
            continue;
        const std::size_t n = segmentSubdivisions(seg, resolution);
        Config scratch(a.dimension());
        for (std::size_t i = 1; i < n; ++i)
        {
            symmetricInterior(a, b, i, n, scratch);
            out.states.push_back(scratch);
            out.arcLength.push_back(walked + seg * static_cast<double>(i) / static_cast<double>(n));
        }
        walked += seg;
        out.states.push_back(b);
        out.arcLength.push_back(walked);
    }
    return out;
}

std::vector<Config> discretizePath(const GeometricPath &path, double resolution)
{
    return discretizePathWithArcLength(path, resolution).states;
}

bool checkMotion(const Config &a, const Config &b, const StateValidator &validator, double resolution)
{
    requireSameDimension(a, b);
    if (!validator(a) || !validator(b))
        return false;
    const std::size_t n = segmentSubdivisions(distance(a, b), resolution);
    if (n < 2)
        return true;
    Config scratch(a.dimension());
    for (std::size_t i = 1; i < n; ++i)
    {
        symmetricInterior(a, b, i, n, scratch);
        if (!validator(scratch))
            return false;
    }
    return true;
}

bool checkPath(const GeometricPath &path, const StateValidator &validator, double resolution)
{
    if (path.empty())
        return false;
    if (path.size() == 1)
        return validator(path.front());
    for (std::size_t i = 1; i < path.size(); ++i)
        if (!checkMotion(path[i - 1], path[i], validator, resolution))
            return false;
    return true;
}

}  // namespace thunder
