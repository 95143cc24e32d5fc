#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace thunder
{

/// Base class for every error raised by the library on caller bugs or bad input.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A point in a bounded real configuration space.
class Config
{
public:
    Config() = default;
    explicit Config(std::size_t dimension) : coords_(dimension, 0.0)
    {
    }
    explicit Config(std::vector<double> coords) : coords_(std::move(coords))
    {
    }
    Config(std::initializer_list<double> coords) : coords_(coords)
    {
    }

    std::size_t dimension() const
    {
        return coords_.size();
    }
    double operator[](std::size_t i) const
    {
        return coords_[i];
    }
    double &operator[](std::size_t i)
    {
        return coords_[i];
    }
    std::span<const double> coords() const
    {
        return coords_;
    }
    std::span<double> coords()
    {
        return coords_;
    }

    friend bool operator==(const Config &, const Config &) = default;

private:
    std::vector<double> coords_;
};

/// Predicate over configurations. Must be deterministic and safe to call concurrently.
using StateValidator = std::function<bool(const Config &)>;

using Rng = std::mt19937_64;

struct AxisBounds
{
    double low;
    double high;
};

/// Dimension, per-axis bounds and the collision-checking resolution of a space.
class SpaceDefinition
{
public:
    SpaceDefinition(std::vector<AxisBounds> bounds, double collisionResolution);

    std::size_t dimension() const
    {
        return bounds_.size();
    }
    const std::vector<AxisBounds> &bounds() const
    {
        return bounds_;
    }
    double collisionResolution() const
    {
        return resolution_;
    }

    /// Length of the bounding-box diagonal.
    double maximumExtent() const;

    /// Builds a config from raw coordinates, clamped into bounds.
    Config makeConfig(std::vector<double> coords) const;
    bool satisfiesBounds(const Config &q) const;
    Config sampleUniform(Rng &rng) const;

private:
    std::vector<AxisBounds> bounds_;
    double resolution_;
};

double distance(const Config &a, const Config &b);

/// a + s (b - a); s must lie in [0, 1].
Config interpolate(const Config &a, const Config &b, double s);

/// Ordered waypoints plus cached total length.
class GeometricPath
{
public:
    GeometricPath() = default;
    explicit GeometricPath(std::vector<Config> waypoints);

    const std::vector<Config> &waypoints() const
    {
        return waypoints_;
    }
    std::size_t size() const
    {
        return waypoints_.size();
    }
    bool empty() const
    {
        return waypoints_.empty();
    }
    const Config &front() const
    {
        return waypoints_.front();
    }
    const Config &back() const
    {
        return waypoints_.back();
    }
    const Config &operator[](std::size_t i) const
    {
        return waypoints_[i];
    }
    double length() const
    {
        return length_;
    }

    void append(Config q);
    void append(const GeometricPath &tail, bool skipFirst);
    GeometricPath reversed() const;

    /// State at arc length s from the start (s is clamped to [0, length]).
    Config stateAtArcLength(double s) const;

    friend bool operator==(const GeometricPath &a, const GeometricPath &b)
    {
        return a.waypoints_ == b.waypoints_;
    }

private:
    std::vector<Config> waypoints_;
    double length_ = 0.0;
};

struct Discretization
{
    std::vector<Config> states;
    std::vector<double> arcLength;  // cumulative, same size as states
};

/// States at uniform arc-length spacing per segment, never more than `resolution` apart.
/// Every original waypoint is kept; zero-length segments collapse.
std::vector<Config> discretizePath(const GeometricPath &path, double resolution);
Discretization discretizePathWithArcLength(const GeometricPath &path, double resolution);

/// Number of subdivisions used to validate or discretize a segment of the given length.
std::size_t segmentSubdivisions(double length, double resolution);

/// True iff every state along the segment (endpoints included) spaced no more than
/// `resolution` apart satisfies `validator`. Interior states are computed symmetrically so
/// the result does not depend on the segment's direction.
bool checkMotion(const Config &a, const Config &b, const StateValidator &validator, double resolution);

/// Every waypoint and segment of `path` passes `validator`.
bool checkPath(const GeometricPath &path, const StateValidator &validator, double resolution);

}  // namespace thunder
