#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "thunder/cspace.hpp"

namespace thunder
{

struct Point2
{
    double x = 0.0;
    double y = 0.0;
};

struct Disc
{
    Point2 center;
    double radius = 0.0;
};

struct Box
{
    Point2 min;
    Point2 max;
};

using Obstacle = std::variant<Disc, Box>;

enum class RobotKind
{
    Point,
    Arm
};

/// Constraint that holds regardless of which obstacles are present.
enum class InvariantPredicate
{
    None,
    ArmSelfCollision,
    ArmBalanceProxy  // self-collision plus center-of-mass support test
};

std::string toString(InvariantPredicate p);
InvariantPredicate invariantFromString(const std::string &name);

/// Planar serial chain with relative joint angles and equal-mass links.
struct ArmModel
{
    Point2 base{5.0, 0.5};
    std::vector<double> linkLengths;
    /// Half width of the support interval centered on the base, before the 10% reduction.
    double supportHalfWidth = 1.0;

    /// Joint positions, base first, tip last (links + 1 points).
    std::vector<Point2> forwardKinematics(const Config &q) const;
    Point2 centerOfMass(const Config &q) const;
};

struct Segment2
{
    Point2 a;
    Point2 b;
};

bool segmentsIntersect(const Segment2 &s, const Segment2 &t);
bool segmentHitsObstacle(const Segment2 &s, const Obstacle &o);
bool pointInObstacle(const Point2 &p, const Obstacle &o);

/// One benchmark world: robot, variant obstacles and an invariant predicate.
/// Immutable after construction; validators returned here borrow `*this`.
class Environment
{
public:
    Environment(std::string id, SpaceDefinition space, RobotKind robot, std::optional<ArmModel> arm,
                std::vector<Obstacle> obstacles, InvariantPredicate invariant);

    const std::string &id() const
    {
        return id_;
    }
    const SpaceDefinition &space() const
    {
        return space_;
    }
    RobotKind robot() const
    {
        return robot_;
    }
    const std::optional<ArmModel> &arm() const
    {
        return arm_;
    }
    const std::vector<Obstacle> &obstacles() const
    {
        return obstacles_;
    }
    InvariantPredicate invariant() const
    {
        return invariant_;
    }
    double resolution() const
    {
        return space_.collisionResolution();
    }

    bool invariantValid(const Config &q) const;
    bool variantValid(const Config &q) const;
    /// Bounds, invariant constraints and obstacle clearance.
    bool isStateValid(const Config &q) const;

    StateValidator fullValidator() const;
    StateValidator invariantValidator() const;

    /// Same robot and invariant constraint with a different obstacle set.
    Environment withObstacles(std::string id, std::vector<Obstacle> obstacles) const;
    /// Same world checked at a different collision resolution.
    Environment withResolution(double resolution) const;

    /// Workspace point used for drawing: identity for the point robot, arm tip otherwise.
    Point2 projection(const Config &q) const;

private:
    std::string id_;
    SpaceDefinition space_;
    RobotKind robot_;
    std::optional<ArmModel> arm_;
    std::vector<Obstacle> obstacles_;
    InvariantPredicate invariant_;
};

using EnvironmentSet = std::vector<Environment>;

const Environment &findEnvironment(const EnvironmentSet &set, const std::string &id);

struct PlanningProblem
{
    Config start;
    Config goal;
    std::string environmentId;
    double timeBudget = 10.0;
    std::uint64_t seed = 0;
};

/// Rejection-samples a valid start and goal; deterministic for a fixed seed.
PlanningProblem randomProblem(const Environment &env, std::uint64_t seed);
/// Keeps `start`, rejection-samples the goal.
PlanningProblem randomGoalProblem(const Environment &env, const Config &start, std::uint64_t seed);

/// Names accepted by builtinEnvironmentSet.
std::vector<std::string> builtinEnvironmentSetNames();
EnvironmentSet builtinEnvironmentSet(const std::string &name);
/// Common start state valid in every environment of a built-in set.
Config builtinStart(const std::string &name);

/// Environment description format, one directive per line ('#' starts a comment):
///
///   env <id> dim <d> point|arm      starts a new environment
///   bounds <lo> <hi> [<lo> <hi> ...] per-axis bounds (one pair, or d pairs)
///   resolution <r>                   collision-checking resolution
///   invariant none|self-collision|balance-proxy
///   arm base <x> <y> link <L> support <w>
///   disc <cx> <cy> <r>
///   box <x0> <y0> <x1> <y1>
EnvironmentSet parseEnvironmentSet(std::istream &in);
EnvironmentSet loadEnvironmentSet(const std::string &path);
void writeEnvironmentSet(std::ostream &out, const EnvironmentSet &set);

}  // namespace thunder
