#include "thunder/environment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace thunder
{

namespace
{
constexpr std::size_t kMaxConsecutiveRejections = 10000;

double cross(const Point2 &o, const Point2 &a, const Point2 &b)
{
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool onSegment(const Point2 &p, const Segment2 &s)
{
    return std::min(s.a.x, s.b.x) <= p.x && p.x <= std::max(s.a.x, s.b.x) && std::min(s.a.y, s.b.y) <= p.y &&
           p.y <= std::max(s.a.y, s.b.y);
}

int sign(double v)
{
    return (v > 0.0) - (v < 0.0);
}

double pointSegmentDistance(const Point2 &p, const Segment2 &s)
{
    const double dx = s.b.x - s.a.x;
    const double dy = s.b.y - s.a.y;
    const double len2 = dx * dx + dy * dy;
    double t = 0.0;
    if (len2 > 0.0)
        t = std::clamp(((p.x - s.a.x) * dx + (p.y - s.a.y) * dy) / len2, 0.0, 1.0);
    const double cx = s.a.x + t * dx - p.x;
    const double cy = s.a.y + t * dy - p.y;
    return std::sqrt(cx * cx + cy * cy);
}

// Liang-Barsky clip of the segment against the closed box.
bool segmentHitsBox(const Segment2 &s, const Box &b)
{
    double t0 = 0.0;
    double t1 = 1.0;
    const double dx = s.b.x - s.a.x;
    const double dy = s.b.y - s.a.y;
    const std::array<double, 4> p{-dx, dx, -dy, dy};
    const std::array<double, 4> q{s.a.x - b.min.x, b.max.x - s.a.x, s.a.y - b.min.y, b.max.y - s.a.y};
    for (std::size_t i = 0; i < 4; ++i)
    {
        if (p[i] == 0.0)
        {
            if (q[i] < 0.0)
                return false;
            continue;
        }
        const double r = q[i] / p[i];
        if (p[i] < 0.0)
            t0 = std::max(t0, r);
        else
            t1 = std::min(t1, r);
        if (t0 > t1)
            return false;
    }
    return true;
}

bool armSelfCollides(const std::vector<Point2> &joints)
{
    const std::size_t links = joints.size() - 1;
    for (std::size_t i = 0; i < links; ++i)
        for (std::size_t j = i + 2; j < links; ++j)
            if (segmentsIntersect({joints[i], joints[i + 1]}, {joints[j], joints[j + 1]}))
                return true;
    return false;
}

Environment makePointEnvironment(std::string id, std::vector<Obstacle> obstacles)
{
    SpaceDefinition space({{0.0, 10.0}, {0.0, 10.0}}, 0.05);
    return Environment(std::move(id), std::move(space), RobotKind::Point, std::nullopt, std::move(obstacles),
                       InvariantPredicate::None);
}

ArmModel defaultArm(std::size_t links)
{
    ArmModel arm;
    arm.linkLengths.assign(links, 2.0);
    return arm;
}

Environment makeArmEnvironment(std::string id, std::vector<Obstacle> obstacles)
{
    constexpr std::size_t links = 4;
    std::vector<AxisBounds> bounds(links, AxisBounds{-std::numbers::pi, std::numbers::pi});
    SpaceDefinition space(std::move(bounds), 0.03);
    return Environment(std::move(id), std::move(space), RobotKind::Arm, defaultArm(links), std::move(obstacles),
                       InvariantPredicate::ArmBalanceProxy);
}

Box box(double x0, double y0, double x1, double y1)
{
    return Box{{x0, y0}, {x1, y1}};
}

Disc disc(double cx, double cy, double r)
{
    return Disc{{cx, cy}, r};
}

EnvironmentSet pointTwoFive()
{
    EnvironmentSet set;
    set.push_back(makePointEnvironment("open", {}));
    set.push_back(makePointEnvironment("narrow-passage", {box(1.0, 0.0, 2.5, 4.85), box(1.0, 5.15, 2.5, 10.0)}));
    set.push_back(makePointEnvironment(
        "clutter", {disc(2.5, 2.0, 0.6), disc(4.5, 3.0, 0.7), disc(7.0, 2.2, 0.8), disc(2.0, 5.0, 0.7),
                    disc(4.2, 6.0, 0.8), disc(6.3, 5.0, 0.6), disc(8.3, 4.6, 0.7), disc(3.0, 8.2, 0.7),
                    disc(5.6, 8.0, 0.6), disc(7.8, 7.5, 0.8), box(1.0, 3.2, 1.6, 3.8), box(6.0, 6.6, 6.6, 7.2)}));
    set.push_back(makePointEnvironment("wall-gap", {box(0.0, 4.8, 6.5, 5.2), box(8.0, 4.8, 10.0, 5.2)}));
    set.push_back(
        makePointEnvironment("u-trap", {box(3.0, 3.0, 7.0, 3.4), box(3.0, 6.6, 7.0, 7.0), box(3.0, 3.0, 3.4, 7.0)}));
    return set;
}

EnvironmentSet armFourFive()
{
    EnvironmentSet set;
    set.push_back(makeArmEnvironment("arm-open", {}));
    set.push_back(makeArmEnvironment("arm-shelf", {box(1.0, 6.0, 3.5, 6.5), box(6.5, 6.0, 9.0, 6.5)}));
    set.push_back(makeArmEnvironment("arm-pillars", {disc(2.5, 3.0, 0.6), disc(7.5, 3.0, 0.6)}));
    set.push_back(makeArmEnvironment("arm-ceiling", {box(0.0, 8.8, 4.2, 9.3), box(5.8, 8.8, 10.0, 9.3)}));
    set.push_back(makeArmEnvironment("arm-walls", {box(1.0, 0.0, 1.5, 5.0), box(8.5, 0.0, 9.0, 5.0)}));
    return set;
}

[[noreturn]] void parseError(std::size_t line, const std::string &what)
{
    throw Error("environment file line " + std::to_string(line) + ": " + what);
}
}  // namespace

std::string toString(InvariantPredicate p)
{
    switch (p)
    {
        case InvariantPredicate::None:
            return "none";
        case InvariantPredicate::ArmSelfCollision:
            return "self-collision";
        case InvariantPredicate::ArmBalanceProxy:
            return "balance-proxy";
    }
    return "none";
}

InvariantPredicate invariantFromString(const std::string &name)
{
    if (name == "none")
        return InvariantPredicate::None;
    if (name == "self-collision" || name == "planar-arm-self-collision")
        return InvariantPredicate::ArmSelfCollision;
    if (name == "balance-proxy" || name == "planar-arm-balance-proxy")
        return InvariantPredicate::ArmBalanceProxy;
    throw Error("unknown invariant predicate '" + name + "'");
}

std::vector<Point2> ArmModel::forwardKinematics(const Config &q) const
{
    if (q.dimension() != linkLengths.size())
        throw Error("arm configuration dimension does not match link count");
    std::vector<Point2> joints;
    joints.reserve(linkLengths.size() + 1);
    joints.push_back(base);
    double heading = 0.0;
    for (std::size_t i = 0; i < linkLengths.size(); ++i)
    {
        heading += q[i];
        const Point2 &p = joints.back();
        joints.push_back({p.x + linkLengths[i] * std::cos(heading), p.y + linkLengths[i] * std::sin(heading)});
    }
    return joints;
}

Point2 ArmModel::centerOfMass(const Config &q) const
{
    const auto joints = forwardKinematics(q);
    Point2 com;
    const auto links = static_cast<double>(linkLengths.size());
    for (std::size_t i = 0; i + 1 < joints.size(); ++i)
    {
        com.x += 0.5 * (joints[i].x + joints[i + 1].x) / links;
        com.y += 0.5 * (joints[i].y + joints[i + 1].y) / links;
    }
    return com;
}

bool segmentsIntersect(const Segment2 &s, const Segment2 &t)
{
    const int d1 = sign(cross(t.a, t.b, s.a));
    const int d2 = sign(cross(t.a, t.b, s.b));
    const int d3 = sign(cross(s.a, s.b, t.a));
    const int d4 = sign(cross(s.a, s.b, t.b));
    if (d1 * d2 < 0 && d3 * d4 < 0)
        return true;
    return (d1 == 0 && onSegment(s.a, t)) || (d2 == 0 && onSegment(s.b, t)) || (d3 == 0 && onSegment(t.a, s)) ||
           (d4 == 0 && onSegment(t.b, s));
}

bool pointInObstacle(const Point2 &p, const Obstacle &o)
{
    if (const auto *d = std::get_if<Disc>(&o))
    {
        const double dx = p.x - d->center.x;
        const double dy = p.y - d->center.y;
        return dx * dx + dy * dy <= d->radius * d->radius;
    }
    const auto &b = std::get<Box>(o);
    return b.min.x <= p.x && p.x <= b.max.x && b.min.y <= p.y && p.y <= b.max.y;
}

bool segmentHitsObstacle(const Segment2 &s, const Obstacle &o)
{
    if (const auto *d = std::get_if<Disc>(&o))
        return pointSegmentDistance(d->center, s) <= d->radius;
    return segmentHitsBox(s, std::get<Box>(o));
}

Environment::Environment(std::string id, SpaceDefinition space, RobotKind robot, std::optional<ArmModel> arm,
                         std::vector<Obstacle> obstacles, InvariantPredicate invariant)
  : id_(std::move(id))
  , space_(std::move(space))
  , robot_(robot)
  , arm_(std::move(arm))
  , obstacles_(std::move(obstacles))
  , invariant_(invariant)
{
    if (robot_ == RobotKind::Point && space_.dimension() != 2)
        throw Error("point robot environments must be two-dimensional");
    if (robot_ == RobotKind::Arm)
    {
        if (!arm_)
            throw Error("arm environment '" + id_ + "' has no arm model");
        if (arm_->linkLengths.size() != space_.dimension())
            throw Error("arm link count must equal the space dimension");
    }
    if (robot_ == RobotKind::Point && invariant_ != InvariantPredicate::None)
        throw Error("arm invariant predicates need an arm robot");
    for (const auto &o : obstacles_)
    {
        if (const auto *d = std::get_if<Disc>(&o); d && !(d->radius > 0.0))
            throw Error("disc radius must be positive");
        if (const auto *b = std::get_if<Box>(&o); b && !(b->min.x < b->max.x && b->min.y < b->max.y))
            throw Error("box requires min < max per axis");
    }
}

bool Environment::invariantValid(const Config &q) const
{
    if (invariant_ == InvariantPredicate::None)
        return true;
    const auto joints = arm_->forwardKinematics(q);
    if (armSelfCollides(joints))
        return false;
    if (invariant_ == InvariantPredicate::ArmBalanceProxy)
    {
        const double comX = arm_->centerOfMass(q).x;
        const double half = 0.9 * arm_->supportHalfWidth;
        if (comX < arm_->base.x - half || comX > arm_->base.x + half)
            return false;
    }
    return true;
}

bool Environment::variantValid(const Config &q) const
{
    if (obstacles_.empty())
        return true;
    if (robot_ == RobotKind::Point)
    {
        const Point2 p{q[0], q[1]};
        return std::none_of(obstacles_.begin(), obstacles_.end(),
                            [&](const Obstacle &o) { return pointInObstacle(p, o); });
    }
    const auto joints = arm_->forwardKinematics(q);
    for (std::size_t i = 0; i + 1 < joints.size(); ++i)
        for (const auto &o : obstacles_)
            if (segmentHitsObstacle({joints[i], joints[i + 1]}, o))
                return false;
    return true;
}

bool Environment::isStateValid(const Config &q) const
{
    return space_.satisfiesBounds(q) && invariantValid(q) && variantValid(q);
}

StateValidator Environment::fullValidator() const
{
    return [this](const Config &q) { return isStateValid(q); };
}

StateValidator Environment::invariantValidator() const
{
    return [this](const Config &q) { return space_.satisfiesBounds(q) && invariantValid(q); };
}

Environment Environment::withObstacles(std::string id, std::vector<Obstacle> obstacles) const
{
    return Environment(std::move(id), space_, robot_, arm_, std::move(obstacles), invariant_);
}

Environment Environment::withResolution(double resolution) const
{
    return Environment(id_, SpaceDefinition(space_.bounds(), resolution), robot_, arm_, obstacles_, invariant_);
}

Point2 Environment::projection(const Config &q) const
{
    if (robot_ == RobotKind::Point)
        return {q[0], q[1]};
    return arm_->forwardKinematics(q).back();
}

const Environment &findEnvironment(const EnvironmentSet &set, const std::string &id)
{
    for (const auto &env : set)
        if (env.id() == id)
            return env;
    throw Error("unknown environment id '" + id + "'");
}

namespace
{
Config sampleValid(const Environment &env, Rng &rng)
{
    for (std::size_t attempt = 0; attempt < kMaxConsecutiveRejections; ++attempt)
    {
        Config q = env.space().sampleUniform(rng);
        if (env.isStateValid(q))
            return q;
    }
    throw Error("environment has no reachable free space found");
}
}  // namespace

PlanningProblem randomProblem(const Environment &env, std::uint64_t seed)
{
    Rng rng(seed);
    PlanningProblem problem;
    problem.start = sampleValid(env, rng);
    problem.goal = sampleValid(env, rng);
    problem.environmentId = env.id();
    problem.seed = seed;
    return problem;
}

PlanningProblem randomGoalProblem(const Environment &env, const Config &start, std::uint64_t seed)
{
    Rng rng(seed);
    PlanningProblem problem;
    problem.start = start;
    problem.goal = sampleValid(env, rng);
    problem.environmentId = env.id();
    problem.seed = seed;
    return problem;
}

std::vector<std::string> builtinEnvironmentSetNames()
{
    return {"point2d-five", "arm4-five"};
}

EnvironmentSet builtinEnvironmentSet(const std::string &name)
{
    if (name == "point2d-five")
        return pointTwoFive();
    if (name == "arm4-five")
        return armFourFive();
    std::string valid;
    for (const auto &n : builtinEnvironmentSetNames())
        valid += (valid.empty() ? "" : ", ") + n;
    throw Error("unknown environment set '" + name + "' (valid: " + valid + ")");
}

Config builtinStart(const std::string &name)
{
    if (name == "point2d-five")
        return Config{0.5, 0.5};
    if (name == "arm4-five")
        return Config{std::numbers::pi / 2.0, 0.0, 0.0, 0.0};
    throw Error("unknown environment set '" + name + "'");
}

EnvironmentSet parseEnvironmentSet(std::istream &in)
{
    struct Pending
    {
        std::string id;
        std::size_t dim = 0;
        RobotKind robot = RobotKind::Point;
        std::vector<AxisBounds> bounds;
        std::optional<double> resolution;
        std::optional<InvariantPredicate> invariant;
        ArmModel arm;
        std::vector<Obstacle> obstacles;
    };

    EnvironmentSet set;
    std::optional<Pending> current;
    auto finish = [&]() {
        if (!current)
            return;
        Pending &p = *current;
        std::vector<AxisBounds> bounds = p.bounds;
        if (bounds.empty())
            bounds.assign(p.dim, p.robot == RobotKind::Point ? AxisBounds{0.0, 10.0}
                                                             : AxisBounds{-std::numbers::pi, std::numbers::pi});
        else if (bounds.size() == 1)
            bounds.assign(p.dim, bounds.front());
        if (bounds.size() != p.dim)
            throw Error("environment '" + p.id + "': bounds do not match dimension");
        const double resolution = p.resolution.value_or(p.robot == RobotKind::Point ? 0.05 : 0.03);
        std::optional<ArmModel> arm;
        if (p.robot == RobotKind::Arm)
        {
            if (p.arm.linkLengths.empty())
                p.arm.linkLengths.assign(p.dim, 2.0);
            p.arm.linkLengths.resize(p.dim, p.arm.linkLengths.front());
            arm = p.arm;
        }
        const InvariantPredicate inv = p.invariant.value_or(
            p.robot == RobotKind::Point ? InvariantPredicate::None : InvariantPredicate::ArmBalanceProxy);
        for (const auto &e : set)
            if (e.id() == p.id)
                throw Error("duplicate environment id '" + p.id + "'");
        set.emplace_back(p.id, SpaceDefinition(bounds, resolution), p.robot, arm, std::move(p.obstacles), inv);
        current.reset();
    };

    std::string raw;
    std::size_t lineNo = 0;
    while (std::getline(in, raw))
    {
        ++lineNo;
        if (const auto hash = raw.find('#'); hash != std::string::npos)
            raw.erase(hash);
        std::istringstream line(raw);
        std::string keyword;
        if (!(line >> keyword))
            continue;
        if (keyword == "env")
        {
            finish();
            Pending p;
            std::string dimWord;
            std::string kind;
            if (!(line >> p.id >> dimWord >> p.dim >> kind) || dimWord != "dim" || p.dim == 0)
                parseError(lineNo, "expected 'env <id> dim <d> point|arm'");
            if (kind == "point")
                p.robot = RobotKind::Point;
            else if (kind == "arm")
                p.robot = RobotKind::Arm;
            else
                parseError(lineNo, "robot kind must be 'point' or 'arm'");
            current = std::move(p);
            continue;
        }
        if (!current)
            parseError(lineNo, "'" + keyword + "' before any 'env' header");
        if (keyword == "disc")
        {
            Disc d;
            if (!(line >> d.center.x >> d.center.y >> d.radius))
                parseError(lineNo, "expected 'disc cx cy r'");
            if (!(d.radius > 0.0))
                parseError(lineNo, "disc radius must be positive");
            current->obstacles.emplace_back(d);
        }
        else if (keyword == "box")
        {
            Box b;
            if (!(line >> b.min.x >> b.min.y >> b.max.x >> b.max.y))
                parseError(lineNo, "expected 'box x0 y0 x1 y1'");
            if (!(b.min.x < b.max.x && b.min.y < b.max.y))
                parseError(lineNo, "box requires min < max");
            current->obstacles.emplace_back(b);
        }
        else if (keyword == "bounds")
        {
            double lo = 0.0;
            double hi = 0.0;
            while (line >> lo >> hi)
                current->bounds.push_back({lo, hi});
            if (current->bounds.empty())
                parseError(lineNo, "expected 'bounds lo hi ...'");
        }
        else if (keyword == "resolution")
        {
            double r = 0.0;
            if (!(line >> r))
                parseError(lineNo, "expected 'resolution r'");
            current->resolution = r;
        }
        else if (keyword == "invariant")
        {
            std::string name;
            if (!(line >> name))
                parseError(lineNo, "expected 'invariant <name>'");
            current->invariant = invariantFromString(name);
        }
        else if (keyword == "arm")
        {
            std::string w1, w2, w3;
            double length = 0.0;
            if (!(line >> w1 >> current->arm.base.x >> current->arm.base.y >> w2 >> length >> w3 >>
                  current->arm.supportHalfWidth) ||
                w1 != "base" || w2 != "link" || w3 != "support")
                parseError(lineNo, "expected 'arm base <x> <y> link <L> support <w>'");
            current->arm.linkLengths.assign(current->dim, length);
        }
        else
        {
            parseError(lineNo, "unknown directive '" + keyword + "'");
        }
    }
    finish();
    return set;
}

EnvironmentSet loadEnvironmentSet(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open environment file '" + path + "'");
    return parseEnvironmentSet(in);
}

void writeEnvironmentSet(std::ostream &out, const EnvironmentSet &set)
{
    out.precision(17);
    for (const auto &env : set)
    {
        out << "env " << env.id() << " dim " << env.space().dimension() << ' '
            << (env.robot() == RobotKind::Point ? "point" : "arm") << '\n';
        out << "bounds";
        for (const auto &b : env.space().bounds())
            out << ' ' << b.low << ' ' << b.high;
        out << '\n';
        out << "resolution " << env.resolution() << '\n';
        out << "invariant " << toString(env.invariant()) << '\n';
        if (env.arm())
            out << "arm base " << env.arm()->base.x << ' ' << env.arm()->base.y << " link "
                << env.arm()->linkLengths.front() << " support " << env.arm()->supportHalfWidth << '\n';
        for (const auto &o : env.obstacles())
        {
            if (const auto *d = std::get_if<Disc>(&o))
                out << "disc " << d->center.x << ' ' << d->center.y << ' ' << d->radius << '\n';
            else
            {
                const auto &b = std::get<Box>(o);
                out << "box " << b.min.x << ' ' << b.min.y << ' ' << b.max.x << ' ' << b.max.y << '\n';
            }
        }
    }
}

}  // namespace thunder
