#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "thunder/cspace.hpp"

namespace thunder
{

using NodeId = std::uint64_t;
using EdgeId = std::uint64_t;

enum class GuardType : std::uint8_t
{
    Coverage = 0,
    Connectivity = 1,
    Interface = 2,
    Quality = 3
};

const char *toString(GuardType type);

struct RoadmapNode
{
    Config config;
    GuardType type;
    /// Experience (insertion) that created the node; not persisted.
    std::uint64_t origin = 0;
};

struct RoadmapEdge
{
    NodeId a;
    NodeId b;
    double weight;
};

struct Adjacency
{
    NodeId neighbor;
    EdgeId edge;
};

/// Union-find over node ids with path halving and union by rank.
class DisjointSets
{
public:
    NodeId add();
    NodeId find(NodeId x) const;
    /// True when the two sets were distinct.
    bool unite(NodeId a, NodeId b);
    std::size_t components() const
    {
        return components_;
    }

private:
    mutable std::vector<NodeId> parent_;
    std::vector<std::uint8_t> rank_;
    std::size_t components_ = 0;
};

/// The experience graph: typed guards, distance-weighted edges, the visibility radius and
/// the stretch factor. Holds no validity predicate; see SparsInserter for the insertion rules.
class SparseRoadmap
{
public:
    SparseRoadmap(std::size_t dimension, double delta, double stretch);

    std::size_t dimension() const
    {
        return dimension_;
    }
    double delta() const
    {
        return delta_;
    }
    double stretch() const
    {
        return stretch_;
    }

    std::size_t nodeCount() const
    {
        return nodes_.size();
    }
    std::size_t edgeCount() const
    {
        return edges_.size();
    }
    std::size_t componentCount() const
    {
        return components_.components();
    }
    const std::vector<RoadmapNode> &nodes() const
    {
        return nodes_;
    }
    const RoadmapNode &node(NodeId id) const
    {
        return nodes_.at(id);
    }
    const std::vector<RoadmapEdge> &edges() const
    {
        return edges_;
    }
    const std::vector<Adjacency> &adjacent(NodeId id) const
    {
        return adjacency_.at(id);
    }

    NodeId addNode(Config q, GuardType type, std::uint64_t origin = 0);
    /// Adds an undirected edge weighted by the endpoint distance. Returns the new edge id.
    EdgeId addEdge(NodeId a, NodeId b);
    bool hasEdge(NodeId a, NodeId b) const;
    bool sameComponent(NodeId a, NodeId b) const;
    NodeId componentOf(NodeId a) const
    {
        return components_.find(a);
    }

    /// Nodes within `delta()` of q, ascending by distance, ties by id.
    std::vector<NodeId> nearestWithinDelta(const Config &q) const;
    std::vector<std::pair<NodeId, double>> nearestWithin(const Config &q, double radius) const;
    std::optional<NodeId> nearest(const Config &q) const;

    /// Shortest-path cost from a to b, or infinity if it exceeds `limit` or does not exist.
    double boundedShortestPath(NodeId a, NodeId b, double limit) const;

    std::size_t countByType(GuardType type) const;

private:
    std::size_t dimension_;
    double delta_;
    double stretch_;
    std::vector<RoadmapNode> nodes_;
    std::vector<double> flat_;
    std::vector<RoadmapEdge> edges_;
    std::vector<std::vector<Adjacency>> adjacency_;
    DisjointSets components_;
};

enum class AddOutcome
{
    AddedCoverage,
    AddedConnectivity,
    AddedInterface,
    AddedQuality,
    Rejected
};

const char *toString(AddOutcome outcome);

struct AddResult
{
    AddOutcome outcome = AddOutcome::Rejected;
    std::optional<NodeId> node;
    std::size_t edgesAdded = 0;
};

struct InsertionReport
{
    std::size_t statesAttempted = 0;
    std::size_t coverageAdded = 0;
    std::size_t connectivityAdded = 0;
    std::size_t interfaceAdded = 0;
    std::size_t qualityAdded = 0;
    std::size_t edgesAdded = 0;
    bool startGoalConnected = false;

    std::size_t guardsAdded() const
    {
        return coverageAdded + connectivityAdded + interfaceAdded + qualityAdded;
    }
    void record(const AddResult &r);
};

/// Arc-length spacing of the evenly spaced guard candidates along an experience.
struct GuardSpacing
{
    std::size_t intervals;  // n; n + 1 candidates including both endpoints
    double factor;          // f, clamped to [fLow, fHigh)
};

/// n = floor(l / (delta * fLow)), f = l / (n * delta). n = 0 means the path is too short.
GuardSpacing computeGuardSpacing(double length, double delta, double fLow = 1.0, double fHigh = 2.0);

/// Applies the sparse-spanner insertion rules to a roadmap using the invariant-only
/// predicate: coverage, connectivity, interface and quality, in that order.
class SparsInserter
{
public:
    struct Options
    {
        double resolution;
        double fLow = 1.0;
        double fHigh = 2.0;
        std::uint64_t seed = 0;
    };

    SparsInserter(SparseRoadmap &roadmap, StateValidator invariant, Options options);

    /// Within delta and joined by an invariant-valid straight motion.
    bool visible(const Config &a, const Config &b) const;

    /// Throws Error if q violates the invariant constraints.
    AddResult tryAddState(const Config &q);

    /// Evenly spaced guards, then midpoints between them, then every remaining
    /// discretized state in seeded random order.
    InsertionReport insertExperiencePath(const GeometricPath &path);

    /// Discretized states in path order with no spacing heuristic (for comparison only).
    InsertionReport insertInOrder(const GeometricPath &path);

    void setOrigin(std::uint64_t origin)
    {
        origin_ = origin;
    }

private:
    bool motionValid(const Config &a, const Config &b) const;
    AddResult attempt(const Config &q, InsertionReport &report);
    bool endpointsConnected(const GeometricPath &path) const;

    SparseRoadmap &roadmap_;
    StateValidator invariant_;
    Options options_;
    Rng rng_;
    std::uint64_t origin_ = 0;
};

/// Roadmap file layout (little-endian): "THDR", u32 version, u32 dimension, f64 delta,
/// f64 stretch, u64 node count, nodes as (u64 id, u8 type, dimension x f64), u64 edge
/// count, edges as (u64 idA, u64 idB).
inline constexpr std::uint32_t kRoadmapFormatVersion = 1;

class RoadmapFileError : public Error
{
public:
    enum class Kind
    {
        Open,
        BadMagic,
        VersionMismatch,
        Truncated,
        DimensionMismatch,
        Corrupt
    };

    RoadmapFileError(Kind kind, const std::string &what) : Error(what), kind_(kind)
    {
    }
    Kind kind() const
    {
        return kind_;
    }

private:
    Kind kind_;
};

/// Returns the number of bytes written.
std::uint64_t saveRoadmap(const SparseRoadmap &roadmap, const std::string &path);
SparseRoadmap loadRoadmap(const std::string &path, std::optional<std::size_t> expectedDimension = std::nullopt);
std::vector<std::uint8_t> serializeRoadmap(const SparseRoadmap &roadmap);
SparseRoadmap deserializeRoadmap(std::span<const std::uint8_t> bytes,
                                 std::optional<std::size_t> expectedDimension = std::nullopt);
/// One node or edge per line, for diffing.
void dumpRoadmapText(const SparseRoadmap &roadmap, std::ostream &out);

/// Copy-on-write holder: readers take immutable snapshots, a single writer publishes
/// whole new versions so no reader sees a partially inserted experience.
class ExperienceDatabase
{
public:
    explicit ExperienceDatabase(SparseRoadmap initial);

    std::shared_ptr<const SparseRoadmap> snapshot() const;

    template <typename Fn>
    auto modify(Fn &&fn)
    {
        std::lock_guard writer(writerMutex_);
        auto next = std::make_shared<SparseRoadmap>(*snapshot());
        auto result = fn(*next);
        publish(std::move(next));
        return result;
    }

    void replace(SparseRoadmap roadmap);

private:
    void publish(std::shared_ptr<const SparseRoadmap> next);

    mutable std::mutex snapshotMutex_;
    std::mutex writerMutex_;
    std::shared_ptr<const SparseRoadmap> current_;
};

}  // namespace thunder
