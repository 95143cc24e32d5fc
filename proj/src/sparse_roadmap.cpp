#include "thunder/sparse_roadmap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <ostream>
#include <queue>
#include <unordered_map>

#include "binary_io.hpp"
#include "thunder/kernels.hpp"

namespace thunder
{

namespace detail
{
std::vector<std::uint8_t> readFileBytes(const std::string &path, bool &ok)
{
    std::ifstream in(path, std::ios::binary);
    ok = static_cast<bool>(in);
    if (!ok)
        return {};
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool writeFileBytes(const std::string &path, std::span<const std::uint8_t> bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        return false;
    out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    return static_cast<bool>(out);
}
}  // namespace detail

const char *toString(GuardType type)
{
    switch (type)
    {
        case GuardType::Coverage:
            return "coverage";
        case GuardType::Connectivity:
            return "connectivity";
        case GuardType::Interface:
            return "interface";
        case GuardType::Quality:
            return "quality";
    }
    return "unknown";
}

const char *toString(AddOutcome outcome)
{
    switch (outcome)
    {
        case AddOutcome::AddedCoverage:
            return "coverage";
        case AddOutcome::AddedConnectivity:
            return "connectivity";
        case AddOutcome::AddedInterface:
            return "interface";
        case AddOutcome::AddedQuality:
            return "quality";
        case AddOutcome::Rejected:
            return "rejected";
    }
    return "unknown";
}

// DisjointSets ///////////////////////////////////////////////////////////////////////////

NodeId DisjointSets::add()
{
    const NodeId id = parent_.size();
    parent_.push_back(id);
    rank_.push_back(0);
    ++components_;
    return id;
}

NodeId DisjointSets::find(NodeId x) const
{
    while (parent_[x] != x)
    {
        parent_[x] = parent_[parent_[x]];
        x = parent_[x];
    }
    return x;
}

bool DisjointSets::unite(NodeId a, NodeId b)
{
    NodeId ra = find(a);
    NodeId rb = find(b);
    if (ra == rb)
        return false;
    if (rank_[ra] < rank_[rb])
        std::swap(ra, rb);
    parent_[rb] = ra;
    if (rank_[ra] == rank_[rb])
        ++rank_[ra];
    --components_;
    return true;
}

// SparseRoadmap //////////////////////////////////////////////////////////////////////////

SparseRoadmap::SparseRoadmap(std::size_t dimension, double delta, double stretch)
  : dimension_(dimension), delta_(delta), stretch_(stretch)
{
    if (dimension_ == 0)
        throw Error("roadmap dimension must be positive");
    if (!(delta_ > 0.0))
        throw Error("roadmap delta must be positive");
    if (!(stretch_ > 1.0))
        throw Error("stretch factor must exceed 1");
}

NodeId SparseRoadmap::addNode(Config q, GuardType type, std::uint64_t origin)
{
    if (q.dimension() != dimension_)
        throw Error("node dimension does not match roadmap");
    flat_.insert(flat_.end(), q.coords().begin(), q.coords().end());
    nodes_.push_back({std::move(q), type, origin});
    adjacency_.emplace_back();
    return components_.add();
}

EdgeId SparseRoadmap::addEdge(NodeId a, NodeId b)
{
    if (a >= nodes_.size() || b >= nodes_.size() || a == b)
        throw Error("invalid edge endpoints");
    const EdgeId id = edges_.size();
    edges_.push_back({a, b, distance(nodes_[a].config, nodes_[b].config)});
    adjacency_[a].push_back({b, id});
    adjacency_[b].push_back({a, id});
    components_.unite(a, b);
    return id;
}

bool SparseRoadmap::hasEdge(NodeId a, NodeId b) const
{
    const auto &list = adjacency_.at(a).size() <= adjacency_.at(b).size() ? adjacency_[a] : adjacency_[b];
    const NodeId other = &list == &adjacency_[a] ? b : a;
    return std::any_of(list.begin(), list.end(), [&](const Adjacency &adj) { return adj.neighbor == other; });
}

bool SparseRoadmap::sameComponent(NodeId a, NodeId b) const
{
    return components_.find(a) == components_.find(b);
}

std::vector<std::pair<NodeId, double>> SparseRoadmap::nearestWithin(const Config &q, double radius) const
{
    const auto found = kernels::radiusScan({flat_, dimension_}, q.coords(), radius);
    std::vector<std::pair<NodeId, double>> out;
    out.reserve(found.size());
    for (const auto &n : found)
        out.emplace_back(n.index, n.distance);
    return out;
}

std::vector<NodeId> SparseRoadmap::nearestWithinDelta(const Config &q) const
{
    std::vector<NodeId> out;
    for (const auto &[id, d] : nearestWithin(q, delta_))
        out.push_back(id);
    return out;
}

std::optional<NodeId> SparseRoadmap::nearest(const Config &q) const
{
    if (nodes_.empty())
        return std::nullopt;
    NodeId best = 0;
    double bestD = std::numeric_limits<double>::infinity();
    for (NodeId i = 0; i < nodes_.size(); ++i)
    {
        const double d = distance(nodes_[i].config, q);
        if (d < bestD)
        {
            bestD = d;
            best = i;
        }
    }
    return best;
}

double SparseRoadmap::boundedShortestPath(NodeId a, NodeId b, double limit) const
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (a == b)
        return 0.0;
    using Entry = std::pair<double, NodeId>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    std::unordered_map<NodeId, double> dist;
    dist[a] = 0.0;
    open.push({0.0, a});
    while (!open.empty())
    {
        const auto [d, u] = open.top();
        open.pop();
        if (d > dist[u])
            continue;
        if (u == b)
            return d;
        for (const auto &adj : adjacency_[u])
        {
            const double nd = d + edges_[adj.edge].weight;
            if (nd > limit)
                continue;
            auto it = dist.find(adj.neighbor);
            if (it == dist.end() || nd < it->second)
            {
                dist[adj.neighbor] = nd;
                open.push({nd, adj.neighbor});
            }
        }
    }
    return inf;
}

std::size_t SparseRoadmap::countByType(GuardType type) const
{
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [&](const RoadmapNode &n) { return n.type == type; }));
}

// Insertion //////////////////////////////////////////////////////////////////////////////

void InsertionReport::record(const AddResult &r)
{
    edgesAdded += r.edgesAdded;
    switch (r.outcome)
    {
        case AddOutcome::AddedCoverage:
            ++coverageAdded;
            break;
        case AddOutcome::AddedConnectivity:
            ++connectivityAdded;
            break;
        case AddOutcome::AddedInterface:
            ++interfaceAdded;
            break;
        case AddOutcome::AddedQuality:
            ++qualityAdded;
            break;
        case AddOutcome::Rejected:
            break;
    }
}

GuardSpacing computeGuardSpacing(double length, double delta, double fLow, double fHigh)
{
    if (!(delta > 0.0) || !(fLow > 0.0) || !(fHigh > fLow))
        throw Error("guard spacing needs delta > 0 and 0 < fLow < fHigh");
    const double ratio = length / (delta * fLow);
    if (!(ratio >= 1.0))
        return {0, 0.0};
    const auto n = static_cast<std::size_t>(std::floor(ratio));
    double f = length / (static_cast<double>(n) * delta);
    f = std::max(f, fLow);
    if (f >= fHigh)
        f = std::nextafter(fHigh, fLow);
    return {n, f};
}

SparsInserter::SparsInserter(SparseRoadmap &roadmap, StateValidator invariant, Options options)
  : roadmap_(roadmap), invariant_(std::move(invariant)), options_(options), rng_(options.seed)
{
    if (!(options_.resolution > 0.0))
        throw Error("insertion resolution must be positive");
}

bool SparsInserter::motionValid(const Config &a, const Config &b) const
{
    return checkMotion(a, b, invariant_, options_.resolution);
}

bool SparsInserter::visible(const Config &a, const Config &b) const
{
    return distance(a, b) <= roadmap_.delta() && motionValid(a, b);
}

AddResult SparsInserter::tryAddState(const Config &q)
{
    if (!invariant_(q))
        throw Error("state violates the invariant constraints");

    AddResult result;
    const std::vector<NodeId> graphNeighborhood = roadmap_.nearestWithinDelta(q);
    std::vector<NodeId> visibleNeighborhood;
    for (NodeId id : graphNeighborhood)
        if (motionValid(q, roadmap_.node(id).config))
            visibleNeighborhood.push_back(id);

    // Coverage: nobody sees q.
    if (visibleNeighborhood.empty())
    {
        result.outcome = AddOutcome::AddedCoverage;
        result.node = roadmap_.addNode(q, GuardType::Coverage, origin_);
        return result;
    }

    // Connectivity: q sees more than one component. Link the closest node of each.
    std::vector<NodeId> representatives;
    std::vector<NodeId> seenComponents;
    for (NodeId id : visibleNeighborhood)
    {
        const NodeId comp = roadmap_.componentOf(id);
        if (std::find(seenComponents.begin(), seenComponents.end(), comp) == seenComponents.end())
        {
            seenComponents.push_back(comp);
            representatives.push_back(id);
        }
    }
    if (representatives.size() > 1)
    {
        result.outcome = AddOutcome::AddedConnectivity;
        const NodeId added = roadmap_.addNode(q, GuardType::Connectivity, origin_);
        result.node = added;
        for (NodeId rep : representatives)
        {
            roadmap_.addEdge(added, rep);
            ++result.edgesAdded;
        }
        return result;
    }

    // Interface: q's two closest neighbors are both visible and not yet joined.
    if (visibleNeighborhood.size() > 1 && graphNeighborhood[0] == visibleNeighborhood[0] &&
        graphNeighborhood[1] == visibleNeighborhood[1])
    {
        const NodeId u = visibleNeighborhood[0];
        const NodeId v = visibleNeighborhood[1];
        if (!roadmap_.hasEdge(u, v))
        {
            if (motionValid(roadmap_.node(u).config, roadmap_.node(v).config))
            {
                roadmap_.addEdge(u, v);
                result.edgesAdded = 1;
                result.outcome = AddOutcome::Rejected;
                return result;
            }
            result.outcome = AddOutcome::AddedInterface;
            const NodeId added = roadmap_.addNode(q, GuardType::Interface, origin_);
            result.node = added;
            roadmap_.addEdge(added, u);
            roadmap_.addEdge(added, v);
            result.edgesAdded = 2;
            return result;
        }
    }

    // Quality: q witnesses a local route between two guards it sees. When the roadmap route
    // between them is more than `stretch` times the best witnessed route, repair it with a
    // direct edge or, if the straight motion is blocked, by adding q.
    const double t = roadmap_.stretch();
    const std::size_t considered = std::min<std::size_t>(visibleNeighborhood.size(), 8);
    for (std::size_t i = 0; i < considered; ++i)
    {
        for (std::size_t j = i + 1; j < considered; ++j)
        {
            const NodeId u = visibleNeighborhood[i];
            const NodeId w = visibleNeighborhood[j];
            const Config &cu = roadmap_.node(u).config;
            const Config &cw = roadmap_.node(w).config;
            const double direct = distance(cu, cw);
            const double viaQ = distance(cu, q) + distance(q, cw);
            const double routed = roadmap_.boundedShortestPath(u, w, t * viaQ);
            if (routed <= t * direct)
                continue;
            if (!roadmap_.hasEdge(u, w) && motionValid(cu, cw))
            {
                roadmap_.addEdge(u, w);
                ++result.edgesAdded;
                continue;
            }
            if (routed > t * viaQ)
            {
                const NodeId added = roadmap_.addNode(q, GuardType::Quality, origin_);
                roadmap_.addEdge(added, u);
                roadmap_.addEdge(added, w);
                result.edgesAdded += 2;
                result.outcome = AddOutcome::AddedQuality;
                result.node = added;
                return result;
            }
        }
    }

    result.outcome = AddOutcome::Rejected;
    return result;
}

AddResult SparsInserter::attempt(const Config &q, InsertionReport &report)
{
    ++report.statesAttempted;
    // Interpolated candidates can graze an invariant boundary the source path only touched.
    if (!invariant_(q))
        return {};
    AddResult r = tryAddState(q);
    report.record(r);
    return r;
}

bool SparsInserter::endpointsConnected(const GeometricPath &path) const
{
    const auto s = roadmap_.nearest(path.front());
    const auto g = roadmap_.nearest(path.back());
    return s && g && roadmap_.sameComponent(*s, *g);
}

InsertionReport SparsInserter::insertExperiencePath(const GeometricPath &path)
{
    if (path.empty())
        throw Error("cannot insert an empty experience");
    InsertionReport report;
    const double length = path.length();
    const GuardSpacing spacing = computeGuardSpacing(length, roadmap_.delta(), options_.fLow, options_.fHigh);

    std::vector<Config> attempted;
    auto attemptOnce = [&](const Config &q) {
        attempted.push_back(q);
        attempt(q, report);
    };

    if (spacing.intervals == 0)
    {
        attemptOnce(path.front());
        if (!(path.back() == path.front()))
            attemptOnce(path.back());
        report.startGoalConnected = endpointsConnected(path);
        return report;
    }

    const double step = spacing.factor * roadmap_.delta();
    std::vector<double> guardArc(spacing.intervals + 1);
    for (std::size_t k = 0; k <= spacing.intervals; ++k)
        guardArc[k] = k == spacing.intervals ? length : static_cast<double>(k) * step;

    for (double s : guardArc)
        attemptOnce(path.stateAtArcLength(s));
    for (std::size_t k = 0; k < spacing.intervals; ++k)
        attemptOnce(path.stateAtArcLength(0.5 * (guardArc[k] + guardArc[k + 1])));

    std::vector<Config> remaining;
    for (auto &q : discretizePath(path, options_.resolution))
        if (std::find(attempted.begin(), attempted.end(), q) == attempted.end())
            remaining.push_back(std::move(q));
    std::shuffle(remaining.begin(), remaining.end(), rng_);
    for (const auto &q : remaining)
        attempt(q, report);

    report.startGoalConnected = endpointsConnected(path);
    return report;
}

InsertionReport SparsInserter::insertInOrder(const GeometricPath &path)
{
    if (path.empty())
        throw Error("cannot insert an empty experience");
    InsertionReport report;
    for (const auto &q : discretizePath(path, options_.resolution))
        attempt(q, report);
    report.startGoalConnected = endpointsConnected(path);
    return report;
}

// Persistence ////////////////////////////////////////////////////////////////////////////

namespace
{
constexpr char kMagic[4] = {'T', 'H', 'D', 'R'};

[[noreturn]] void fail(RoadmapFileError::Kind kind, const std::string &what)
{
    throw RoadmapFileError(kind, "roadmap file: " + what);
}
}  // namespace

std::vector<std::uint8_t> serializeRoadmap(const SparseRoadmap &roadmap)
{
    detail::ByteWriter w;
    w.raw(kMagic, 4);
    w.u32(kRoadmapFormatVersion);
    w.u32(static_cast<std::uint32_t>(roadmap.dimension()));
    w.f64(roadmap.delta());
    w.f64(roadmap.stretch());
    w.u64(roadmap.nodeCount());
    for (NodeId id = 0; id < roadmap.nodeCount(); ++id)
    {
        const auto &node = roadmap.node(id);
        w.u64(id);
        w.u8(static_cast<std::uint8_t>(node.type));
        for (double c : node.config.coords())
            w.f64(c);
    }
    w.u64(roadmap.edgeCount());
    for (const auto &e : roadmap.edges())
    {
        w.u64(e.a);
        w.u64(e.b);
    }
    return w.take();
}

SparseRoadmap deserializeRoadmap(std::span<const std::uint8_t> bytes, std::optional<std::size_t> expectedDimension)
{
    using Kind = RoadmapFileError::Kind;
    detail::ByteReader r(bytes);
    char magic[4];
    if (!r.raw(magic, 4))
        fail(Kind::Truncated, "missing header");
    if (!std::equal(magic, magic + 4, kMagic))
        fail(Kind::BadMagic, "bad magic bytes");
    std::uint32_t version = 0;
    std::uint32_t dim = 0;
    double delta = 0.0;
    double stretch = 0.0;
    if (!r.u32(version))
        fail(Kind::Truncated, "missing version");
    if (version != kRoadmapFormatVersion)
        fail(Kind::VersionMismatch, "unsupported format version " + std::to_string(version));
    if (!r.u32(dim) || !r.f64(delta) || !r.f64(stretch))
        fail(Kind::Truncated, "incomplete header");
    if (expectedDimension && *expectedDimension != dim)
        fail(Kind::DimensionMismatch,
             "dimension " + std::to_string(dim) + " where " + std::to_string(*expectedDimension) + " was expected");
    if (dim == 0 || !(delta > 0.0) || !(stretch > 1.0))
        fail(Kind::Corrupt, "invalid header values");

    SparseRoadmap roadmap(dim, delta, stretch);
    std::uint64_t nodeCount = 0;
    if (!r.u64(nodeCount))
        fail(Kind::Truncated, "missing node count");
    if (nodeCount > r.remaining() / (9 + 8 * static_cast<std::uint64_t>(dim)))
        fail(Kind::Truncated, "node section shorter than its count");
    std::unordered_map<std::uint64_t, NodeId> index;
    for (std::uint64_t i = 0; i < nodeCount; ++i)
    {
        std::uint64_t id = 0;
        std::uint8_t type = 0;
        if (!r.u64(id) || !r.u8(type))
            fail(Kind::Truncated, "incomplete node");
        if (type > static_cast<std::uint8_t>(GuardType::Quality))
            fail(Kind::Corrupt, "unknown guard type");
        std::vector<double> coords(dim);
        for (auto &c : coords)
            if (!r.f64(c))
                fail(Kind::Truncated, "incomplete node coordinates");
        if (!index.emplace(id, roadmap.nodeCount()).second)
            fail(Kind::Corrupt, "duplicate node id");
        roadmap.addNode(Config(std::move(coords)), static_cast<GuardType>(type));
    }
    std::uint64_t edgeCount = 0;
    if (!r.u64(edgeCount))
        fail(Kind::Truncated, "missing edge count");
    if (edgeCount > r.remaining() / 16)
        fail(Kind::Truncated, "edge section shorter than its count");
    for (std::uint64_t i = 0; i < edgeCount; ++i)
    {
        std::uint64_t a = 0;
        std::uint64_t b = 0;
        if (!r.u64(a) || !r.u64(b))
            fail(Kind::Truncated, "incomplete edge");
        const auto ia = index.find(a);
        const auto ib = index.find(b);
        if (ia == index.end() || ib == index.end() || a == b)
            fail(Kind::Corrupt, "edge references an unknown node");
        roadmap.addEdge(ia->second, ib->second);
    }
    if (r.remaining() != 0)
        fail(Kind::Corrupt, "trailing bytes");
    return roadmap;
}

std::uint64_t saveRoadmap(const SparseRoadmap &roadmap, const std::string &path)
{
    const auto bytes = serializeRoadmap(roadmap);
    if (!detail::writeFileBytes(path, bytes))
        fail(RoadmapFileError::Kind::Open, "cannot write '" + path + "'");
    return bytes.size();
}

SparseRoadmap loadRoadmap(const std::string &path, std::optional<std::size_t> expectedDimension)
{
    bool ok = false;
    const auto bytes = detail::readFileBytes(path, ok);
    if (!ok)
        fail(RoadmapFileError::Kind::Open, "cannot read '" + path + "'");
    return deserializeRoadmap(bytes, expectedDimension);
}

void dumpRoadmapText(const SparseRoadmap &roadmap, std::ostream &out)
{
    const auto precision = out.precision(17);
    out << "roadmap dim " << roadmap.dimension() << " delta " << roadmap.delta() << " stretch " << roadmap.stretch()
        << '\n';
    for (NodeId id = 0; id < roadmap.nodeCount(); ++id)
    {
        const auto &node = roadmap.node(id);
        out << "node " << id << ' ' << toString(node.type);
        for (double c : node.config.coords())
            out << ' ' << c;
        out << '\n';
    }
    for (const auto &e : roadmap.edges())
        out << "edge " << e.a << ' ' << e.b << ' ' << e.weight << '\n';
    out.precision(precision);
}

// ExperienceDatabase /////////////////////////////////////////////////////////////////////

ExperienceDatabase::ExperienceDatabase(SparseRoadmap initial)
  : current_(std::make_shared<const SparseRoadmap>(std::move(initial)))
{
}

std::shared_ptr<const SparseRoadmap> ExperienceDatabase::snapshot() const
{
    std::lock_guard lock(snapshotMutex_);
    return current_;
}

void ExperienceDatabase::publish(std::shared_ptr<const SparseRoadmap> next)
{
    std::lock_guard lock(snapshotMutex_);
    current_ = std::move(next);
}

void ExperienceDatabase::replace(SparseRoadmap roadmap)
{
    std::lock_guard writer(writerMutex_);
    publish(std::make_shared<const SparseRoadmap>(std::move(roadmap)));
}

}  // namespace thunder
