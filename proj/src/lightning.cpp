#include "thunder/lightning.hpp"

#include <algorithm>

#include "binary_io.hpp"
#include "thunder/kernels.hpp"

namespace thunder
{

namespace
{
std::vector<double> flatten(const GeometricPath &p)
{
    std::vector<double> flat;
    if (p.empty())
        return flat;
    flat.reserve(p.size() * p.front().dimension());
    for (const Config &q : p.waypoints())
        flat.insert(flat.end(), q.coords().begin(), q.coords().end());
    return flat;
}
}  // namespace

double dtwDistance(const GeometricPath &a, const GeometricPath &b)
{
    if (a.empty() || b.empty())
        throw Error("DTW needs non-empty paths");
    const auto fa = flatten(a);
    const auto fb = flatten(b);
    return kernels::dtw({fa, a.front().dimension()}, {fb, b.front().dimension()});
}

GeometricPath resamplePath(const GeometricPath &path, std::size_t count)
{
    if (path.empty())
        throw Error("cannot resample an empty path");
    if (count < 2)
        throw Error("resampling needs at least two waypoints");
    std::vector<Config> out;
    out.reserve(count);
    const double total = path.length();
    for (std::size_t i = 0; i < count; ++i)
        out.push_back(i + 1 == count ? path.back()
                                     : path.stateAtArcLength(total * static_cast<double>(i) /
                                                             static_cast<double>(count - 1)));
    return GeometricPath(std::move(out));
}

double pscore(const GeometricPath &path, const StateValidator &validator, double resolution)
{
    const auto states = discretizePath(path, resolution);
    if (states.empty())
        return 0.0;
    return static_cast<double>(kernels::countInvalid(states, validator)) / static_cast<double>(states.size());
}

PathStore::PathStore(std::size_t dimension, double dtwThreshold) : dimension_(dimension), threshold_(dtwThreshold)
{
    if (dimension == 0)
        throw Error("path store dimension must be positive");
    if (!(dtwThreshold >= 0.0))
        throw Error("DTW threshold must not be negative");
}

std::size_t PathStore::totalWaypoints() const
{
    std::size_t n = 0;
    for (const auto &p : paths_)
        n += p.size();
    return n;
}

void PathStore::add(GeometricPath p)
{
    if (p.empty() || p.front().dimension() != dimension_)
        throw Error("stored path has the wrong dimension");
    const auto r = flatten(resamplePath(p, kResampleCount));
    resampled_.insert(resampled_.end(), r.begin(), r.end());
    starts_.insert(starts_.end(), p.front().coords().begin(), p.front().coords().end());
    goals_.insert(goals_.end(), p.back().coords().begin(), p.back().coords().end());
    paths_.push_back(std::move(p));
}

bool PathStore::maybeStore(const GeometricPath &p)
{
    if (p.empty() || p.front().dimension() != dimension_)
        throw Error("stored path has the wrong dimension");
    if (!paths_.empty())
    {
        const auto query = flatten(resamplePath(p, kResampleCount));
        const std::size_t stride = kResampleCount * dimension_;
        std::vector<kernels::PointSet> candidates;
        candidates.reserve(paths_.size());
        for (std::size_t i = 0; i < paths_.size(); ++i)
            candidates.push_back({std::span<const double>(resampled_).subspan(i * stride, stride), dimension_});
        const auto match = kernels::minDtw(candidates, {query, dimension_});
        if (match.cost <= threshold_)
            return false;
    }
    add(p);
    return true;
}

std::vector<std::size_t> PathStore::retrieveTopN(const Config &start, const Config &goal, std::size_t n) const
{
    if (start.dimension() != dimension_ || goal.dimension() != dimension_)
        throw Error("query dimension does not match the path store");
    std::vector<std::size_t> out;
    for (const auto &nb : kernels::rankByEndpoints({starts_, dimension_}, {goals_, dimension_}, start.coords(),
                                                   goal.coords(), n))
        out.push_back(nb.index);
    return out;
}

std::uint64_t PathStore::serializedBytes() const
{
    std::uint64_t bytes = 4 + 4 + 4 + 8 + 8;
    for (const auto &p : paths_)
        bytes += 8 + 8 * static_cast<std::uint64_t>(p.size() * dimension_);
    return bytes;
}

std::vector<std::uint8_t> serializePathStore(const PathStore &store)
{
    detail::ByteWriter w;
    w.raw("LGHT", 4);
    w.u32(kPathStoreFormatVersion);
    w.u32(static_cast<std::uint32_t>(store.dimension()));
    w.f64(store.dtwThreshold());
    w.u64(store.size());
    for (std::size_t i = 0; i < store.size(); ++i)
    {
        const auto &p = store.path(i);
        w.u64(p.size());
        for (const auto &q : p.waypoints())
            for (double c : q.coords())
                w.f64(c);
    }
    return w.take();
}

PathStore deserializePathStore(std::span<const std::uint8_t> bytes, std::optional<std::size_t> expectedDimension)
{
    using Kind = RoadmapFileError::Kind;
    detail::ByteReader r(bytes);
    char magic[4];
    if (!r.raw(magic, 4))
        throw RoadmapFileError(Kind::Truncated, "path store is truncated");
    if (std::string(magic, 4) != "LGHT")
        throw RoadmapFileError(Kind::BadMagic, "not a path store (bad magic)");
    std::uint32_t version = 0, dim = 0;
    double threshold = 0.0;
    std::uint64_t count = 0;
    if (!r.u32(version))
        throw RoadmapFileError(Kind::Truncated, "path store is truncated");
    if (version != kPathStoreFormatVersion)
        throw RoadmapFileError(Kind::VersionMismatch, "unsupported path store version " + std::to_string(version));
    if (!r.u32(dim) || !r.f64(threshold) || !r.u64(count))
        throw RoadmapFileError(Kind::Truncated, "path store is truncated");
    if (dim == 0)
        throw RoadmapFileError(Kind::Corrupt, "path store has dimension 0");
    if (expectedDimension && *expectedDimension != dim)
        throw RoadmapFileError(Kind::DimensionMismatch, "path store dimension " + std::to_string(dim) +
                                                            " does not match expected " +
                                                            std::to_string(*expectedDimension));
    PathStore store(dim, threshold);
    for (std::uint64_t i = 0; i < count; ++i)
    {
        std::uint64_t n = 0;
        if (!r.u64(n))
            throw RoadmapFileError(Kind::Truncated, "path store is truncated");
        if (n == 0)
            throw RoadmapFileError(Kind::Corrupt, "stored path has no waypoints");
        if (n > r.remaining() / (8 * dim))
            throw RoadmapFileError(Kind::Truncated, "path store is truncated");
        std::vector<Config> pts;
        pts.reserve(n);
        for (std::uint64_t k = 0; k < n; ++k)
        {
            std::vector<double> c(dim);
            for (auto &v : c)
                r.f64(v);
            pts.emplace_back(std::move(c));
        }
        store.add(GeometricPath(std::move(pts)));
    }
    if (r.remaining() != 0)
        throw RoadmapFileError(Kind::Corrupt, "trailing bytes after path store");
    return store;
}

std::uint64_t savePathStore(const PathStore &store, const std::string &path)
{
    const auto bytes = serializePathStore(store);
    if (!detail::writeFileBytes(path, bytes))
        throw RoadmapFileError(RoadmapFileError::Kind::Open, "cannot write '" + path + "'");
    return bytes.size();
}

PathStore loadPathStore(const std::string &path, std::optional<std::size_t> expectedDimension)
{
    bool ok = false;
    const auto bytes = detail::readFileBytes(path, ok);
    if (!ok)
        throw RoadmapFileError(RoadmapFileError::Kind::Open, "cannot read '" + path + "'");
    return deserializePathStore(bytes, expectedDimension);
}

void LightningConfig::validate() const
{
    if (!(dtwThreshold >= 0.0))
        throw Error("dtwThreshold must not be negative");
    if (candidatePaths == 0)
        throw Error("candidatePaths must be positive");
    if (collisionResolution < 0.0)
        throw Error("collisionResolution must not be negative");
    if (!enableScratch && !enableRecall)
        throw Error("at least one of scratch and recall must be enabled");
    if (enableScratch && scratchWorkers == 0)
        throw Error("scratchWorkers must be positive");
    if (!(checksPerSecond > 0.0))
        throw Error("checksPerSecond must be positive");
}

RaceEntry lightningRecall(const PlanningProblem &problem, const PathStore &store, const Environment &env,
                          const LightningConfig &config, const PlannerBudget &budget)
{
    RaceEntry entry;
    entry.solver = Solver::RecallExact;
    if (store.size() == 0 || problem.start == problem.goal)
        return entry;

    const StateValidator full = env.fullValidator();
    const double resolution = env.resolution();
    std::uint64_t checks = 0;
    const StateValidator counted = countingValidator(full, checks);

    const auto candidates = store.retrieveTopN(problem.start, problem.goal, config.candidatePaths);
    entry.candidatePairsTried = candidates.size();
    std::size_t best = candidates.front();
    double bestScore = 2.0;
    for (std::size_t idx : candidates)
    {
        if (auto stop = budgetExhausted(budget, 0, checks))
        {
            entry.status = *stop;
            entry.validityChecks = checks;
            return entry;
        }
        const auto states = discretizePath(store.path(idx), resolution);
        const double score =
            static_cast<double>(kernels::countInvalid(states, full)) / static_cast<double>(states.size());
        checks += states.size();
        if (score < bestScore)
        {
            bestScore = score;
            best = idx;
        }
    }

    GeometricPath candidate({problem.start});
    for (const Config &q : store.path(best).waypoints())
        if (!(q == candidate.back()))
            candidate.append(q);
    if (!(problem.goal == candidate.back()))
        candidate.append(problem.goal);

    const auto ranges = findInvalidRanges(candidate, counted, resolution);
    entry.solver = ranges.empty() ? Solver::RecallExact : Solver::RecallRepaired;
    PlannerBudget repairBudget = budget;
    if (repairBudget.maxValidityChecks != 0)
        repairBudget.maxValidityChecks =
            checks >= repairBudget.maxValidityChecks ? 1 : repairBudget.maxValidityChecks - checks;
    RepairOutcome repaired =
        repairPath(candidate, ranges, env.space(), full, repairBudget, mixSeed(config.seed, problem.seed),
                   config.rrtRange);
    checks += repaired.validityChecks;
    entry.repairSegments = repaired.segmentsRepaired;
    if (!repaired.ok())
    {
        entry.status = repaired.status;
        entry.validityChecks = checks;
        return entry;
    }
    entry.validityChecks = checks;
    if (auto stop = budgetExhausted(budget, 0, checks))
    {
        entry.status = *stop;
        return entry;
    }
    entry.path = std::move(repaired.path);
    entry.status = PlanStatus::Success;
    return entry;
}

Lightning::Lightning(const Environment &reference, LightningConfig config)
  : config_((config.validate(), config))
  , reference_(effectiveEnvironment(reference, config.collisionResolution))
  , store_(std::make_shared<PathStore>(reference_.space().dimension(), config.dtwThreshold))
{
}

PlanResult Lightning::solve(const PlanningProblem &problem, const Environment &queryEnv)
{
    if (queryEnv.space().dimension() != reference_.space().dimension())
        throw Error("environment '" + queryEnv.id() + "' does not match the store dimension");
    const Environment env = effectiveEnvironment(queryEnv, config_.collisionResolution);

    if (problem.start.dimension() != env.space().dimension() || problem.goal.dimension() != env.space().dimension() ||
        !env.isStateValid(problem.start) || !env.isStateValid(problem.goal) || !(problem.timeBudget > 0.0))
    {
        PlanResult invalid;
        invalid.problem = problem;
        invalid.status = PlanStatus::InvalidQuery;
        std::lock_guard lock(mutex_);
        ++counters_.failures;
        return invalid;
    }

    const std::shared_ptr<const PathStore> snapshot = store();
    std::vector<RaceWorker> workers;
    if (config_.enableRecall)
        workers.push_back([&, snapshot](const PlannerBudget &budget) {
            return lightningRecall(problem, *snapshot, env, config_, budget);
        });
    if (config_.enableScratch)
        for (std::size_t w = 0; w < config_.scratchWorkers; ++w)
            workers.push_back(
                scratchWorker(env, problem, config_.rrtRange, mixSeed(mixSeed(config_.seed, problem.seed), w)));

    RaceConfig rc{problem.timeBudget, config_.deterministic, config_.checksPerSecond};
    PlanResult result = collectRace(runRace(workers, rc), problem);
    smoothWinner(result, env, config_.smoothingRounds, mixSeed(config_.seed ^ 0x5300, problem.seed), rc);

    std::lock_guard lock(mutex_);
    if (!result.ok())
        ++counters_.failures;
    else if (result.solver == Solver::Scratch)
        ++counters_.scratchSolves;
    else if (result.solver == Solver::RecallExact)
        ++counters_.recallExactSolves;
    else
        ++counters_.recallRepairedSolves;
    return result;
}

bool Lightning::submitExperience(const PlanResult &result)
{
    if (!result.ok() || result.path.empty())
        return false;
    GeometricPath dense(discretizePath(result.path, reference_.resolution()));
    std::lock_guard lock(mutex_);
    // Readers hold their own snapshot, so the store is only mutated when nobody else owns it.
    if (store_.use_count() > 1)
        store_ = std::make_shared<PathStore>(*store_);
    const bool stored = store_->maybeStore(dense);
    ++(stored ? counters_.stored : counters_.rejected);
    return stored;
}

LightningStats Lightning::snapshotStats() const
{
    std::lock_guard lock(mutex_);
    LightningStats s = counters_;
    s.paths = store_->size();
    s.waypoints = store_->totalWaypoints();
    return s;
}

std::shared_ptr<const PathStore> Lightning::store() const
{
    std::lock_guard lock(mutex_);
    return store_;
}

std::uint64_t Lightning::saveStore(const std::string &path) const
{
    return savePathStore(*store(), path);
}

void Lightning::loadStore(const std::string &path)
{
    auto loaded = std::make_shared<PathStore>(loadPathStore(path, reference_.space().dimension()));
    std::lock_guard lock(mutex_);
    store_ = std::move(loaded);
}

}  // namespace thunder
