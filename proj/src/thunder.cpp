#include "thunder/thunder.hpp"

#include <chrono>

namespace thunder
{

void ThunderConfig::validate() const
{
    if (!(deltaFraction > 0.0 && deltaFraction < 1.0))
        throw Error("deltaFraction must lie in (0, 1)");
    if (!(stretch > 1.0))
        throw Error("stretch must exceed 1");
    if (collisionResolution < 0.0)
        throw Error("collisionResolution must not be negative");
    if (candidatePairCap == 0)
        throw Error("candidatePairCap must be positive");
    if (insertionQueueCapacity == 0)
        throw Error("insertion queue capacity must be positive");
    if (!enableScratch && !enableRecall)
        throw Error("at least one of scratch and recall must be enabled");
    if (enableScratch && scratchWorkers == 0)
        throw Error("scratchWorkers must be positive");
    if (!(checksPerSecond > 0.0))
        throw Error("checksPerSecond must be positive");
}

Environment effectiveEnvironment(const Environment &env, double collisionResolution)
{
    if (collisionResolution <= 0.0 || collisionResolution == env.resolution())
        return env;
    return env.withResolution(collisionResolution);
}

RaceWorker scratchWorker(const Environment &env, const PlanningProblem &problem, double range, std::uint64_t seed)
{
    return [&env, &problem, range, seed](const PlannerBudget &budget) {
        RaceEntry entry;
        entry.solver = Solver::Scratch;
        RRTConnect rrt(env.space(), env.fullValidator(), {range, seed});
        PlanOutcome out = rrt.solve(problem.start, problem.goal, budget);
        entry.status = out.status;
        entry.iterations = out.iterations;
        entry.validityChecks = out.validityChecks;
        entry.path = std::move(out.path);
        return entry;
    };
}

void smoothWinner(PlanResult &result, const Environment &env, unsigned rounds, std::uint64_t seed,
                  const RaceConfig &race)
{
    if (!result.ok() || rounds == 0 || result.path.size() < 3)
        return;
    std::uint64_t checks = 0;
    const StateValidator counted = countingValidator(env.fullValidator(), checks);
    Rng rng(seed);
    PlannerBudget budget;
    if (race.deterministic)
    {
        const double left = std::max(0.0, race.budgetSeconds - result.wallTime) * race.checksPerSecond;
        budget.maxValidityChecks = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(left));
        result.path = smoothPath(result.path, counted, env.resolution(), rounds, rng, &budget);
        result.smoothingSeconds = static_cast<double>(checks) / race.checksPerSecond;
    }
    else
    {
        const auto t0 = Clock::now();
        budget.deadline = t0 + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(
                                   std::max(0.0, race.budgetSeconds - result.wallTime)));
        result.path = smoothPath(result.path, counted, env.resolution(), rounds, rng, &budget);
        result.smoothingSeconds = std::chrono::duration<double>(Clock::now() - t0).count();
    }
    result.smoothingChecks = checks;
}

PlanResult collectRace(RaceOutcome race, const PlanningProblem &problem)
{
    PlanResult result;
    result.problem = problem;
    result.wallTime = race.wallSeconds;
    result.loserStopSeconds = race.loserStopSeconds;
    for (const RaceEntry &e : race.entries)
    {
        if (e.solver == Solver::Scratch)
        {
            result.scratchChecks += e.validityChecks;
            result.scratchIterations += e.iterations;
        }
        else
        {
            result.recallChecks += e.validityChecks;
            result.disabledEdges = e.disabledEdges;
            result.repairSegments = e.repairSegments;
            result.candidatePairsTried = e.candidatePairsTried;
        }
    }
    if (race.winner)
    {
        RaceEntry &w = race.entries[*race.winner];
        result.status = PlanStatus::Success;
        result.solver = w.solver;
        result.path = std::move(w.path);
        return result;
    }
    result.status = PlanStatus::Timeout;
    for (const RaceEntry &e : race.entries)
        if (e.status == PlanStatus::InvalidQuery)
            result.status = PlanStatus::InvalidQuery;
    return result;
}

Thunder::Thunder(const Environment &reference, ThunderConfig config)
  : config_((config.validate(), config))
  , reference_(effectiveEnvironment(reference, config.collisionResolution))
  , delta_(config.deltaFraction * reference_.space().maximumExtent())
  , db_(SparseRoadmap(reference_.space().dimension(), delta_, config.stretch))
  , inserter_([this](std::stop_token stop) { inserterLoop(stop); })
{
}

Thunder::~Thunder()
{
    inserter_.request_stop();
    wake_.notify_all();
}

PlanResult Thunder::solve(const PlanningProblem &problem, const Environment &queryEnv)
{
    if (queryEnv.space().dimension() != reference_.space().dimension())
        throw Error("environment '" + queryEnv.id() + "' does not match the database dimension");
    const Environment env = effectiveEnvironment(queryEnv, config_.collisionResolution);

    PlanResult invalid;
    invalid.problem = problem;
    invalid.status = PlanStatus::InvalidQuery;
    if (problem.start.dimension() != env.space().dimension() || problem.goal.dimension() != env.space().dimension() ||
        !env.isStateValid(problem.start) || !env.isStateValid(problem.goal) || !(problem.timeBudget > 0.0))
    {
        std::lock_guard lock(mutex_);
        ++counters_.failures;
        return invalid;
    }

    const std::shared_ptr<const SparseRoadmap> snapshot = db_.snapshot();
    std::vector<RaceWorker> workers;
    if (config_.enableRecall)
    {
        RetrievalConfig rc;
        rc.candidateCap = config_.candidatePairCap;
        rc.smoothingRounds = 0;
        rc.rrtRange = config_.rrtRange;
        rc.seed = mixSeed(config_.seed ^ 0x5eed, problem.seed);
        workers.push_back([&env, &problem, snapshot, rc](const PlannerBudget &budget) {
            RaceEntry entry;
            entry.solver = Solver::RecallExact;
            RetrievalAttempt attempt = retrieve(problem, *snapshot, env, rc, budget);
            entry.validityChecks = attempt.validityChecks;
            if (!attempt.result)
            {
                entry.status = attempt.stoppedBy.value_or(PlanStatus::Timeout);
                return entry;
            }
            entry.status = PlanStatus::Success;
            entry.solver = attempt.result->provenance;
            entry.path = std::move(attempt.result->path);
            entry.disabledEdges = attempt.result->disabledEdges;
            entry.repairSegments = attempt.result->repairSegments;
            entry.candidatePairsTried = attempt.result->candidatePairsTried;
            return entry;
        });
    }
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

bool Thunder::submitExperience(const PlanResult &result)
{
    if (!result.ok() || result.solver != Solver::Scratch || result.path.size() < 2)
        return false;
    {
        std::lock_guard lock(mutex_);
        if (queue_.size() >= config_.insertionQueueCapacity)
        {
            queue_.pop_front();
            ++counters_.dropped;
        }
        const std::uint64_t id = nextExperience_++;
        queue_.push_back({id, result.path});
        provenance_.emplace(id, result.solver);
    }
    wake_.notify_one();
    return true;
}

void Thunder::drain()
{
    std::unique_lock lock(mutex_);
    idle_.wait(lock, [&] { return queue_.empty() && !busy_; });
}

void Thunder::inserterLoop(std::stop_token stop)
{
    const StateValidator invariant = reference_.invariantValidator();
    while (true)
    {
        Pending next;
        {
            std::unique_lock lock(mutex_);
            if (!wake_.wait(lock, stop, [&] { return !queue_.empty(); }))
                return;
            next = std::move(queue_.front());
            queue_.pop_front();
            busy_ = true;
        }

        const auto t0 = Clock::now();
        SparseRoadmap roadmap = *db_.snapshot();
        SparsInserter inserter(roadmap, invariant, {reference_.resolution(), 1.0, 2.0, mixSeed(config_.seed, next.id)});
        inserter.setOrigin(next.id);
        const InsertionReport report = inserter.insertExperiencePath(next.path);
        const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();

        {
            // Publishing under the stats lock keeps snapshotStats() consistent with the roadmap.
            std::lock_guard lock(mutex_);
            db_.replace(std::move(roadmap));
            ++counters_.insertions;
            counters_.insertionSeconds += seconds;
            counters_.guardsAdded += report.guardsAdded();
            history_.push_back({next.id, report, seconds});
            busy_ = false;
        }
        idle_.notify_all();
    }
}

ThunderStats Thunder::snapshotStats() const
{
    std::lock_guard lock(mutex_);
    const auto roadmap = db_.snapshot();
    ThunderStats s = counters_;
    s.nodes = roadmap->nodeCount();
    s.edges = roadmap->edgeCount();
    s.components = roadmap->componentCount();
    s.queueDepth = queue_.size() + (busy_ ? 1 : 0);
    return s;
}

std::vector<InsertionRecord> Thunder::insertionHistory() const
{
    std::lock_guard lock(mutex_);
    return history_;
}

std::map<std::uint64_t, Solver> Thunder::provenance() const
{
    std::lock_guard lock(mutex_);
    return provenance_;
}

std::uint64_t Thunder::saveDatabase(const std::string &path) const
{
    return saveRoadmap(*db_.snapshot(), path);
}

void Thunder::loadDatabase(const std::string &path)
{
    SparseRoadmap loaded = loadRoadmap(path, reference_.space().dimension());
    drain();
    std::lock_guard lock(mutex_);
    db_.replace(std::move(loaded));
}

}  // namespace thunder
