#include "thunder/race.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <limits>
#include <mutex>
#include <stop_token>
#include <thread>

namespace thunder
{

std::uint64_t mixSeed(std::uint64_t a, std::uint64_t b)
{
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace
{
double secondsBetween(Clock::time_point a, Clock::time_point b)
{
    return std::chrono::duration<double>(b - a).count();
}

RaceOutcome runLogicalRace(const std::vector<RaceWorker> &workers, const RaceConfig &config)
{
    RaceOutcome outcome;
    const auto logicalBudget = static_cast<std::uint64_t>(std::max(1.0, config.budgetSeconds * config.checksPerSecond));
    std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
    for (std::size_t i = 0; i < workers.size(); ++i)
    {
        PlannerBudget budget;
        budget.maxValidityChecks = std::min(logicalBudget, best);
        RaceEntry entry = workers[i](budget);
        if (entry.ok() && entry.validityChecks < best && entry.validityChecks <= logicalBudget)
        {
            best = entry.validityChecks;
            outcome.winner = i;
        }
        outcome.entries.push_back(std::move(entry));
    }
    outcome.wallSeconds =
        outcome.winner ? static_cast<double>(best) / config.checksPerSecond : config.budgetSeconds;
    return outcome;
}
}  // namespace

RaceOutcome runRace(const std::vector<RaceWorker> &workers, const RaceConfig &config)
{
    if (workers.empty())
        throw Error("a race needs at least one worker");
    if (config.deterministic)
        return runLogicalRace(workers, config);

    const auto start = Clock::now();
    const auto deadline =
        start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(config.budgetSeconds));

    RaceOutcome outcome;
    outcome.entries.resize(workers.size());
    std::vector<std::stop_source> stops(workers.size());
    std::mutex mutex;
    std::condition_variable done;
    std::size_t finished = 0;
    Clock::time_point claimed = start;

    auto body = [&](std::size_t i) {
        PlannerBudget budget;
        budget.deadline = deadline;
        budget.cancel = stops[i].get_token();
        RaceEntry entry = workers[i](budget);
        std::lock_guard lock(mutex);
        const bool won = entry.ok() && !outcome.winner;
        outcome.entries[i] = std::move(entry);
        ++finished;
        if (won)
        {
            outcome.winner = i;
            claimed = Clock::now();
            for (std::size_t j = 0; j < stops.size(); ++j)
                if (j != i)
                    stops[j].request_stop();
        }
        done.notify_all();
    };

    if (workers.size() == 1)
    {
        body(0);
        outcome.wallSeconds = secondsBetween(start, outcome.winner ? claimed : Clock::now());
        return outcome;
    }

    {
        std::vector<std::jthread> threads;
        threads.reserve(workers.size());
        for (std::size_t i = 0; i < workers.size(); ++i)
            threads.emplace_back(body, i);
        {
            std::unique_lock lock(mutex);
            done.wait(lock, [&] { return outcome.winner.has_value() || finished == workers.size(); });
            outcome.wallSeconds = secondsBetween(start, outcome.winner ? claimed : Clock::now());
        }
    }  // joins the losers
    if (outcome.winner)
        outcome.loserStopSeconds = secondsBetween(claimed, Clock::now());
    return outcome;
}

}  // namespace thunder
