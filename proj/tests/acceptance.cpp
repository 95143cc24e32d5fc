// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Campaigns run on the logical clock unless a criterion is about real elapsed time.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "thunder/campaign.hpp"

using namespace thunder;

namespace
{

int failures = 0;

void report(int id, bool pass, const std::string &detail)
{
    std::printf("CRITERION %d %s: %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass)
        ++failures;
}

std::string fmt(const char *f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double quantile(std::vector<double> v, double q)
{
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct Campaign
{
    std::vector<MetricsRow> rows;
    std::uint64_t fileBytes = 0;
    std::string dbPath;
    std::shared_ptr<const SparseRoadmap> roadmap;
};

struct Soundness
{
    std::size_t checked = 0;
    std::size_t violations = 0;

    void check(const PlanResult &r, const Environment &env)
    {
        if (!r.ok())
            return;
        ++checked;
        const bool ends = r.path.front() == r.problem.start && r.path.back() == r.problem.goal;
        if (!ends || !oracle::pathRevalidates(r.path.waypoints(), env.fullValidator(), env.resolution()))
            ++violations;
    }
};

const std::filesystem::path workDir = std::filesystem::temp_directory_path() / "thunder_acceptance";

Campaign runAndCheck(CampaignSpec spec, const std::string &tag, Soundness &sound)
{
    CampaignRunner runner(spec);
    Campaign out;
    while (!runner.done())
    {
        out.rows.push_back(runner.step());
        const PlanResult &r = runner.lastResult();
        sound.check(r, runner.environmentFor(r.problem));
    }
    out.dbPath = (workDir / (tag + "." + runner.databaseFileName())).string();
    out.fileBytes = runner.saveDatabase(out.dbPath);
    if (runner.thunder())
        out.roadmap = runner.thunder()->database();
    std::printf("  campaign %-18s %zu problems, final db %llu bytes\n", tag.c_str(), out.rows.size(),
                static_cast<unsigned long long>(out.fileBytes));
    return out;
}

double nodeRate(const std::vector<MetricsRow> &rows, std::size_t from, std::size_t to)
{
    const double before = from == 0 ? 0.0 : static_cast<double>(rows[from - 1].dbNodes);
    return (static_cast<double>(rows[to - 1].dbNodes) - before) / static_cast<double>(to - from);
}

double recallRate(const std::vector<MetricsRow> &rows, std::size_t from, std::size_t to)
{
    std::size_t hits = 0, counted = 0;
    for (std::size_t i = from; i < to; ++i)
    {
        if (rows[i].discarded)
            continue;
        ++counted;
        hits += rows[i].recall ? 1 : 0;
    }
    return counted ? static_cast<double>(hits) / static_cast<double>(counted) : 0.0;
}

double edgeWeightSum(const SparseRoadmap &roadmap, const std::vector<NodeId> &nodes)
{
    double cost = 0.0;
    for (std::size_t i = 1; i < nodes.size(); ++i)
        for (const auto &adj : roadmap.adjacent(nodes[i - 1]))
            if (adj.neighbor == nodes[i])
            {
                cost += roadmap.edges()[adj.edge].weight;
                break;
            }
    return cost;
}

std::vector<oracle::WeightedEdge> liveEdges(const SparseRoadmap &roadmap, const EdgeDisableSet *disabled)
{
    std::vector<oracle::WeightedEdge> out;
    for (EdgeId e = 0; e < roadmap.edgeCount(); ++e)
        if (!disabled || !disabled->contains(e))
            out.push_back({roadmap.edges()[e].a, roadmap.edges()[e].b, roadmap.edges()[e].weight});
    return out;
}

}  // namespace

int main()
{
    const auto t0 = std::chrono::steady_clock::now();
    std::filesystem::create_directories(workDir);
    const std::size_t kProblems = 2000;
    const std::size_t kWindow = 500;

    // Static narrow passage, fixed start, random goals; varying obstacles across the five-set.
    CampaignSpec narrow;
    narrow.environmentId = "narrow-passage";
    narrow.problems = kProblems;
    narrow.seed = 1;
    CampaignSpec varying;
    varying.problems = kProblems;
    varying.seed = 2;

    Soundness sound;
    CampaignSpec spec = narrow;
    spec.mode = CampaignMode::Thunder;
    const Campaign thunderNarrow = runAndCheck(spec, "thunder-narrow", sound);
    spec.mode = CampaignMode::Lightning;
    const Campaign lightningNarrow = runAndCheck(spec, "lightning-narrow", sound);
    spec = varying;
    spec.mode = CampaignMode::Thunder;
    const Campaign thunderVarying = runAndCheck(spec, "thunder-varying", sound);
    spec.mode = CampaignMode::Lightning;
    const Campaign lightningVarying = runAndCheck(spec, "lightning-varying", sound);
    const std::size_t campaignChecked = sound.checked;

    const EnvironmentSet points = builtinEnvironmentSet("point2d-five");
    const Environment &narrowEnv = findEnvironment(points, "narrow-passage");
    CampaignSpec streamSpec = narrow;
    streamSpec.problems = kProblems + 1000;
    const CampaignRunner stream(streamSpec);

    // Real-time comparison on fresh problems from the same stream after warm-up.
    std::vector<double> thunderTimes, scratchTimes, thunderTotal, scratchTotal;
    {
        ThunderConfig warm;
        Thunder thunder(narrowEnv, warm);
        thunder.loadDatabase(thunderNarrow.dbPath);
        ThunderConfig scratchOnly;
        scratchOnly.enableRecall = false;
        scratchOnly.scratchWorkers = 2;
        Thunder scratch(narrowEnv, scratchOnly);
        for (std::size_t i = kProblems; i < kProblems + kWindow; ++i)
        {
            const PlanningProblem p = stream.problem(i);
            const PlanResult a = thunder.solve(p, narrowEnv);
            const PlanResult b = scratch.solve(p, narrowEnv);
            sound.check(a, narrowEnv);
            sound.check(b, narrowEnv);
            if (a.ok())
            {
                thunderTimes.push_back(a.wallTime);
                thunderTotal.push_back(a.wallTime + a.smoothingSeconds);
            }
            if (b.ok())
            {
                scratchTimes.push_back(b.wallTime);
                scratchTotal.push_back(b.wallTime + b.smoothingSeconds);
            }
        }
    }

    // 1
    report(1, sound.violations == 0 && sound.checked >= kProblems,
           fmt("%zu violations in %zu returned paths (%zu from thunder and lightning campaigns, %zu from "
               "real-time thunder and scratch-only)",
               sound.violations, sound.checked, campaignChecked, sound.checked - campaignChecked));

    // 2
    {
        const SparseRoadmap &roadmap = *thunderVarying.roadmap;
        std::size_t tested = 0, mismatches = 0, unreachable = 0;
        CampaignSpec qs = varying;
        qs.problems = 100000;
        const CampaignRunner queries(qs);
        for (std::size_t i = kProblems; tested < 100 && i < qs.problems; ++i)
        {
            const PlanningProblem p = queries.problem(i);
            const Environment &env = queries.environmentFor(p);
            const auto nearStart = connectEndpoints(p.start, roadmap, env.fullValidator(), env.resolution());
            const auto nearGoal = connectEndpoints(p.goal, roadmap, env.fullValidator(), env.resolution());
            if (nearStart.empty() || nearGoal.empty() || nearStart.front() == nearGoal.front() ||
                !roadmap.sameComponent(nearStart.front(), nearGoal.front()))
                continue;
            ++tested;
            EdgeValidityCache cache(roadmap, env.fullValidator(), env.resolution());
            EdgeDisableSet disabled;
            const auto path = lazySearch(roadmap, nearStart.front(), nearGoal.front(), cache, disabled);
            const double expect = oracle::dijkstra(roadmap.nodeCount(), liveEdges(roadmap, &disabled),
                                                   nearStart.front(), nearGoal.front());
            if (!path)
            {
                ++unreachable;
                mismatches += std::isinf(expect) ? 0 : 1;
                continue;
            }
            if (edgeWeightSum(roadmap, *path) != expect)
                ++mismatches;
        }
        report(2, tested == 100 && mismatches == 0,
               fmt("%zu/%zu lazy-search costs equal the Dijkstra oracle exactly (%zu with no live path)",
                   tested - mismatches, tested, unreachable));
    }

    // 3
    {
        const double first = nodeRate(thunderNarrow.rows, 0, kWindow);
        const double last = nodeRate(thunderNarrow.rows, kProblems - kWindow, kProblems);
        const double lightning = nodeRate(lightningNarrow.rows, kProblems - kWindow, kProblems);
        const bool pass = last < 0.2 && last < 0.1 * first && lightning >= 10.0 * last && lightning > 0.0;
        report(3, pass,
               fmt("thunder %.4f nodes/problem over the last %zu (first %zu: %.4f); lightning %.4f paths/problem",
                   last, kWindow, kWindow, first, lightning));
    }

    // 4
    {
        const double ratio = static_cast<double>(thunderVarying.fileBytes) / static_cast<double>(lightningVarying.fileBytes);
        report(4, ratio <= 0.2,
               fmt("thunder db %llu bytes vs lightning store %llu bytes: %.2f%%",
                   static_cast<unsigned long long>(thunderVarying.fileBytes),
                   static_cast<unsigned long long>(lightningVarying.fileBytes), 100.0 * ratio));
    }

    // 5
    {
        const double t = recallRate(thunderNarrow.rows, kProblems - kWindow, kProblems);
        const double l = recallRate(lightningNarrow.rows, kProblems - kWindow, kProblems);
        report(5, t >= 0.8 && t > l, fmt("recall over the last %zu: thunder %.3f, lightning %.3f", kWindow, t, l));
    }

    // 6
    {
        const double tm = thunderTimes.empty() ? INFINITY : quantile(thunderTimes, 0.5);
        const double sm = scratchTimes.empty() ? INFINITY : quantile(scratchTimes, 0.5);
        report(6, tm <= 0.5 * sm,
               fmt("median time to solution %.3f ms vs scratch-only %.3f ms (ratio %.3f); with post-race "
                   "smoothing %.3f ms vs %.3f ms",
                   1e3 * tm, 1e3 * sm, tm / sm, 1e3 * quantile(thunderTotal, 0.5), 1e3 * quantile(scratchTotal, 0.5)));
    }

    // 7
    {
        SparseRoadmap roadmap = *thunderNarrow.roadmap;
        std::size_t connected = 0;
        const std::size_t kPaths = 200;
        for (std::size_t k = 0; k < kPaths; ++k)
        {
            const PlanningProblem p = stream.problem(kProblems + kWindow + k);
            RRTConnect rrt(narrowEnv.space(), narrowEnv.fullValidator(), {0.0, mixSeed(77, k)});
            const PlanOutcome out = rrt.solve(p.start, p.goal, {});
            Rng rng(mixSeed(78, k));
            const GeometricPath smoothed = smoothPath(out.path, narrowEnv.fullValidator(), narrowEnv.resolution(), 100, rng);
            SparsInserter inserter(roadmap, narrowEnv.invariantValidator(),
                                   {.resolution = narrowEnv.resolution(), .seed = mixSeed(79, k)});
            connected += inserter.insertExperiencePath(smoothed).startGoalConnected ? 1 : 0;
        }
        const double delta = 0.1 * narrowEnv.space().maximumExtent();
        const GeometricPath straight({Config{0.5, 5.0}, Config{9.3, 5.0}});
        SparseRoadmap naive(2, delta, 1.2), spaced(2, delta, 1.2);
        const InsertionReport inOrder =
            SparsInserter(naive, narrowEnv.invariantValidator(), {.resolution = narrowEnv.resolution()})
                .insertInOrder(straight);
        const InsertionReport withSpacing =
            SparsInserter(spaced, narrowEnv.invariantValidator(), {.resolution = narrowEnv.resolution()})
                .insertExperiencePath(straight);
        const double frac = static_cast<double>(connected) / static_cast<double>(kPaths);
        const bool pass = frac >= 0.9 && !inOrder.startGoalConnected && naive.componentCount() > 1 &&
                          withSpacing.startGoalConnected;
        report(7, pass,
               fmt("%zu/%zu smoothed scratch paths connected (%.1f%%); straight path in order: %zu guards in %zu "
                   "components, spaced: connected=%d",
                   connected, kPaths, 100.0 * frac, naive.nodeCount(), naive.componentCount(),
                   withSpacing.startGoalConnected ? 1 : 0));
    }

    // 8
    {
        const SparseRoadmap &roadmap = *thunderVarying.roadmap;
        const Environment &ref = points.front();
        const StateValidator invariant = ref.invariantValidator();
        std::vector<Config> nodes;
        for (const auto &n : roadmap.nodes())
            nodes.push_back(n.config);
        Rng rng(808);
        while (nodes.size() < roadmap.nodeCount() + 10000)
            if (Config q = ref.space().sampleUniform(rng); invariant(q))
                nodes.push_back(std::move(q));
        const oracle::DensePrm prm(nodes, roadmap.delta(), invariant, ref.resolution());
        const auto edges = liveEdges(roadmap, nullptr);
        std::uniform_int_distribution<NodeId> pick(0, roadmap.nodeCount() - 1);
        std::size_t within = 0, pairs = 0, attempts = 0;
        double worst = 0.0;
        while (pairs < 100 && ++attempts < 100000)
        {
            const NodeId a = pick(rng), b = pick(rng);
            if (a == b || !roadmap.sameComponent(a, b))
                continue;
            const double dense = prm.shortest(a, b);
            if (std::isinf(dense))
                continue;
            ++pairs;
            const double sparse = oracle::dijkstra(roadmap.nodeCount(), edges, a, b);
            worst = std::max(worst, sparse / dense);
            within += sparse <= roadmap.stretch() * dense ? 1 : 0;
        }
        report(8, pairs == 100 && within >= 95,
               fmt("%zu/%zu guard pairs within t=%.1f of the dense PRM (%zu nodes); worst ratio %.3f", within, pairs,
                   roadmap.stretch(), nodes.size(), worst));
    }

    // 9
    {
        Rng rng(909);
        std::uniform_real_distribution<double> len(0.05, 9.0), del(0.05, 2.0);
        std::size_t formulaBad = 0, spacingBad = 0, straightTested = 0;
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i)
        {
            const double l = len(rng), d = del(rng);
            const GuardSpacing s = computeGuardSpacing(l, d);
            const auto n = static_cast<std::size_t>(std::floor(l / (d * 1.0)));
            bool ok = s.intervals == n;
            if (n >= 1)
            {
                const double f = l / (static_cast<double>(n) * d);
                ok = ok && std::abs(s.factor - f) <= 1e-12 * f && s.factor >= 1.0 && s.factor < 2.0;
            }
            formulaBad += ok ? 0 : 1;
            if (n < 1)
                continue;
            ++straightTested;
            const GeometricPath path({Config{0.5, 1.0}, Config{0.5 + l, 1.0}});
            SparseRoadmap r(2, d, 1.2);
            SparsInserter(r, [](const Config &) { return true; }, {.resolution = 0.05, .seed = 3})
                .insertExperiencePath(path);
            std::vector<double> xs;
            for (const auto &node : r.nodes())
                if (node.type == GuardType::Coverage)
                    xs.push_back(node.config[0]);
            std::sort(xs.begin(), xs.end());
            bool spaced = xs.size() == s.intervals + 1;
            for (std::size_t k = 1; spaced && k < xs.size(); ++k)
            {
                const double err = std::abs((xs[k] - xs[k - 1]) - s.factor * d);
                worst = std::max(worst, err);
                spaced = err <= 1e-9;
            }
            spacingBad += spaced ? 0 : 1;
        }
        report(9, formulaBad == 0 && spacingBad == 0,
               fmt("1000 (l, delta) pairs: %zu formula mismatches; %zu straight paths, %zu spacing errors (max %.2e)",
                   formulaBad, straightTested, spacingBad, worst));
    }

    // 10
    {
        const double ti = quantile(thunderTimes, 0.75) - quantile(thunderTimes, 0.25);
        const double si = quantile(scratchTimes, 0.75) - quantile(scratchTimes, 0.25);
        report(10, ti < si,
               fmt("IQR of time to solution %.3f ms vs scratch-only %.3f ms; with post-race smoothing %.3f vs %.3f ms",
                   1e3 * ti, 1e3 * si, 1e3 * (quantile(thunderTotal, 0.75) - quantile(thunderTotal, 0.25)),
                   1e3 * (quantile(scratchTotal, 0.75) - quantile(scratchTotal, 0.25))));
    }

    std::filesystem::remove_all(workDir);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%d of 10 criteria failed; %.1f s\n", failures, secs);
    return failures == 0 ? 0 : 1;
}
