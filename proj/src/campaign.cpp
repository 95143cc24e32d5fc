#include "thunder/campaign.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace thunder
{

const char *toString(CampaignMode mode)
{
    switch (mode)
    {
        case CampaignMode::Thunder:
            return "thunder";
        case CampaignMode::Lightning:
            return "lightning";
        case CampaignMode::Scratch:
            return "scratch";
    }
    return "unknown";
}

CampaignMode campaignModeFromString(const std::string &name)
{
    if (name == "thunder")
        return CampaignMode::Thunder;
    if (name == "lightning")
        return CampaignMode::Lightning;
    if (name == "scratch")
        return CampaignMode::Scratch;
    throw Error("unknown mode '" + name + "' (valid: thunder, lightning, scratch)");
}

void CampaignSpec::validate() const
{
    if (problems == 0)
        throw Error("problem count must be positive");
    if (!(budget > 0.0))
        throw Error("budget must be positive");
    if (!(histogramBucket > 0.0))
        throw Error("histogram bucket width must be positive");
    if (scratchOnlyWorkers == 0)
        throw Error("scratch-only mode needs at least one worker");
    if (lightningCandidates == 0)
        throw Error("lightning candidate count must be positive");
    planner.validate();
}

namespace
{
std::string trim(const std::string &s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

template <typename T>
T parseNumber(const std::string &key, const std::string &value)
{
    T out{};
    const char *end = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end)
        throw Error("bad value '" + value + "' for " + key);
    return out;
}

bool parseBool(const std::string &key, const std::string &value)
{
    if (value == "true" || value == "1" || value == "yes" || value == "on")
        return true;
    if (value == "false" || value == "0" || value == "no" || value == "off")
        return false;
    throw Error("bad value '" + value + "' for " + key);
}

Config parseConfigList(const std::string &key, const std::string &value)
{
    std::vector<double> coords;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ','))
        coords.push_back(parseNumber<double>(key, trim(item)));
    if (coords.empty())
        throw Error("empty value for " + key);
    return Config(std::move(coords));
}

std::string formatDouble(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
}  // namespace

void applyCampaignSetting(CampaignSpec &spec, const std::string &key, const std::string &value)
{
    auto &p = spec.planner;
    if (key == "mode")
        spec.mode = campaignModeFromString(value);
    else if (key == "envset")
        spec.environmentSet = value;
    else if (key == "envfile")
        spec.environmentFile = value;
    else if (key == "env")
        spec.environmentId = value;
    else if (key == "problems")
        spec.problems = parseNumber<std::size_t>(key, value);
    else if (key == "budget")
        spec.budget = parseNumber<double>(key, value);
    else if (key == "seed")
        spec.seed = parseNumber<std::uint64_t>(key, value);
    else if (key == "out")
        spec.outputDir = value;
    else if (key == "start")
        spec.start = parseConfigList(key, value);
    else if (key == "delta_fraction")
        p.deltaFraction = parseNumber<double>(key, value);
    else if (key == "stretch")
        p.stretch = parseNumber<double>(key, value);
    else if (key == "collision_resolution")
        p.collisionResolution = parseNumber<double>(key, value);
    else if (key == "smoothing_rounds")
        p.smoothingRounds = parseNumber<unsigned>(key, value);
    else if (key == "candidate_pair_cap")
        p.candidatePairCap = parseNumber<std::size_t>(key, value);
    else if (key == "insertion_queue_capacity")
        p.insertionQueueCapacity = parseNumber<std::size_t>(key, value);
    else if (key == "rrt_range")
        p.rrtRange = parseNumber<double>(key, value);
    else if (key == "scratch_workers")
        p.scratchWorkers = parseNumber<std::size_t>(key, value);
    else if (key == "scratch_only_workers")
        spec.scratchOnlyWorkers = parseNumber<std::size_t>(key, value);
    else if (key == "deterministic")
        p.deterministic = parseBool(key, value);
    else if (key == "checks_per_second")
        p.checksPerSecond = parseNumber<double>(key, value);
    else if (key == "dtw_threshold")
        spec.dtwThreshold = parseNumber<double>(key, value);
    else if (key == "lightning_candidates")
        spec.lightningCandidates = parseNumber<std::size_t>(key, value);
    else if (key == "drain_each_problem")
        spec.drainEachProblem = parseBool(key, value);
    else if (key == "histogram_bucket")
        spec.histogramBucket = parseNumber<double>(key, value);
    else
        throw Error("unknown setting '" + key + "'");
}

void loadCampaignConfig(std::istream &in, CampaignSpec &spec)
{
    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line))
    {
        ++lineNo;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error("line " + std::to_string(lineNo) + ": expected key = value");
        try
        {
            applyCampaignSetting(spec, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
        catch (const Error &e)
        {
            throw Error("line " + std::to_string(lineNo) + ": " + e.what());
        }
    }
}

void loadCampaignConfigFile(const std::string &path, CampaignSpec &spec)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot read config '" + path + "'");
    loadCampaignConfig(in, spec);
}

void writeCampaignConfig(std::ostream &out, const CampaignSpec &spec)
{
    const auto &p = spec.planner;
    out << "mode = " << toString(spec.mode) << '\n';
    out << "envset = " << spec.environmentSet << '\n';
    if (!spec.environmentFile.empty())
        out << "envfile = " << spec.environmentFile << '\n';
    if (!spec.environmentId.empty())
        out << "env = " << spec.environmentId << '\n';
    out << "problems = " << spec.problems << '\n';
    out << "budget = " << formatDouble(spec.budget) << '\n';
    out << "seed = " << spec.seed << '\n';
    if (spec.start)
    {
        out << "start = ";
        for (std::size_t i = 0; i < spec.start->dimension(); ++i)
            out << (i ? "," : "") << formatDouble((*spec.start)[i]);
        out << '\n';
    }
    out << "delta_fraction = " << formatDouble(p.deltaFraction) << '\n';
    out << "stretch = " << formatDouble(p.stretch) << '\n';
    out << "collision_resolution = " << formatDouble(p.collisionResolution) << '\n';
    out << "smoothing_rounds = " << p.smoothingRounds << '\n';
    out << "candidate_pair_cap = " << p.candidatePairCap << '\n';
    out << "insertion_queue_capacity = " << p.insertionQueueCapacity << '\n';
    out << "rrt_range = " << formatDouble(p.rrtRange) << '\n';
    out << "scratch_workers = " << p.scratchWorkers << '\n';
    out << "scratch_only_workers = " << spec.scratchOnlyWorkers << '\n';
    out << "deterministic = " << (p.deterministic ? "true" : "false") << '\n';
    out << "checks_per_second = " << formatDouble(p.checksPerSecond) << '\n';
    out << "dtw_threshold = " << formatDouble(spec.dtwThreshold) << '\n';
    out << "lightning_candidates = " << spec.lightningCandidates << '\n';
    out << "drain_each_problem = " << (spec.drainEachProblem ? "true" : "false") << '\n';
    out << "histogram_bucket = " << formatDouble(spec.histogramBucket) << '\n';
}

void writeMetricsRow(std::ostream &out, const MetricsRow &row)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, "%zu,%s,%s,%.9f,%.6f,%zu,%zu,%llu,%d,%d\n", row.problem, row.environment.c_str(),
                  row.solver.c_str(), row.wallTime, row.pathLength, row.dbNodes, row.dbEdges,
                  static_cast<unsigned long long>(row.dbBytes), row.recall ? 1 : 0, row.discarded ? 1 : 0);
    out << buf;
}

void writeMetricsCsv(std::ostream &out, const std::vector<MetricsRow> &rows)
{
    out << kMetricsHeader << '\n';
    for (const auto &r : rows)
        writeMetricsRow(out, r);
}

std::vector<MetricsRow> parseMetricsCsv(std::istream &in, const std::string &source)
{
    std::string line;
    if (!std::getline(in, line) || trim(line) != kMetricsHeader)
        throw Error("'" + source + "' is not a metrics file (header mismatch)");
    std::vector<MetricsRow> rows;
    std::size_t lineNo = 1;
    while (std::getline(in, line))
    {
        ++lineNo;
        line = trim(line);
        if (line.empty())
            continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string item;
        while (std::getline(ss, item, ','))
            f.push_back(item);
        const auto where = "'" + source + "' line " + std::to_string(lineNo);
        if (f.size() != 10)
            throw Error(where + ": expected 10 columns, found " + std::to_string(f.size()));
        try
        {
            MetricsRow r;
            r.problem = parseNumber<std::size_t>("problem", f[0]);
            r.environment = f[1];
            r.solver = f[2];
            r.wallTime = parseNumber<double>("wall_time_s", f[3]);
            r.pathLength = parseNumber<double>("path_length", f[4]);
            r.dbNodes = parseNumber<std::size_t>("db_nodes", f[5]);
            r.dbEdges = parseNumber<std::size_t>("db_edges", f[6]);
            r.dbBytes = parseNumber<std::uint64_t>("db_bytes", f[7]);
            r.recall = parseBool("recall", f[8]);
            r.discarded = parseBool("discarded", f[9]);
            rows.push_back(std::move(r));
        }
        catch (const Error &e)
        {
            throw Error(where + ": " + e.what());
        }
    }
    return rows;
}

std::vector<MetricsRow> readMetricsCsv(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot read metrics file '" + path + "'");
    return parseMetricsCsv(in, path);
}

namespace
{
Config commonStart(const EnvironmentSet &envs, std::uint64_t seed)
{
    Rng rng(mixSeed(seed, 0x57a7));
    for (int attempt = 0; attempt < 10000; ++attempt)
    {
        Config q = envs.front().space().sampleUniform(rng);
        bool ok = true;
        for (const auto &env : envs)
            ok = ok && env.isStateValid(q);
        if (ok)
            return q;
    }
    throw Error("no start state is valid in every environment");
}
}  // namespace

CampaignRunner::CampaignRunner(CampaignSpec spec) : spec_(std::move(spec))
{
    spec_.validate();
    const bool fromFile = !spec_.environmentFile.empty();
    envs_ = fromFile ? loadEnvironmentSet(spec_.environmentFile) : builtinEnvironmentSet(spec_.environmentSet);
    if (envs_.empty())
        throw Error("environment set is empty");
    if (!spec_.environmentId.empty())
        findEnvironment(envs_, spec_.environmentId);  // throws on unknown id
    for (const auto &env : envs_)
        if (env.space().dimension() != envs_.front().space().dimension())
            throw Error("environments in one set must share a dimension");

    if (spec_.start)
        start_ = *spec_.start;
    else if (!fromFile)
        start_ = builtinStart(spec_.environmentSet);
    else
        start_ = commonStart(envs_, spec_.seed);
    for (const auto &env : envs_)
        if (start_.dimension() != env.space().dimension() || !env.isStateValid(start_))
            throw Error("start state is not valid in environment '" + env.id() + "'");

    const Environment &reference = envs_.front();
    ThunderConfig cfg = spec_.planner;
    cfg.seed = mixSeed(spec_.seed, 0x7d);
    switch (spec_.mode)
    {
        case CampaignMode::Thunder:
            thunder_ = std::make_unique<Thunder>(reference, cfg);
            break;
        case CampaignMode::Scratch:
            cfg.enableRecall = false;
            cfg.enableScratch = true;
            cfg.scratchWorkers = spec_.scratchOnlyWorkers;
            scratch_ = std::make_unique<Thunder>(reference, cfg);
            break;
        case CampaignMode::Lightning: {
            LightningConfig lc;
            lc.dtwThreshold = spec_.dtwThreshold;
            lc.candidatePaths = spec_.lightningCandidates;
            lc.collisionResolution = cfg.collisionResolution;
            lc.smoothingRounds = cfg.smoothingRounds;
            lc.seed = cfg.seed;
            lc.rrtRange = cfg.rrtRange;
            lc.enableScratch = cfg.enableScratch;
            lc.enableRecall = cfg.enableRecall;
            lc.scratchWorkers = cfg.scratchWorkers;
            lc.deterministic = cfg.deterministic;
            lc.checksPerSecond = cfg.checksPerSecond;
            lightning_ = std::make_unique<Lightning>(reference, lc);
            break;
        }
    }
}

CampaignRunner::~CampaignRunner() = default;

PlanningProblem CampaignRunner::problem(std::size_t i) const
{
    const std::uint64_t s = mixSeed(spec_.seed, i);
    const Environment &env = spec_.environmentId.empty() ? envs_[mixSeed(s, 0xe0) % envs_.size()]
                                                         : findEnvironment(envs_, spec_.environmentId);
    PlanningProblem p = randomGoalProblem(env, start_, s);
    p.timeBudget = spec_.budget;
    return p;
}

const Environment &CampaignRunner::environmentFor(const PlanningProblem &p) const
{
    return findEnvironment(envs_, p.environmentId);
}

std::uint64_t CampaignRunner::databaseBytes() const
{
    if (thunder_)
        return serializeRoadmap(*thunder_->database()).size();
    if (lightning_)
        return lightning_->store()->serializedBytes();
    return 0;
}

MetricsRow CampaignRunner::step()
{
    if (done())
        throw Error("campaign has no problems left");
    const std::size_t i = next_++;
    const PlanningProblem p = problem(i);
    const Environment &env = environmentFor(p);

    if (thunder_)
        last_ = thunder_->solve(p, env);
    else if (lightning_)
        last_ = lightning_->solve(p, env);
    else
        last_ = scratch_->solve(p, env);

    // Storage happens after the timed solve, matching offline insertion.
    if (thunder_)
    {
        thunder_->submitExperience(last_);
        if (spec_.drainEachProblem)
            thunder_->drain();
    }
    else if (lightning_ && last_.ok())
        lightning_->submitExperience(last_);

    MetricsRow row;
    row.problem = i;
    row.environment = p.environmentId;
    row.discarded = !last_.ok();
    row.solver = row.discarded ? "none" : toString(last_.solver);
    row.wallTime = last_.wallTime;
    row.pathLength = row.discarded ? 0.0 : last_.path.length();
    row.recall = !row.discarded && isRecall(last_.solver);
    if (thunder_)
    {
        const auto stats = thunder_->snapshotStats();
        row.dbNodes = stats.nodes;
        row.dbEdges = stats.edges;
    }
    else if (lightning_)
    {
        const auto stats = lightning_->snapshotStats();
        row.dbNodes = stats.paths;
        row.dbEdges = stats.waypoints;
    }
    row.dbBytes = databaseBytes();
    return row;
}

std::string CampaignRunner::databaseFileName() const
{
    if (thunder_)
        return "thunder.db";
    if (lightning_)
        return "lightning.db";
    return {};
}

std::uint64_t CampaignRunner::saveDatabase(const std::string &path) const
{
    if (thunder_)
        return thunder_->saveDatabase(path);
    if (lightning_)
        return lightning_->saveStore(path);
    return 0;
}

CampaignOutput runCampaign(const CampaignSpec &spec)
{
    spec.validate();
    CampaignOutput output;
    std::ofstream metrics;
    if (!spec.outputDir.empty())
    {
        std::error_code ec;
        std::filesystem::create_directories(spec.outputDir, ec);
        output.metricsPath = (std::filesystem::path(spec.outputDir) / "metrics.csv").string();
        metrics.open(output.metricsPath, std::ios::trunc);
        if (!metrics)
            throw Error("cannot write to output directory '" + spec.outputDir + "'");
        metrics << kMetricsHeader << '\n';
    }

    CampaignRunner runner(spec);
    while (!runner.done())
    {
        output.rows.push_back(runner.step());
        if (metrics.is_open())
            writeMetricsRow(metrics, output.rows.back());
    }

    if (metrics.is_open())
    {
        metrics.flush();
        if (!metrics)
            throw Error("failed writing '" + output.metricsPath + "'");
        const auto dir = std::filesystem::path(spec.outputDir);
        std::ofstream cfg(dir / "campaign.cfg", std::ios::trunc);
        writeCampaignConfig(cfg, spec);
        if (const auto name = runner.databaseFileName(); !name.empty())
        {
            output.databasePath = (dir / name).string();
            runner.saveDatabase(output.databasePath);
        }
    }
    return output;
}

}  // namespace thunder
