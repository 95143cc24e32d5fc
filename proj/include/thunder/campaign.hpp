#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "thunder/environment.hpp"
#include "thunder/lightning.hpp"
#include "thunder/thunder.hpp"

namespace thunder
{

enum class CampaignMode
{
    Thunder,
    Lightning,
    Scratch
};

const char *toString(CampaignMode mode);
CampaignMode campaignModeFromString(const std::string &name);

struct CampaignSpec
{
    std::string environmentSet = "point2d-five";
    /// Environment description file; replaces the built-in set when non-empty.
    std::string environmentFile;
    /// Fixed environment id; empty draws one uniformly per problem.
    std::string environmentId;
    std::size_t problems = 2000;
    double budget = 10.0;
    CampaignMode mode = CampaignMode::Thunder;
    std::uint64_t seed = 1;
    /// Empty keeps everything in memory.
    std::string outputDir;
    std::optional<Config> start;

    /// Planner knobs shared by all modes; scratch mode ignores the database fields. Campaigns
    /// default to the logical clock so a config and seed reproduce the metrics exactly.
    ThunderConfig planner{.deterministic = true};
    double dtwThreshold = 4.0;
    std::size_t lightningCandidates = 10;
    /// Racing workers in scratch-only mode.
    std::size_t scratchOnlyWorkers = 2;
    /// Wait for background insertion after each problem so runs are reproducible.
    bool drainEachProblem = true;
    double histogramBucket = 0.1;

    void validate() const;
};

/// Applies one `key = value` setting; throws Error on an unknown key or bad value.
void applyCampaignSetting(CampaignSpec &spec, const std::string &key, const std::string &value);
/// Reads `key = value` lines ('#' starts a comment).
void loadCampaignConfig(std::istream &in, CampaignSpec &spec);
void loadCampaignConfigFile(const std::string &path, CampaignSpec &spec);
void writeCampaignConfig(std::ostream &out, const CampaignSpec &spec);

struct MetricsRow
{
    std::size_t problem = 0;
    std::string environment;
    std::string solver;
    double wallTime = 0.0;
    double pathLength = 0.0;
    std::size_t dbNodes = 0;
    std::size_t dbEdges = 0;
    std::uint64_t dbBytes = 0;
    bool recall = false;
    bool discarded = false;
};

inline constexpr const char *kMetricsHeader =
    "problem,environment,solver,wall_time_s,path_length,db_nodes,db_edges,db_bytes,recall,discarded";

void writeMetricsRow(std::ostream &out, const MetricsRow &row);
void writeMetricsCsv(std::ostream &out, const std::vector<MetricsRow> &rows);
/// Throws Error naming `source` when the header or a row does not match the schema.
std::vector<MetricsRow> parseMetricsCsv(std::istream &in, const std::string &source);
std::vector<MetricsRow> readMetricsCsv(const std::string &path);

/// Drives one campaign problem by problem. For lightning mode db_nodes counts stored paths
/// and db_edges counts their waypoints.
class CampaignRunner
{
public:
    explicit CampaignRunner(CampaignSpec spec);
    ~CampaignRunner();

    bool done() const
    {
        return next_ >= spec_.problems;
    }
    std::size_t nextIndex() const
    {
        return next_;
    }
    /// Problem `i` of the stream; a pure function of the spec.
    PlanningProblem problem(std::size_t i) const;
    const Environment &environmentFor(const PlanningProblem &problem) const;

    /// Solves the next problem, feeds the database and returns its row.
    MetricsRow step();
    const PlanResult &lastResult() const
    {
        return last_;
    }

    const CampaignSpec &spec() const
    {
        return spec_;
    }
    const EnvironmentSet &environments() const
    {
        return envs_;
    }
    const Config &start() const
    {
        return start_;
    }
    /// Null unless the mode uses it.
    Thunder *thunder()
    {
        return thunder_.get();
    }
    Lightning *lightning()
    {
        return lightning_.get();
    }
    Thunder *scratch()
    {
        return scratch_.get();
    }

    /// Writes the final database (if any) to `path`; returns bytes written.
    std::uint64_t saveDatabase(const std::string &path) const;
    std::string databaseFileName() const;

private:
    std::uint64_t databaseBytes() const;

    CampaignSpec spec_;
    EnvironmentSet envs_;
    Config start_;
    std::size_t next_ = 0;
    PlanResult last_;
    std::unique_ptr<Thunder> thunder_;
    std::unique_ptr<Lightning> lightning_;
    std::unique_ptr<Thunder> scratch_;
};

struct CampaignOutput
{
    std::vector<MetricsRow> rows;
    std::string metricsPath;
    std::string databasePath;
};

/// Runs every problem; when spec.outputDir is set, writes metrics.csv, campaign.cfg and the
/// final database there. The directory is checked before any planning starts.
CampaignOutput runCampaign(const CampaignSpec &spec);

}  // namespace thunder
