// Benchmark harness: campaigns, roadmap rendering and metric summaries.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "thunder/campaign.hpp"
#include "thunder/report.hpp"

namespace
{
using namespace thunder;

int runCommand(const std::string &configFile, const std::map<std::string, std::string> &settings)
{
    CampaignSpec spec;
    if (!configFile.empty())
        loadCampaignConfigFile(configFile, spec);
    for (const auto &[key, value] : settings)
        applyCampaignSetting(spec, key, value);
    spec.validate();
    if (spec.outputDir.empty())
        throw Error("--out is required");

    const CampaignOutput out = runCampaign(spec);
    std::size_t solved = 0, recalls = 0;
    for (const auto &r : out.rows)
    {
        solved += r.discarded ? 0 : 1;
        recalls += r.recall ? 1 : 0;
    }
    std::printf("%zu problems, %zu solved, %zu by recall\n", out.rows.size(), solved, recalls);
    std::printf("metrics: %s\n", out.metricsPath.c_str());
    if (!out.databasePath.empty())
        std::printf("database: %s\n", out.databasePath.c_str());
    return 0;
}
}  // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Experience-based motion planning benchmark harness"};
    app.require_subcommand(1);

    // run
    auto *run = app.add_subcommand("run", "Run a planning campaign");
    std::string configFile;
    std::map<std::string, std::string> settings;
    run->add_option("--config", configFile, "key = value settings file")->check(CLI::ExistingFile);
    struct Flag
    {
        const char *flag;
        const char *key;
        const char *help;
    };
    const Flag flags[] = {
        {"--mode", "mode", "thunder, lightning or scratch"},
        {"--envset", "envset", "built-in environment set"},
        {"--envfile", "envfile", "environment description file"},
        {"--env", "env", "fixed environment id (default: random per problem)"},
        {"--problems", "problems", "number of problems"},
        {"--budget", "budget", "per-problem time budget in seconds"},
        {"--seed", "seed", "campaign seed"},
        {"--out", "out", "output directory"},
        {"--start", "start", "comma-separated start state"},
        {"--delta-fraction", "delta_fraction", "sparse delta as a fraction of the space extent"},
        {"--stretch", "stretch", "stretch factor t"},
        {"--collision-resolution", "collision_resolution", "override the environment resolution"},
        {"--smoothing-rounds", "smoothing_rounds", "shortcutting rounds"},
        {"--candidate-pair-cap", "candidate_pair_cap", "endpoint candidates per side"},
        {"--insertion-queue-capacity", "insertion_queue_capacity", "pending insertions before dropping"},
        {"--rrt-range", "rrt_range", "RRT-Connect step (0: 5x resolution)"},
        {"--scratch-workers", "scratch_workers", "scratch workers racing recall"},
        {"--scratch-only-workers", "scratch_only_workers", "workers in scratch mode"},
        {"--deterministic", "deterministic", "count validity checks instead of seconds"},
        {"--checks-per-second", "checks_per_second", "logical clock rate"},
        {"--dtw-threshold", "dtw_threshold", "lightning storage filter"},
        {"--lightning-candidates", "lightning_candidates", "paths ranked per lightning query"},
        {"--drain-each-problem", "drain_each_problem", "wait for insertion after each problem"},
        {"--histogram-bucket", "histogram_bucket", "histogram bucket width in seconds"},
    };
    std::map<std::string, std::string> raw;
    for (const auto &f : flags)
        run->add_option(f.flag, raw[f.key], f.help);

    // render
    auto *render = app.add_subcommand("render", "Render a database file as SVG");
    std::string dbFile, envId, envSet = "point2d-five", envFile, svgOut;
    render->add_option("--db", dbFile, "roadmap or path store file")->required()->check(CLI::ExistingFile);
    render->add_option("--env", envId, "environment id")->required();
    render->add_option("--envset", envSet, "built-in environment set");
    render->add_option("--envfile", envFile, "environment description file")->check(CLI::ExistingFile);
    render->add_option("--out", svgOut, "output SVG")->required();

    // summarize
    auto *summarize = app.add_subcommand("summarize", "Compare metrics files");
    std::vector<std::string> files;
    std::string summaryOut;
    double bucket = 0.1;
    summarize->add_option("files", files, "metrics CSV files")->required()->check(CLI::ExistingFile);
    summarize->add_option("--out", summaryOut, "output directory")->required();
    summarize->add_option("--bucket", bucket, "histogram bucket width in seconds")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*run)
        {
            for (const auto &f : flags)
                if (run->count(f.flag) > 0)
                    settings[f.key] = raw[f.key];
            return runCommand(configFile, settings);
        }
        if (*render)
        {
            const EnvironmentSet envs = envFile.empty() ? builtinEnvironmentSet(envSet) : loadEnvironmentSet(envFile);
            renderDatabaseFile(dbFile, findEnvironment(envs, envId), svgOut);
            std::printf("wrote %s\n", svgOut.c_str());
            return 0;
        }
        if (*summarize)
        {
            const auto runs = summarizeFiles(files, bucket);
            std::filesystem::create_directories(summaryOut);
            const auto dir = std::filesystem::path(summaryOut);
            std::ofstream json(dir / "summary.json", std::ios::trunc);
            std::ofstream table(dir / "summary.txt", std::ios::trunc);
            if (!json || !table)
                throw Error("cannot write to '" + summaryOut + "'");
            json << summaryJson(runs);
            const std::string text = summaryTable(runs);
            table << text;
            std::cout << text;
            return 0;
        }
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
