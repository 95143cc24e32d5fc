#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "thunder/campaign.hpp"
#include "thunder/report.hpp"

using namespace thunder;
namespace fs = std::filesystem;

namespace
{
fs::path scratchDir(const std::string &name)
{
    const fs::path dir = fs::temp_directory_path() / ("thunder_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t countMatches(const std::string &text, const std::string &pattern)
{
    const std::regex re(pattern);
    return static_cast<std::size_t>(std::distance(std::sregex_iterator(text.begin(), text.end(), re), std::sregex_iterator()));
}

MetricsRow row(std::size_t i, double t, bool recall = false, bool discarded = false, std::size_t nodes = 0)
{
    MetricsRow r;
    r.problem = i;
    r.environment = "open";
    r.solver = discarded ? "none" : (recall ? "recall-exact" : "scratch");
    r.wallTime = t;
    r.pathLength = 1.0;
    r.dbNodes = nodes;
    r.recall = recall;
    r.discarded = discarded;
    return r;
}
}  // namespace

TEST_CASE("campaign settings validation")
{
    CampaignSpec spec;
    CHECK_NOTHROW(spec.validate());
    spec.problems = 0;
    CHECK_THROWS_AS(spec.validate(), Error);
    spec = {};
    applyCampaignSetting(spec, "mode", "lightning");
    applyCampaignSetting(spec, "budget", "2.5");
    applyCampaignSetting(spec, "start", "1,2");
    CHECK(spec.mode == CampaignMode::Lightning);
    CHECK(spec.budget == 2.5);
    CHECK(*spec.start == Config{1.0, 2.0});
    CHECK_THROWS_AS(applyCampaignSetting(spec, "budget", "soon"), Error);
    CampaignSpec negative;
    applyCampaignSetting(negative, "budget", "-1");
    CHECK_THROWS_AS(negative.validate(), Error);
    CHECK_THROWS_AS(applyCampaignSetting(spec, "nonsense", "1"), Error);
    CHECK_THROWS_AS(applyCampaignSetting(spec, "mode", "fast"), Error);

    std::stringstream cfg;
    writeCampaignConfig(cfg, spec);
    CampaignSpec back;
    loadCampaignConfig(cfg, back);
    CHECK(back.mode == spec.mode);
    CHECK(back.budget == spec.budget);
    CHECK(*back.start == *spec.start);
}

TEST_CASE("one scratch problem in an empty world")
{
    CampaignSpec spec;
    spec.environmentId = "open";
    spec.problems = 1;
    spec.mode = CampaignMode::Scratch;
    const auto out = runCampaign(spec);
    REQUIRE(out.rows.size() == 1);
    CHECK(out.rows[0].solver == "scratch");
    CHECK_FALSE(out.rows[0].recall);
    CHECK_FALSE(out.rows[0].discarded);
}

TEST_CASE("identical specs give byte-identical metrics")
{
    for (auto mode : {CampaignMode::Thunder, CampaignMode::Lightning, CampaignMode::Scratch})
    {
        CampaignSpec spec;
        spec.problems = 40;
        spec.mode = mode;
        spec.seed = 9;
        spec.outputDir = scratchDir("det_a").string();
        const auto a = runCampaign(spec);
        spec.outputDir = scratchDir("det_b").string();
        const auto b = runCampaign(spec);
        const std::string csvA = slurp(a.metricsPath);
        CHECK(csvA == slurp(b.metricsPath));
        CHECK(std::count(csvA.begin(), csvA.end(), '\n') == 41);
        CHECK(csvA.rfind(kMetricsHeader, 0) == 0);
        if (mode != CampaignMode::Scratch)
            CHECK(slurp(a.databasePath) == slurp(b.databasePath));
        std::istringstream in(csvA);
        CHECK(parseMetricsCsv(in, "x").size() == 40);
        fs::remove_all(fs::path(a.metricsPath).parent_path());
        fs::remove_all(fs::path(b.metricsPath).parent_path());
    }
}

TEST_CASE("unwritable output fails before planning")
{
    CampaignSpec spec;
    spec.problems = 5;
    const fs::path blocker = scratchDir("blocker");
    std::ofstream(blocker) << "file";
    spec.outputDir = (blocker / "sub").string();
    CHECK_THROWS_AS(runCampaign(spec), Error);
    fs::remove(blocker);
}

TEST_CASE("metrics round trip and schema errors name the file")
{
    std::vector<MetricsRow> rows{row(0, 0.25), row(1, 10.0, false, true), row(2, 0.001, true, false, 7)};
    std::stringstream buf;
    writeMetricsCsv(buf, rows);
    const auto back = parseMetricsCsv(buf, "mem");
    REQUIRE(back.size() == 3);
    CHECK(back[1].discarded);
    CHECK(back[1].solver == "none");
    CHECK(back[2].recall);
    CHECK(back[2].dbNodes == 7);

    std::istringstream wrongHeader("a,b,c\n1,2,3\n");
    try
    {
        parseMetricsCsv(wrongHeader, "runs/bad.csv");
        FAIL("accepted a bad header");
    }
    catch (const Error &e)
    {
        CHECK(std::string(e.what()).find("runs/bad.csv") != std::string::npos);
    }
    std::istringstream badRow(std::string(kMetricsHeader) + "\n1,open,scratch,x,1,0,0,0,0,0\n");
    try
    {
        parseMetricsCsv(badRow, "other.csv");
        FAIL("accepted a bad row");
    }
    catch (const Error &e)
    {
        CHECK(std::string(e.what()).find("other.csv") != std::string::npos);
    }
    const fs::path dir = scratchDir("schema");
    fs::create_directories(dir);
    std::ofstream(dir / "broken.csv") << "problem,solver\n";
    try
    {
        summarizeFiles({(dir / "broken.csv").string()});
        FAIL("accepted a bad file");
    }
    catch (const Error &e)
    {
        CHECK(std::string(e.what()).find("broken.csv") != std::string::npos);
    }
    fs::remove_all(dir);
}

TEST_CASE("summaries")
{
    std::vector<MetricsRow> rows;
    for (int i = 0; i < 5; ++i)
        rows.push_back(row(i, i + 1.0));
    const auto s = summarizeRows("x", rows, 1.0);
    CHECK(s.median == 3.0);
    CHECK(s.mean == 3.0);
    CHECK(s.q1 == 2.0);
    CHECK(s.q3 == 4.0);
    REQUIRE(s.histogram.size() >= 6);
    CHECK(s.histogram[1] == 1);
    CHECK(s.histogram[0] == 0);

    const auto one = summarizeRows("one", {row(0, 0.4, true, false, 12)});
    CHECK(one.median == 0.4);
    CHECK(one.minimum == 0.4);
    CHECK(one.maximum == 0.4);
    CHECK(one.recallRate == 1.0);
    CHECK(one.finalDbNodes == 12);

    // Discarded rows are excluded from the time aggregates.
    rows.push_back(row(5, 10.0, false, true));
    const auto withDiscard = summarizeRows("d", rows, 1.0);
    CHECK(withDiscard.median == 3.0);
    CHECK(withDiscard.discarded == 1);
    CHECK(withDiscard.problems == 6);

    // Saturating growth: trailing rate below leading rate.
    std::vector<MetricsRow> growth;
    for (std::size_t i = 0; i < 100; ++i)
        growth.push_back(row(i, 0.1, false, false, static_cast<std::size_t>(40.0 * std::sqrt(i))));
    const auto g = summarizeRows("g", growth, 0.1, 25);
    CHECK(g.trailingNodeRate < g.leadingNodeRate);

    const auto json = nlohmann::json::parse(summaryJson({s, g}));
    CHECK(json.size() == 2);
    CHECK(json[0]["wall_time_s"]["median"] == 3.0);
    // Pure function of the rows.
    const std::vector<MetricsRow> firstFive(rows.begin(), rows.begin() + 5);
    CHECK(summaryTable({s}) == summaryTable({summarizeRows("x", firstFive, 1.0)}));
    CHECK(summaryJson({s}) == summaryJson({summarizeRows("x", firstFive, 1.0)}));
}

TEST_CASE("svg rendering element counts")
{
    const auto envs = builtinEnvironmentSet("point2d-five");
    const Environment &narrow = findEnvironment(envs, "narrow-passage");
    SparseRoadmap empty(2, 1.4, 1.2);
    std::string svg = renderRoadmapSvg(empty, narrow);
    CHECK(countMatches(svg, "class=\"obstacle\"") == 2);
    CHECK(countMatches(svg, "<circle") == 0);
    CHECK(countMatches(svg, "<line") == 0);

    SparseRoadmap chain(2, 1.4, 1.2);
    chain.addNode(Config{1.0, 1.0}, GuardType::Coverage);
    chain.addNode(Config{2.0, 1.0}, GuardType::Connectivity);
    chain.addNode(Config{3.0, 1.0}, GuardType::Coverage);
    chain.addEdge(0, 1);
    chain.addEdge(1, 2);
    svg = renderRoadmapSvg(chain, narrow);
    CHECK(countMatches(svg, "<circle") == 3);
    CHECK(countMatches(svg, "<line") == 2);
    CHECK(countMatches(svg, "#f28e1c") >= 2);
    CHECK(countMatches(svg, "#1f5fbf") >= 1);

    Rng rng(1);
    SparseRoadmap big(2, 1.4, 1.2);
    for (int i = 0; i < 500; ++i)
        big.addNode(narrow.space().sampleUniform(rng), static_cast<GuardType>(i % 4));
    for (NodeId i = 1; i < 500; i += 2)
        big.addEdge(i - 1, i);
    svg = renderRoadmapSvg(big, narrow);
    CHECK(countMatches(svg, "<circle") == big.nodeCount());
    CHECK(countMatches(svg, "<line") == big.edgeCount());

    const auto arms = builtinEnvironmentSet("arm4-five");
    SparseRoadmap armMap(4, 0.6, 1.2);
    armMap.addNode(Config{1.5, 0.0, 0.0, 0.0}, GuardType::Coverage);
    CHECK(countMatches(renderRoadmapSvg(armMap, arms[1]), "<circle") == 1);
    CHECK_THROWS_AS(renderRoadmapSvg(armMap, narrow), Error);

    PathStore store(2);
    store.add(GeometricPath({Config{1.0, 1.0}, Config{2.0, 2.0}}));
    CHECK(countMatches(renderPathStoreSvg(store, narrow), "class=\"path\"") == 1);

    const fs::path dir = scratchDir("render");
    fs::create_directories(dir);
    saveRoadmap(chain, (dir / "a.db").string());
    savePathStore(store, (dir / "b.db").string());
    renderDatabaseFile((dir / "a.db").string(), narrow, (dir / "a.svg").string());
    renderDatabaseFile((dir / "b.db").string(), narrow, (dir / "b.svg").string());
    CHECK(countMatches(slurp(dir / "a.svg"), "<circle") == 3);
    CHECK(countMatches(slurp(dir / "b.svg"), "class=\"path\"") == 1);
    fs::remove_all(dir);
}
