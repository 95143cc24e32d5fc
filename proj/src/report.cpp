#include "thunder/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "binary_io.hpp"

namespace thunder
{

double quantileSorted(const std::vector<double> &sorted, double q)
{
    if (sorted.empty())
        return 0.0;
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

RunSummary summarizeRows(const std::string &label, const std::vector<MetricsRow> &rows, double bucketWidth,
                         std::size_t window)
{
    if (!(bucketWidth > 0.0))
        throw Error("histogram bucket width must be positive");
    RunSummary s;
    s.label = label;
    s.bucketWidth = bucketWidth;
    s.problems = rows.size();
    if (rows.empty())
        return s;

    std::vector<double> times;
    std::size_t recalls = 0;
    for (const auto &r : rows)
    {
        if (r.discarded)
            continue;
        times.push_back(r.wallTime);
        recalls += r.recall ? 1 : 0;
    }
    s.solved = times.size();
    s.discarded = rows.size() - times.size();
    if (!times.empty())
    {
        std::sort(times.begin(), times.end());
        s.median = quantileSorted(times, 0.5);
        s.q1 = quantileSorted(times, 0.25);
        s.q3 = quantileSorted(times, 0.75);
        s.minimum = times.front();
        s.maximum = times.back();
        s.mean = std::accumulate(times.begin(), times.end(), 0.0) / static_cast<double>(times.size());
        s.recallRate = static_cast<double>(recalls) / static_cast<double>(times.size());
        for (double t : times)
        {
            const auto k = static_cast<std::size_t>(std::floor(t / bucketWidth));
            if (s.histogram.size() <= k)
                s.histogram.resize(k + 1, 0);
            ++s.histogram[k];
        }
    }

    s.finalDbNodes = rows.back().dbNodes;
    s.finalDbEdges = rows.back().dbEdges;
    s.finalDbBytes = rows.back().dbBytes;

    const std::size_t n = rows.size();
    s.window = window ? std::min(window, n) : std::min<std::size_t>(500, std::max<std::size_t>(1, n / 4));
    const double w = static_cast<double>(s.window);
    s.leadingNodeRate = static_cast<double>(rows[s.window - 1].dbNodes) / w;
    const double before = n > s.window ? static_cast<double>(rows[n - s.window - 1].dbNodes) : 0.0;
    s.trailingNodeRate = (static_cast<double>(rows.back().dbNodes) - before) / w;
    std::size_t trailingRecalls = 0;
    for (std::size_t i = n - s.window; i < n; ++i)
        trailingRecalls += rows[i].recall ? 1 : 0;
    s.trailingRecallRate = static_cast<double>(trailingRecalls) / w;
    return s;
}

std::string summaryJson(const std::vector<RunSummary> &runs)
{
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto &s : runs)
    {
        nlohmann::ordered_json j;
        j["label"] = s.label;
        j["problems"] = s.problems;
        j["solved"] = s.solved;
        j["discarded"] = s.discarded;
        j["wall_time_s"] = {{"median", s.median}, {"mean", s.mean}, {"q1", s.q1},
                            {"q3", s.q3},         {"min", s.minimum}, {"max", s.maximum}};
        j["recall_rate"] = s.recallRate;
        j["trailing_recall_rate"] = s.trailingRecallRate;
        j["db"] = {{"nodes", s.finalDbNodes}, {"edges", s.finalDbEdges}, {"bytes", s.finalDbBytes}};
        j["node_rate"] = {{"window", s.window}, {"leading", s.leadingNodeRate}, {"trailing", s.trailingNodeRate}};
        j["histogram"] = {{"bucket_width_s", s.bucketWidth}, {"counts", s.histogram}};
        out.push_back(std::move(j));
    }
    return out.dump(2) + "\n";
}

std::string summaryTable(const std::vector<RunSummary> &runs)
{
    std::ostringstream out;
    char buf[512];
    std::snprintf(buf, sizeof buf, "%-24s %8s %8s %10s %10s %10s %10s %8s %8s %10s %12s %9s %9s\n", "run", "problems",
                  "solved", "median_s", "mean_s", "q1_s", "q3_s", "recall", "tail_rc", "db_nodes", "db_bytes",
                  "lead_rate", "tail_rate");
    out << buf;
    for (const auto &s : runs)
    {
        std::snprintf(buf, sizeof buf, "%-24s %8zu %8zu %10.4f %10.4f %10.4f %10.4f %8.3f %8.3f %10zu %12llu %9.3f %9.3f\n",
                      s.label.c_str(), s.problems, s.solved, s.median, s.mean, s.q1, s.q3, s.recallRate,
                      s.trailingRecallRate, s.finalDbNodes, static_cast<unsigned long long>(s.finalDbBytes),
                      s.leadingNodeRate, s.trailingNodeRate);
        out << buf;
    }
    for (const auto &s : runs)
    {
        out << "\nwall-time histogram for " << s.label << " (" << s.bucketWidth << " s buckets)\n";
        for (std::size_t k = 0; k < s.histogram.size(); ++k)
        {
            if (s.histogram[k] == 0)
                continue;
            std::snprintf(buf, sizeof buf, "  [%7.2f, %7.2f) %zu\n", static_cast<double>(k) * s.bucketWidth,
                          static_cast<double>(k + 1) * s.bucketWidth, s.histogram[k]);
            out << buf;
        }
    }
    return out.str();
}

std::vector<RunSummary> summarizeFiles(const std::vector<std::string> &paths, double bucketWidth)
{
    if (paths.empty())
        throw Error("summarize needs at least one metrics file");
    std::vector<RunSummary> out;
    for (const auto &path : paths)
    {
        std::string label = path;
        const auto cfgPath = std::filesystem::path(path).parent_path() / "campaign.cfg";
        if (std::filesystem::exists(cfgPath))
        {
            CampaignSpec spec;
            loadCampaignConfigFile(cfgPath.string(), spec);
            label = std::string(toString(spec.mode)) + " (" + path + ")";
        }
        out.push_back(summarizeRows(label, readMetricsCsv(path), bucketWidth));
    }
    return out;
}

namespace
{
const char *guardColor(GuardType type)
{
    switch (type)
    {
        case GuardType::Coverage:
            return "#f28e1c";
        case GuardType::Connectivity:
            return "#1f5fbf";
        case GuardType::Interface:
            return "#2ca02c";
        case GuardType::Quality:
            return "#9467bd";
    }
    return "#000000";
}

/// Maps workspace coordinates into a y-up SVG canvas.
class Canvas
{
public:
    explicit Canvas(const Environment &env)
    {
        if (env.robot() == RobotKind::Arm)
        {
            const auto &arm = *env.arm();
            const double reach = std::accumulate(arm.linkLengths.begin(), arm.linkLengths.end(), 0.0);
            x0_ = arm.base.x - reach;
            y0_ = arm.base.y - reach;
            x1_ = arm.base.x + reach;
            y1_ = arm.base.y + reach;
        }
        else
        {
            if (env.space().dimension() != 2)
                throw Error("rendering needs a 2-D point robot or a planar arm");
            const auto &b = env.space().bounds();
            x0_ = b[0].low;
            x1_ = b[0].high;
            y0_ = b[1].low;
            y1_ = b[1].high;
        }
        scale_ = 600.0 / std::max(x1_ - x0_, y1_ - y0_);
    }

    double x(double wx) const
    {
        return (wx - x0_) * scale_;
    }
    double y(double wy) const
    {
        return (y1_ - wy) * scale_;
    }
    double len(double w) const
    {
        return w * scale_;
    }
    double width() const
    {
        return (x1_ - x0_) * scale_;
    }
    double height() const
    {
        return (y1_ - y0_) * scale_;
    }

private:
    double x0_ = 0, y0_ = 0, x1_ = 1, y1_ = 1, scale_ = 1;
};

void header(std::ostringstream &out, const Canvas &c, const Environment &env)
{
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.1f\" height=\"%.1f\" viewBox=\"0 0 %.1f %.1f\">\n",
                  c.width(), c.height(), c.width(), c.height());
    out << buf;
    out << "<rect class=\"background\" x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (const auto &o : env.obstacles())
    {
        if (const auto *d = std::get_if<Disc>(&o))
            std::snprintf(buf, sizeof buf, "<circle class=\"obstacle\" cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\" fill=\"#555555\"/>\n",
                          c.x(d->center.x), c.y(d->center.y), c.len(d->radius));
        else
        {
            const auto &b = std::get<Box>(o);
            std::snprintf(buf, sizeof buf,
                          "<rect class=\"obstacle\" x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"#555555\"/>\n",
                          c.x(b.min.x), c.y(b.max.y), c.len(b.max.x - b.min.x), c.len(b.max.y - b.min.y));
        }
        out << buf;
    }
}

void checkDimension(std::size_t dim, const Environment &env)
{
    if (dim != env.space().dimension())
        throw Error("database dimension " + std::to_string(dim) + " does not match environment '" + env.id() + "'");
    if (env.robot() == RobotKind::Point && dim != 2)
        throw Error("no projection rule for a " + std::to_string(dim) + "-D point robot");
}
}  // namespace

std::string renderRoadmapSvg(const SparseRoadmap &roadmap, const Environment &env)
{
    checkDimension(roadmap.dimension(), env);
    Canvas c(env);
    std::ostringstream out;
    header(out, c, env);
    char buf[256];
    for (const auto &e : roadmap.edges())
    {
        const Point2 a = env.projection(roadmap.node(e.a).config);
        const Point2 b = env.projection(roadmap.node(e.b).config);
        std::snprintf(buf, sizeof buf,
                      "<line class=\"edge\" x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#999999\" stroke-width=\"1\"/>\n",
                      c.x(a.x), c.y(a.y), c.x(b.x), c.y(b.y));
        out << buf;
    }
    for (const auto &n : roadmap.nodes())
    {
        const Point2 p = env.projection(n.config);
        std::snprintf(buf, sizeof buf, "<circle class=\"node %s\" cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\"/>\n",
                      toString(n.type), c.x(p.x), c.y(p.y), guardColor(n.type));
        out << buf;
    }
    out << "</svg>\n";
    return out.str();
}

std::string renderPathStoreSvg(const PathStore &store, const Environment &env)
{
    checkDimension(store.dimension(), env);
    Canvas c(env);
    std::ostringstream out;
    header(out, c, env);
    char buf[64];
    for (std::size_t i = 0; i < store.size(); ++i)
    {
        out << "<polyline class=\"path\" fill=\"none\" stroke=\"#1f5fbf\" stroke-opacity=\"0.4\" points=\"";
        for (const auto &q : store.path(i).waypoints())
        {
            const Point2 p = env.projection(q);
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", c.x(p.x), c.y(p.y));
            out << buf;
        }
        out << "\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

void renderDatabaseFile(const std::string &dbPath, const Environment &env, const std::string &outPath)
{
    bool ok = false;
    const auto bytes = detail::readFileBytes(dbPath, ok);
    if (!ok)
        throw Error("cannot read database '" + dbPath + "'");
    std::string svg;
    if (bytes.size() >= 4 && std::equal(bytes.begin(), bytes.begin() + 4, "LGHT"))
        svg = renderPathStoreSvg(deserializePathStore(bytes), env);
    else
        svg = renderRoadmapSvg(deserializeRoadmap(bytes), env);
    std::ofstream out(outPath, std::ios::trunc);
    if (!out || !(out << svg))
        throw Error("cannot write '" + outPath + "'");
}

}  // namespace thunder
