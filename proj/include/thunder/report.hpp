#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "thunder/campaign.hpp"
#include "thunder/environment.hpp"
#include "thunder/lightning.hpp"
#include "thunder/sparse_roadmap.hpp"

namespace thunder
{

/// Linear-interpolated quantile of an already sorted sample; q in [0, 1].
double quantileSorted(const std::vector<double> &sorted, double q);

struct RunSummary
{
    std::string label;
    std::size_t problems = 0;
    std::size_t solved = 0;
    std::size_t discarded = 0;
    /// Wall-time statistics over solved problems only.
    double median = 0.0;
    double mean = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double minimum = 0.0;
    double maximum = 0.0;
    /// Recall solves over solved problems.
    double recallRate = 0.0;
    double trailingRecallRate = 0.0;
    std::size_t finalDbNodes = 0;
    std::size_t finalDbEdges = 0;
    std::uint64_t finalDbBytes = 0;
    std::size_t window = 0;
    double leadingNodeRate = 0.0;
    double trailingNodeRate = 0.0;
    double bucketWidth = 0.1;
    /// counts[k] covers [k * bucketWidth, (k + 1) * bucketWidth).
    std::vector<std::size_t> histogram;
};

/// `window` 0 picks min(500, max(1, rows / 4)).
RunSummary summarizeRows(const std::string &label, const std::vector<MetricsRow> &rows, double bucketWidth = 0.1,
                         std::size_t window = 0);

std::string summaryJson(const std::vector<RunSummary> &runs);
std::string summaryTable(const std::vector<RunSummary> &runs);

/// Summarizes each file; the label is the mode from a campaign.cfg next to the file when
/// present, otherwise the file path.
std::vector<RunSummary> summarizeFiles(const std::vector<std::string> &paths, double bucketWidth = 0.1);

/// Roadmap nodes colored by guard type over the environment's obstacles.
std::string renderRoadmapSvg(const SparseRoadmap &roadmap, const Environment &env);
/// Stored paths as polylines.
std::string renderPathStoreSvg(const PathStore &store, const Environment &env);
/// Detects the file type from its magic bytes and writes the SVG.
void renderDatabaseFile(const std::string &dbPath, const Environment &env, const std::string &outPath);

}  // namespace thunder
