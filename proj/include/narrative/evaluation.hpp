#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "narrative/traces.hpp"

namespace narrative {

/// |a & b| / |a | b|, with jaccard({}, {}) = 1.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

struct SummaryStats {
  double mean = 0.0;
  double std_dev = 0.0;  // population
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

/// Throws std::invalid_argument on an empty input.
SummaryStats summarize(const std::vector<double>& values);

struct SimilarityResult {
  std::string policy_trace_id;
  std::string player_trace_id;
  double jaccard = 0.0;
};

struct GroupReport {
  std::string group_id;
  int horizon = 0;
  double beta = 0.0;
  std::vector<SimilarityResult> similarities;
  SummaryStats stats;
};

/// Compares the policy trace's plot-point set with each member's (by replay).
/// Throws EmptyGroup.
GroupReport evaluate_group(const WorldSpec& world, const GeneratedTrace& policy, const std::string& policy_trace_id,
                           const TraceGroup& g, int horizon = 0, double beta = 0.0);

/// Group, Mean, Std. Dev, Median, Min, Max.
std::string group_reports_csv(const std::vector<GroupReport>& reports);

struct ConvergenceSeries {
  int horizon;
  std::vector<double> log_likelihood;
};

struct ConvergenceTable {
  std::string group;
  double beta;
  std::vector<ConvergenceSeries> series;  // ascending horizon
};

/// One table per (group, beta) from the grid records. Throws std::invalid_argument if empty.
std::vector<ConvergenceTable> export_convergence(const std::map<GridKey, TrainingRecord>& records);

/// iteration, h=<h1>, h=<h2>, ... ; shorter series leave blanks.
std::string convergence_csv(const ConvergenceTable& t);

/// First iteration whose value is within `tolerance` (relative to the total
/// rise) of the final value.
int iterations_to_plateau(const std::vector<double>& series, double tolerance = 0.01);

/// Text report of plateau iterations per horizon, and whether they decrease
/// with h, for every table.
std::string horizon_ordering_report(const std::vector<ConvergenceTable>& tables);

/// Line chart of a convergence table.
std::string convergence_svg(const ConvergenceTable& t);

}  // namespace narrative
