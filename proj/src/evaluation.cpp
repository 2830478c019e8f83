#include "narrative/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "narrative/errors.hpp"

namespace narrative {

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  return static_cast<double>(common) / static_cast<double>(a.size() + b.size() - common);
}

SummaryStats summarize(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("summarize: no values");
  SummaryStats s;
  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  double sum = 0.0;
  for (double v : sorted) sum += v;
  s.mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (double v : sorted) ss += (v - s.mean) * (v - s.mean);
  s.std_dev = std::sqrt(ss / static_cast<double>(n));
  s.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  s.min = sorted.front();
  s.max = sorted.back();
  return s;
}

GroupReport evaluate_group(const WorldSpec& world, const GeneratedTrace& policy, const std::string& policy_trace_id,
                           const TraceGroup& g, int horizon, double beta) {
  if (g.members.empty()) throw EmptyGroup(g.group_id);
  GroupReport r;
  r.group_id = g.group_id;
  r.horizon = horizon;
  r.beta = beta;
  std::set<std::string> mine;
  for (int p : policy.plot_points_discovered) mine.insert(world.plot_points[p].id);
  std::vector<double> values;
  for (const auto& t : g.members) {
    const auto found = discovered_plot_points(world, t);
    const double j = jaccard(mine, std::set<std::string>(found.begin(), found.end()));
    r.similarities.push_back({policy_trace_id, t.trace_id, j});
    values.push_back(j);
  }
  r.stats = summarize(values);
  return r;
}

std::string group_reports_csv(const std::vector<GroupReport>& reports) {
  std::ostringstream out;
  out << "# std dev is the population standard deviation\n";
  out << "Group,Mean,Std. Dev,Median,Min,Max\n";
  out << std::fixed << std::setprecision(3);
  for (const auto& r : reports) {
    out << r.group_id << ',' << r.stats.mean << ',' << r.stats.std_dev << ',' << r.stats.median << ','
        << r.stats.min << ',' << r.stats.max << '\n';
  }
  return out.str();
}

std::vector<ConvergenceTable> export_convergence(const std::map<GridKey, TrainingRecord>& records) {
  if (records.empty()) throw std::invalid_argument("export_convergence: no records");
  std::vector<ConvergenceTable> out;
  for (const auto& [key, rec] : records) {
    // records are ordered by (group, horizon, beta)
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const ConvergenceTable& t) { return t.group == key.group && t.beta == key.beta; });
    if (it == out.end()) {
      out.push_back({key.group, key.beta, {}});
      it = out.end() - 1;
    }
    it->series.push_back({key.horizon, rec.log_likelihood});
  }
  for (auto& t : out)
    std::sort(t.series.begin(), t.series.end(), [](const auto& a, const auto& b) { return a.horizon < b.horizon; });
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::pair(a.group, a.beta) < std::pair(b.group, b.beta);
  });
  return out;
}

std::string convergence_csv(const ConvergenceTable& t) {
  std::ostringstream out;
  out << "iteration";
  std::size_t rows = 0;
  for (const auto& s : t.series) {
    out << ",h=" << s.horizon;
    rows = std::max(rows, s.log_likelihood.size());
  }
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < rows; ++i) {
    out << i;
    for (const auto& s : t.series) {
      out << ',';
      if (i < s.log_likelihood.size()) out << s.log_likelihood[i];
    }
    out << '\n';
  }
  return out.str();
}

int iterations_to_plateau(const std::vector<double>& series, double tolerance) {
  if (series.empty()) return 0;
  const double final = series.back();
  const double rise = std::abs(final - series.front());
  if (rise == 0.0) return 0;
  for (std::size_t i = 0; i < series.size(); ++i)
    if (std::abs(final - series[i]) <= tolerance * rise) return static_cast<int>(i);
  return static_cast<int>(series.size()) - 1;
}

std::string horizon_ordering_report(const std::vector<ConvergenceTable>& tables) {
  std::ostringstream out;
  out << "iterations to reach within 1% of the final log-likelihood\n";
  for (const auto& t : tables) {
    out << t.group << " beta=" << t.beta << ':';
    std::vector<int> its;
    for (const auto& s : t.series) {
      its.push_back(iterations_to_plateau(s.log_likelihood));
      out << " h=" << s.horizon << "->" << its.back();
    }
    const bool nonincreasing = std::is_sorted(its.rbegin(), its.rend());
    out << (nonincreasing ? "  larger h converges no slower" : "  ordering not monotone in h") << '\n';
  }
  return out.str();
}

std::string convergence_svg(const ConvergenceTable& t) {
  constexpr double W = 640, H = 400, L = 70, R = 110, T = 40, B = 50;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  std::size_t rows = 1;
  for (const auto& s : t.series) {
    for (double v : s.log_likelihood) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    rows = std::max(rows, s.log_likelihood.size());
  }
  if (!std::isfinite(lo)) lo = hi = 0.0;
  if (hi - lo < 1e-12) {
    hi += 0.5;
    lo -= 0.5;
  }
  auto x = [&](std::size_t i) { return L + (W - L - R) * (rows > 1 ? double(i) / double(rows - 1) : 0.0); };
  auto y = [&](double v) { return T + (H - T - B) * (hi - v) / (hi - lo); };
  static const char* colours[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
      << t.group << " (beta=" << t.beta << ")</text>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (std::size_t i = 0; i < rows; ++i)
    out << "<text x=\"" << x(i) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"10\">" << i << "</text>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    out << "<text x=\"" << L - 6 << "\" y=\"" << y(v) + 3 << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
        << "font-size=\"10\">" << v << "</text>\n";
  }
  out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">iteration</text>\n";
  out << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 16 " << (T + H - B) / 2
      << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">log-likelihood</text>\n";
  for (std::size_t si = 0; si < t.series.size(); ++si) {
    const auto& s = t.series[si];
    const char* c = colours[si % 6];
    out << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.log_likelihood.size(); ++i) out << x(i) << ',' << y(s.log_likelihood[i]) << ' ';
    out << "\"/>\n";
    out << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * (si + 1) << "\" fill=\"" << c
        << "\" font-family=\"sans-serif\" font-size=\"12\">h=" << s.horizon << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace narrative
