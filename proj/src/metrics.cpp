#include "cuh/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace cuh {

RelevanceJudge make_label_judge(
    const std::vector<std::vector<int>>& query_labels,
    const std::vector<std::vector<int>>& db_labels) {
  auto sorted = [](std::vector<std::vector<int>> sets) {
    for (auto& s : sets) std::sort(s.begin(), s.end());
    return sets;
  };
  // Two-pointer intersection over sorted copies.
  return [q = sorted(query_labels), d = sorted(db_labels)](Index query_id,
                                                           Index db_id) {
    const auto& a = q.at(static_cast<std::size_t>(query_id));
    const auto& b = d.at(static_cast<std::size_t>(db_id));
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
      if (a[i] == b[j]) return true;
      if (a[i] < b[j]) {
        ++i;
      } else {
        ++j;
      }
    }
    return false;
  };
}

double average_precision(const SearchResult& ranking, Index query_id,
                         const RelevanceJudge& judge, Index r_cut) {
  if (ranking.empty()) throw std::invalid_argument("empty ranking");
  if (r_cut < 1) throw std::invalid_argument("r_cut must be >= 1");
  const Index depth = std::min<Index>(r_cut, ranking.size());
  Index hits = 0;
  double sum = 0.0;
  for (Index rank = 1; rank <= depth; ++rank) {
    if (judge(query_id, ranking[static_cast<std::size_t>(rank - 1)].id)) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(rank);
    }
  }
  return hits == 0 ? 0.0 : sum / static_cast<double>(hits);
}

double mean_ap(const std::vector<SearchResult>& rankings,
               const RelevanceJudge& judge, Index r_cut) {
  if (rankings.empty()) throw std::invalid_argument("no queries");
  double total = 0.0;
  for (std::size_t q = 0; q < rankings.size(); ++q) {
    total += average_precision(rankings[q], static_cast<Index>(q), judge,
                               r_cut);
  }
  return total / static_cast<double>(rankings.size());
}

std::vector<double> topn_precision(const std::vector<SearchResult>& rankings,
                                   const RelevanceJudge& judge,
                                   const std::vector<Index>& grid) {
  std::vector<double> curve;
  curve.reserve(grid.size());
  for (Index n : grid) {
    if (n < 1) throw std::invalid_argument("top-n grid values must be >= 1");
    double total = 0.0;
    for (std::size_t q = 0; q < rankings.size(); ++q) {
      const SearchResult& ranking = rankings[q];
      const Index depth = std::min<Index>(n, ranking.size());
      if (depth == 0) continue;
      Index hits = 0;
      for (Index rank = 0; rank < depth; ++rank) {
        hits += judge(static_cast<Index>(q),
                      ranking[static_cast<std::size_t>(rank)].id);
      }
      total += static_cast<double>(hits) / static_cast<double>(depth);
    }
    curve.push_back(rankings.empty()
                        ? 0.0
                        : total / static_cast<double>(rankings.size()));
  }
  return curve;
}

std::vector<PrPoint> precision_recall(
    const std::vector<SearchResult>& rankings, const RelevanceJudge& judge,
    int max_radius) {
  if (max_radius < 0) throw std::invalid_argument("max_radius must be >= 0");
  // Pooled counts per radius bucket; each ranking must cover the whole
  // database for the recall denominator to be meaningful.
  std::vector<long long> retrieved(static_cast<std::size_t>(max_radius) + 1,
                                   0);
  std::vector<long long> relevant(static_cast<std::size_t>(max_radius) + 1, 0);
  long long total_relevant = 0;
  for (std::size_t q = 0; q < rankings.size(); ++q) {
    for (const SearchHit& hit : rankings[q]) {
      const bool rel = judge(static_cast<Index>(q), hit.id);
      total_relevant += rel;
      if (hit.distance <= max_radius) {
        ++retrieved[static_cast<std::size_t>(hit.distance)];
        relevant[static_cast<std::size_t>(hit.distance)] += rel;
      }
    }
  }
  std::vector<PrPoint> curve(static_cast<std::size_t>(max_radius) + 1);
  long long ret_cum = 0;
  long long rel_cum = 0;
  for (int rad = 0; rad <= max_radius; ++rad) {
    ret_cum += retrieved[static_cast<std::size_t>(rad)];
    rel_cum += relevant[static_cast<std::size_t>(rad)];
    PrPoint& pt = curve[static_cast<std::size_t>(rad)];
    pt.radius = rad;
    pt.precision = ret_cum == 0 ? 1.0
                                : static_cast<double>(rel_cum) /
                                      static_cast<double>(ret_cum);
    pt.recall = total_relevant == 0 ? 1.0
                                    : static_cast<double>(rel_cum) /
                                          static_cast<double>(total_relevant);
  }
  return curve;
}

std::vector<PrPoint> EvalReport::pr_curve() const {
  std::vector<PrPoint> out;
  for (const PrPoint& pt : pr_by_radius) {
    if (out.empty() || pt.recall > out.back().recall) out.push_back(pt);
  }
  return out;
}

EvalReport evaluate(const std::vector<SearchResult>& rankings,
                    const RelevanceJudge& judge, Index r_cut,
                    const std::vector<Index>& topn_grid, int max_radius) {
  EvalReport report;
  report.map = mean_ap(rankings, judge, r_cut);
  report.topn_grid = topn_grid;
  report.topn = topn_precision(rankings, judge, topn_grid);
  report.pr_by_radius = precision_recall(rankings, judge, max_radius);
  return report;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_topn_tsv(const std::string& path, const EvalReport& report) {
  std::ofstream out = open_out(path);
  out << "n\tprecision\n";
  for (std::size_t i = 0; i < report.topn_grid.size(); ++i) {
    out << report.topn_grid[i] << '\t' << fmt(report.topn[i]) << '\n';
  }
}

void write_pr_tsv(const std::string& path, const EvalReport& report) {
  std::ofstream out = open_out(path);
  out << "radius\tprecision\trecall\n";
  for (const PrPoint& pt : report.pr_by_radius) {
    out << pt.radius << '\t' << fmt(pt.precision) << '\t' << fmt(pt.recall)
        << '\n';
  }
}

}  // namespace cuh
