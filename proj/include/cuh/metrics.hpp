#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cuh/search.hpp"

namespace cuh {

inline constexpr Index kDefaultRCut = 1000;

// True when database item `db_id` is relevant to query `query_id`
// (label-set intersection in the standard evaluation).
using RelevanceJudge = std::function<bool(Index query_id, Index db_id)>;

// Builds the shared-label judge over multi-label ground truth.
RelevanceJudge make_label_judge(const std::vector<std::vector<int>>& query_labels,
                                const std::vector<std::vector<int>>& db_labels);

// AP@R over a ranked list: (1/N_rel_in_topR) * sum_k P(k) delta(k) where the
// sum runs over the first min(R, size) ranks; 0 when no relevant item is
// retrieved in the top R.
double average_precision(const SearchResult& ranking, Index query_id,
                         const RelevanceJudge& judge, Index r_cut);

// Mean AP over queries; rankings[q] is the ranked list for query q.
double mean_ap(const std::vector<SearchResult>& rankings,
               const RelevanceJudge& judge, Index r_cut);

// precision@n for each n in `grid`, averaged over queries. Lists shorter
// than n contribute their own length as denominator floor: precision@n uses
// min(n, size) retrieved items.
std::vector<double> topn_precision(const std::vector<SearchResult>& rankings,
                                   const RelevanceJudge& judge,
                                   const std::vector<Index>& grid);

struct PrPoint {
  int radius = 0;
  double precision = 0.0;
  double recall = 0.0;
};

// Micro-averaged precision/recall per Hamming radius 0..max_radius, pooling
// counts over all queries. Precision is 1.0 when nothing is retrieved at a
// radius; recall is 1.0 when no relevant item exists at all.
std::vector<PrPoint> precision_recall(const std::vector<SearchResult>& rankings,
                                      const RelevanceJudge& judge,
                                      int max_radius);

struct EvalReport {
  double map = 0.0;
  std::vector<Index> topn_grid;
  std::vector<double> topn;
  std::vector<PrPoint> pr_by_radius;

  // pr_by_radius with duplicate recall values removed, keeping the first
  // (smallest-radius, hence highest-precision) point per distinct recall;
  // recall is then strictly increasing across the curve.
  std::vector<PrPoint> pr_curve() const;
};

EvalReport evaluate(const std::vector<SearchResult>& rankings,
                    const RelevanceJudge& judge, Index r_cut,
                    const std::vector<Index>& topn_grid, int max_radius);

// Tab-separated exports (header line + one row per point).
void write_topn_tsv(const std::string& path, const EvalReport& report);
void write_pr_tsv(const std::string& path, const EvalReport& report);

}  // namespace cuh
