#include "cuh/search.hpp"

#include <algorithm>
#include <bit>
#include <queue>
#include <string>
#include <utility>

namespace cuh {

namespace {

int distance_words(const std::uint64_t* a, const std::uint64_t* b, int words) {
  int total = 0;
  for (int w = 0; w < words; ++w) total += std::popcount(a[w] ^ b[w]);
  return total;
}

void check_lengths(int a, int b) {
  if (a != b) {
    throw DimensionError("code lengths differ: " + std::to_string(a) +
                         " vs " + std::to_string(b));
  }
}

}  // namespace

int hamming_distance(const QueryCode& a, const QueryCode& b) {
  check_lengths(a.code_length, b.code_length);
  return distance_words(a.words.data(), b.words.data(),
                        static_cast<int>(a.words.size()));
}

SearchResult search_topk(const PackedCodeMatrix& db, const QueryCode& query,
                         Index k) {
  check_lengths(db.code_length, query.code_length);
  if (db.count == 0) throw std::invalid_argument("database is empty");
  if (k < 1) throw std::invalid_argument("k must be >= 1");

  // Max-heap of the k best (distance, id) pairs; the top is the current
  // worst, evicted whenever a strictly better pair appears.
  std::priority_queue<std::pair<int, Index>> heap;
  const int words = db.words_per_item();
  for (Index i = 0; i < db.count; ++i) {
    const int dist = distance_words(db.item(i), query.words.data(), words);
    if (static_cast<Index>(heap.size()) < k) {
      heap.emplace(dist, i);
    } else if (std::pair<int, Index>(dist, i) < heap.top()) {
      heap.pop();
      heap.emplace(dist, i);
    }
  }
  SearchResult hits(heap.size());
  for (auto it = hits.rbegin(); it != hits.rend(); ++it) {
    *it = SearchHit{heap.top().second, heap.top().first};
    heap.pop();
  }
  return hits;
}

SearchResult search_radius(const PackedCodeMatrix& db, const QueryCode& query,
                           int radius) {
  check_lengths(db.code_length, query.code_length);
  SearchResult hits;
  const int words = db.words_per_item();
  for (Index i = 0; i < db.count; ++i) {
    const int dist = distance_words(db.item(i), query.words.data(), words);
    if (dist <= radius) hits.push_back(SearchHit{i, dist});
  }
  std::sort(hits.begin(), hits.end(), [](const SearchHit& a,
                                         const SearchHit& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
  });
  return hits;
}

}  // namespace cuh
