#pragma once

#include <cstdint>
#include <vector>

#include "cuh/encode.hpp"

namespace cuh {

struct SearchHit {
  Index id = 0;
  int distance = 0;
};

// Hits sorted by (distance, id) ascending.
using SearchResult = std::vector<SearchHit>;

// Number of differing bits. Padding bits are zero on both sides so they
// never contribute. Throws DimensionError on code-length mismatch.
int hamming_distance(const QueryCode& a, const QueryCode& b);

// Top-k by Hamming distance with (distance, id) ascending tie-break;
// k > count returns the complete ranking. Single linear popcount scan with
// a bounded heap. Throws std::invalid_argument for k < 1 or an empty
// database, DimensionError on code-length mismatch.
SearchResult search_topk(const PackedCodeMatrix& db, const QueryCode& query,
                         Index k);

// All items with distance <= radius, sorted by (distance, id).
SearchResult search_radius(const PackedCodeMatrix& db, const QueryCode& query,
                           int radius);

}  // namespace cuh
