#pragma once

#include <cstdint>
#include <string>

#include "cuh/types.hpp"

namespace cuh {

// Subtracts per-dimension means in place and records them in data.means.
void center(MultiViewDataset& data);

struct SynthConfig {
  int clusters = 5;
  Index items = 1000;
  Index d1 = 64;
  Index d2 = 32;
  double noise = 0.1;
  std::uint64_t seed = 0;
};

// Cluster-structured paired views: per cluster, unit-norm centers are drawn
// for both views; item i of cluster c is center_c + noise * N(0, I) in each
// view, labels = {c}. Items are assigned round-robin so every cluster is
// populated. The result is not centered.
MultiViewDataset synth_generate(const SynthConfig& cfg);

// Numeric delimited text, one item per row, dims as columns; returns the
// transposed dims x items matrix. Ragged rows and non-numeric cells raise
// FormatError naming the offending row/column.
ViewMatrix load_csv(const std::string& path, char delimiter = ',');

}  // namespace cuh
