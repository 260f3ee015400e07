#include "cuh/dataset.hpp"

#include <charconv>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace cuh {

void center(MultiViewDataset& data) {
  for (int k = 0; k < 2; ++k) {
    Matrix& x = data.views[k].data;
    const Vector mean = x.rowwise().mean();
    x.colwise() -= mean;
    data.means[k] = mean;
  }
}

MultiViewDataset synth_generate(const SynthConfig& cfg) {
  if (cfg.clusters < 1 || cfg.items < cfg.clusters) {
    throw std::invalid_argument("need items >= clusters >= 1");
  }
  if (cfg.d1 < 1 || cfg.d2 < 1) {
    throw std::invalid_argument("view dimensions must be >= 1");
  }
  if (!(cfg.noise >= 0.0)) {
    throw std::invalid_argument("noise must be >= 0");
  }
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // One prototype pair per cluster, entries O(1).
  Matrix proto1(cfg.d1, cfg.clusters);
  Matrix proto2(cfg.d2, cfg.clusters);
  for (int c = 0; c < cfg.clusters; ++c) {
    for (Index j = 0; j < cfg.d1; ++j) proto1(j, c) = gauss(rng);
    for (Index j = 0; j < cfg.d2; ++j) proto2(j, c) = gauss(rng);
  }

  MultiViewDataset data;
  data.views[0].data.resize(cfg.d1, cfg.items);
  data.views[1].data.resize(cfg.d2, cfg.items);
  std::vector<std::vector<int>> labels(
      static_cast<std::size_t>(cfg.items));
  for (Index i = 0; i < cfg.items; ++i) {
    const int c = static_cast<int>(i % cfg.clusters);  // round-robin planting
    for (Index j = 0; j < cfg.d1; ++j) {
      data.views[0].data(j, i) = proto1(j, c) + cfg.noise * gauss(rng);
    }
    for (Index j = 0; j < cfg.d2; ++j) {
      data.views[1].data(j, i) = proto2(j, c) + cfg.noise * gauss(rng);
    }
    labels[static_cast<std::size_t>(i)] = {c};
  }
  data.labels = std::move(labels);
  return data;
}

ViewMatrix load_csv(const std::string& path, char delimiter) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError(FormatError::Kind::Truncated, "cannot open " + path);
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    std::size_t col = 0;
    while (start <= line.size()) {
      std::size_t end = line.find(delimiter, start);
      if (end == std::string::npos) end = line.size();
      // trim surrounding spaces
      std::size_t a = start, b = end;
      while (a < b && (line[a] == ' ' || line[a] == '\t')) ++a;
      while (b > a && (line[b - 1] == ' ' || line[b - 1] == '\t')) --b;
      double value = 0.0;
      const auto res = std::from_chars(line.data() + a, line.data() + b,
                                       value);
      if (res.ec != std::errc() || res.ptr != line.data() + b) {
        throw FormatError(FormatError::Kind::Parse,
                          path + ": non-numeric cell at row " +
                              std::to_string(line_no) + ", column " +
                              std::to_string(col + 1));
      }
      row.push_back(value);
      ++col;
      if (end == line.size()) break;
      start = end + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw FormatError(FormatError::Kind::CountMismatch,
                        path + ": row " + std::to_string(line_no) + " has " +
                            std::to_string(row.size()) +
                            " columns, expected " +
                            std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw FormatError(FormatError::Kind::Truncated,
                      path + ": no data rows");
  }
  ViewMatrix view;
  view.data.resize(static_cast<Index>(rows.front().size()),
                   static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      view.data(static_cast<Index>(j), static_cast<Index>(i)) = rows[i][j];
    }
  }
  return view;
}

}  // namespace cuh
