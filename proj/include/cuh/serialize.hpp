#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cuh/encode.hpp"
#include "cuh/types.hpp"

namespace cuh {

inline constexpr std::uint32_t kFormatVersion = 1;

// All three containers are little-endian binary with a 4-byte magic,
// u32 version, u64 dimensions, and f64 payloads in column-major order.
//   "CUHD"  dense view matrix (optionally with per-item label sets)
//   "CUHM"  trained model
//   "CUHB"  packed binary codes

void save_view(const std::string& path, const ViewMatrix& view);
ViewMatrix load_view(const std::string& path);

// Label file: plain text, one line per item, comma-separated label ids
// (an empty line is an empty label set).
void save_labels(const std::string& path,
                 const std::vector<std::vector<int>>& labels);
std::vector<std::vector<int>> load_labels(const std::string& path);

// Convenience loader for a paired dataset (+ optional labels). Does not
// center; callers decide.
MultiViewDataset load_dataset(const std::string& view1_path,
                              const std::string& view2_path,
                              const std::string& labels_path = {});

void save_model(const std::string& path, const CuhModel& model);
CuhModel load_model(const std::string& path);

void export_codes(const std::string& path, const PackedCodeMatrix& codes);
PackedCodeMatrix load_codes(const std::string& path);

}  // namespace cuh
