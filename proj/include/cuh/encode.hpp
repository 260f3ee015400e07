#pragma once

#include <cstdint>
#include <vector>

#include "cuh/types.hpp"

namespace cuh {

// Binary codes packed 64 bits per word, LSB-first within each word;
// bit j of item i is code_at(i, j). +1 packs as bit 1, -1 as bit 0,
// padding bits in the last word stay 0.
struct PackedCodeMatrix {
  std::vector<std::uint64_t> words;  // count * words_per_item, item-major
  int code_length = 0;
  Index count = 0;

  int words_per_item() const { return (code_length + 63) / 64; }
  const std::uint64_t* item(Index i) const {
    return words.data() + static_cast<std::size_t>(i) * words_per_item();
  }
};

// One packed query code; padding bits zero.
struct QueryCode {
  std::vector<std::uint64_t> words;
  int code_length = 0;
};

PackedCodeMatrix pack(const BinaryCodeMatrix& codes);
BinaryCodeMatrix unpack(const PackedCodeMatrix& packed);

// Sign at item i, bit j: +1 or -1.
int code_at(const PackedCodeMatrix& packed, Index i, int j);

// Out-of-sample code for one modality (view 0 or 1): x is centered with the
// model's stored mean for that view (skipped when the model carries no
// means), projected, signed with sgn(0) = -1, and packed.
QueryCode encode_single(const CuhModel& model, int view, const Vector& x);

// Code from both modalities at once: sgn of the sum of the two centered
// projections.
QueryCode encode_dual(const CuhModel& model, const Vector& x1,
                      const Vector& x2);

// Column-wise encode_single over a whole view (items are columns).
PackedCodeMatrix encode_view(const CuhModel& model, int view,
                             const ViewMatrix& items);

// Column-wise encode_dual over paired views.
PackedCodeMatrix encode_both(const CuhModel& model, const ViewMatrix& v1,
                             const ViewMatrix& v2);

}  // namespace cuh
