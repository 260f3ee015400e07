#include "cuh/encode.hpp"

#include <algorithm>
#include <string>

namespace cuh {

namespace {

void pack_signs(const Vector& projected, std::uint64_t* out, int r) {
  const int words = (r + 63) / 64;
  std::fill(out, out + words, 0ULL);
  for (int j = 0; j < r; ++j) {
    if (projected(j) > 0.0) out[j / 64] |= 1ULL << (j % 64);
  }
}

Vector centered(const CuhModel& model, int view, const Vector& x) {
  const Index d = model.projections[static_cast<std::size_t>(view)].w.rows();
  if (x.size() != d) {
    throw DimensionError("query vector has " + std::to_string(x.size()) +
                         " entries, view " + std::to_string(view + 1) +
                         " expects " + std::to_string(d));
  }
  const Vector& mean = model.means[static_cast<std::size_t>(view)];
  if (mean.size() == 0) return x;  // model trained on pre-centered data
  return x - mean;
}

void check_view_id(int view) {
  if (view != 0 && view != 1) {
    throw std::invalid_argument("view id must be 0 or 1, got " +
                                std::to_string(view));
  }
}

}  // namespace

PackedCodeMatrix pack(const BinaryCodeMatrix& codes) {
  PackedCodeMatrix packed;
  packed.code_length = static_cast<int>(codes.length());
  packed.count = codes.count();
  const int wpi = packed.words_per_item();
  packed.words.assign(static_cast<std::size_t>(packed.count) * wpi, 0ULL);
  for (Index i = 0; i < packed.count; ++i) {
    std::uint64_t* item = packed.words.data() +
                          static_cast<std::size_t>(i) * wpi;
    for (int j = 0; j < packed.code_length; ++j) {
      if (codes.b(j, i) > 0.0) item[j / 64] |= 1ULL << (j % 64);
    }
  }
  return packed;
}

BinaryCodeMatrix unpack(const PackedCodeMatrix& packed) {
  BinaryCodeMatrix codes;
  codes.b.resize(packed.code_length, packed.count);
  for (Index i = 0; i < packed.count; ++i) {
    for (int j = 0; j < packed.code_length; ++j) {
      codes.b(j, i) = code_at(packed, i, j);
    }
  }
  return codes;
}

int code_at(const PackedCodeMatrix& packed, Index i, int j) {
  const std::uint64_t word = packed.item(i)[j / 64];
  return (word >> (j % 64)) & 1ULL ? 1 : -1;
}

QueryCode encode_single(const CuhModel& model, int view, const Vector& x) {
  check_view_id(view);
  const Vector projected =
      model.projections[static_cast<std::size_t>(view)].w.transpose() *
      centered(model, view, x);
  QueryCode code;
  code.code_length = static_cast<int>(projected.size());
  code.words.assign(static_cast<std::size_t>((code.code_length + 63) / 64),
                    0ULL);
  pack_signs(projected, code.words.data(), code.code_length);
  return code;
}

QueryCode encode_dual(const CuhModel& model, const Vector& x1,
                      const Vector& x2) {
  const Vector projected =
      model.projections[0].w.transpose() * centered(model, 0, x1) +
      model.projections[1].w.transpose() * centered(model, 1, x2);
  QueryCode code;
  code.code_length = static_cast<int>(projected.size());
  code.words.assign(static_cast<std::size_t>((code.code_length + 63) / 64),
                    0ULL);
  pack_signs(projected, code.words.data(), code.code_length);
  return code;
}

PackedCodeMatrix encode_view(const CuhModel& model, int view,
                             const ViewMatrix& items) {
  check_view_id(view);
  PackedCodeMatrix packed;
  packed.code_length =
      static_cast<int>(model.projections[static_cast<std::size_t>(view)]
                           .w.cols());
  packed.count = items.count();
  const int wpi = packed.words_per_item();
  packed.words.assign(static_cast<std::size_t>(packed.count) * wpi, 0ULL);
  for (Index i = 0; i < packed.count; ++i) {
    const QueryCode code = encode_single(model, view, items.data.col(i));
    std::copy(code.words.begin(), code.words.end(),
              packed.words.begin() + static_cast<std::size_t>(i) * wpi);
  }
  return packed;
}

PackedCodeMatrix encode_both(const CuhModel& model, const ViewMatrix& v1,
                             const ViewMatrix& v2) {
  if (v1.count() != v2.count()) {
    throw DimensionError("paired views disagree on item count");
  }
  PackedCodeMatrix packed;
  packed.code_length = static_cast<int>(model.projections[0].w.cols());
  packed.count = v1.count();
  const int wpi = packed.words_per_item();
  packed.words.assign(static_cast<std::size_t>(packed.count) * wpi, 0ULL);
  for (Index i = 0; i < packed.count; ++i) {
    const QueryCode code =
        encode_dual(model, v1.data.col(i), v2.data.col(i));
    std::copy(code.words.begin(), code.words.end(),
              packed.words.begin() + static_cast<std::size_t>(i) * wpi);
  }
  return packed;
}

}  // namespace cuh
