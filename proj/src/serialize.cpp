#include "cuh/serialize.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <string>

namespace cuh {

namespace {

// All binary payloads are explicitly little-endian; the byte loops keep the
// formats portable regardless of host order.

void put_u32(std::ostream& out, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>(v >> (8 * i));
  out.write(bytes, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>(v >> (8 * i));
  out.write(bytes, 8);
}

void put_f64(std::ostream& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

std::uint32_t get_u32(std::istream& in, const std::string& path) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
    throw FormatError(FormatError::Kind::Truncated,
                      path + ": unexpected end of file");
  }
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes[i]} << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& in, const std::string& path) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
    throw FormatError(FormatError::Kind::Truncated,
                      path + ": unexpected end of file");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes[i]} << (8 * i);
  return v;
}

double get_f64(std::istream& in, const std::string& path) {
  return std::bit_cast<double>(get_u64(in, path));
}

void put_matrix(std::ostream& out, const Matrix& m) {
  for (Index c = 0; c < m.cols(); ++c) {
    for (Index r = 0; r < m.rows(); ++r) put_f64(out, m(r, c));
  }
}

Matrix get_matrix(std::istream& in, Index rows, Index cols,
                  const std::string& path) {
  Matrix m(rows, cols);
  for (Index c = 0; c < cols; ++c) {
    for (Index r = 0; r < rows; ++r) m(r, c) = get_f64(in, path);
  }
  return m;
}

void put_vector(std::ostream& out, const Vector& v) {
  put_u64(out, static_cast<std::uint64_t>(v.size()));
  for (Index i = 0; i < v.size(); ++i) put_f64(out, v(i));
}

Vector get_vector(std::istream& in, const std::string& path) {
  const auto size = static_cast<Index>(get_u64(in, path));
  Vector v(size);
  for (Index i = 0; i < size; ++i) v(i) = get_f64(in, path);
  return v;
}

void put_magic(std::ostream& out, const char magic[5]) {
  out.write(magic, 4);
  put_u32(out, kFormatVersion);
}

void check_magic(std::istream& in, const char magic[5],
                 const std::string& path) {
  char found[4];
  if (!in.read(found, 4)) {
    throw FormatError(FormatError::Kind::Truncated,
                      path + ": file too short for a header");
  }
  if (std::memcmp(found, magic, 4) != 0) {
    throw FormatError(FormatError::Kind::BadMagic,
                      path + ": expected magic \"" + magic + "\", found \"" +
                          std::string(found, 4) + "\"");
  }
  const std::uint32_t version = get_u32(in, path);
  if (version != kFormatVersion) {
    throw FormatError(FormatError::Kind::BadVersion,
                      path + ": unsupported format version " +
                          std::to_string(version) + " (expected " +
                          std::to_string(kFormatVersion) + ")");
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError(FormatError::Kind::Truncated, "cannot open " + path);
  }
  return in;
}

void expect_eof(std::istream& in, const std::string& path) {
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError(FormatError::Kind::CountMismatch,
                      path + ": trailing bytes after payload");
  }
}

}  // namespace

void save_view(const std::string& path, const ViewMatrix& view) {
  std::ofstream out = open_out(path);
  put_magic(out, "CUHD");
  put_u64(out, static_cast<std::uint64_t>(view.dim()));
  put_u64(out, static_cast<std::uint64_t>(view.count()));
  put_matrix(out, view.data);
  if (!out) throw std::runtime_error("write failed for " + path);
}

ViewMatrix load_view(const std::string& path) {
  std::ifstream in = open_in(path);
  check_magic(in, "CUHD", path);
  const auto dim = static_cast<Index>(get_u64(in, path));
  const auto count = static_cast<Index>(get_u64(in, path));
  ViewMatrix view;
  view.data = get_matrix(in, dim, count, path);
  expect_eof(in, path);
  return view;
}

void save_labels(const std::string& path,
                 const std::vector<std::vector<int>>& labels) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  for (const auto& set : labels) {
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (i) out << ',';
      out << set[i];
    }
    out << '\n';
  }
}

std::vector<std::vector<int>> load_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError(FormatError::Kind::Truncated, "cannot open " + path);
  }
  std::vector<std::vector<int>> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<int> set;
    std::size_t start = 0;
    while (start < line.size()) {
      std::size_t end = line.find(',', start);
      if (end == std::string::npos) end = line.size();
      int value = 0;
      const auto res =
          std::from_chars(line.data() + start, line.data() + end, value);
      if (res.ec != std::errc() || res.ptr != line.data() + end) {
        throw FormatError(FormatError::Kind::Parse,
                          path + ": bad label id at line " +
                              std::to_string(line_no));
      }
      set.push_back(value);
      start = end + 1;
    }
    labels.push_back(std::move(set));
  }
  return labels;
}

MultiViewDataset load_dataset(const std::string& view1_path,
                              const std::string& view2_path,
                              const std::string& labels_path) {
  MultiViewDataset data;
  data.views[0] = load_view(view1_path);
  data.views[1] = load_view(view2_path);
  if (data.views[0].count() != data.views[1].count()) {
    throw FormatError(FormatError::Kind::CountMismatch,
                      "views disagree on item count: " + view1_path +
                          " has " + std::to_string(data.views[0].count()) +
                          ", " + view2_path + " has " +
                          std::to_string(data.views[1].count()));
  }
  if (!labels_path.empty()) {
    auto labels = load_labels(labels_path);
    if (static_cast<Index>(labels.size()) != data.count()) {
      throw FormatError(FormatError::Kind::CountMismatch,
                        labels_path + " covers " +
                            std::to_string(labels.size()) +
                            " items, views have " +
                            std::to_string(data.count()));
    }
    data.labels = std::move(labels);
  }
  return data;
}

void save_model(const std::string& path, const CuhModel& model) {
  validate_model(model);
  std::ofstream out = open_out(path);
  put_magic(out, "CUHM");
  put_u64(out, static_cast<std::uint64_t>(model.hyperparams.code_length));
  put_u64(out, static_cast<std::uint64_t>(model.hyperparams.num_clusters));
  put_u64(out, static_cast<std::uint64_t>(model.projections[0].w.rows()));
  put_u64(out, static_cast<std::uint64_t>(model.projections[1].w.rows()));
  put_u64(out, static_cast<std::uint64_t>(model.codes.count()));
  put_matrix(out, model.projections[0].w);
  put_matrix(out, model.projections[1].w);
  put_matrix(out, model.centroids[0].f);
  put_matrix(out, model.centroids[1].f);
  put_f64(out, model.weights.alpha[0]);
  put_f64(out, model.weights.alpha[1]);
  put_vector(out, model.means[0]);
  put_vector(out, model.means[1]);
  const PackedCodeMatrix packed = pack(model.codes);
  for (std::uint64_t word : packed.words) put_u64(out, word);
  put_f64(out, model.hyperparams.lambda);
  put_f64(out, model.hyperparams.beta);
  put_u64(out, static_cast<std::uint64_t>(model.hyperparams.max_outer_iters));
  put_u64(out, static_cast<std::uint64_t>(model.hyperparams.inner_w_iters));
  put_f64(out, model.hyperparams.rel_tol);
  put_u64(out, model.hyperparams.seed);
  for (int id : model.assignment.assign) {
    put_u64(out, static_cast<std::uint64_t>(id));
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

CuhModel load_model(const std::string& path) {
  std::ifstream in = open_in(path);
  check_magic(in, "CUHM", path);
  CuhModel model;
  const auto r = static_cast<Index>(get_u64(in, path));
  const auto c = static_cast<Index>(get_u64(in, path));
  const auto d1 = static_cast<Index>(get_u64(in, path));
  const auto d2 = static_cast<Index>(get_u64(in, path));
  const auto n = static_cast<Index>(get_u64(in, path));
  model.projections[0].w = get_matrix(in, d1, r, path);
  model.projections[1].w = get_matrix(in, d2, r, path);
  model.centroids[0].f = get_matrix(in, r, c, path);
  model.centroids[1].f = get_matrix(in, r, c, path);
  model.weights.alpha[0] = get_f64(in, path);
  model.weights.alpha[1] = get_f64(in, path);
  model.means[0] = get_vector(in, path);
  model.means[1] = get_vector(in, path);
  PackedCodeMatrix packed;
  packed.code_length = static_cast<int>(r);
  packed.count = n;
  packed.words.resize(static_cast<std::size_t>(n) * packed.words_per_item());
  for (std::uint64_t& word : packed.words) word = get_u64(in, path);
  model.codes = unpack(packed);
  model.hyperparams.code_length = static_cast<int>(r);
  model.hyperparams.num_clusters = static_cast<int>(c);
  model.hyperparams.lambda = get_f64(in, path);
  model.hyperparams.beta = get_f64(in, path);
  model.hyperparams.max_outer_iters = static_cast<int>(get_u64(in, path));
  model.hyperparams.inner_w_iters = static_cast<int>(get_u64(in, path));
  model.hyperparams.rel_tol = get_f64(in, path);
  model.hyperparams.seed = get_u64(in, path);
  model.assignment.num_clusters = static_cast<int>(c);
  model.assignment.assign.resize(static_cast<std::size_t>(n));
  for (int& id : model.assignment.assign) {
    id = static_cast<int>(get_u64(in, path));
  }
  expect_eof(in, path);
  validate_model(model);
  return model;
}

void export_codes(const std::string& path, const PackedCodeMatrix& codes) {
  std::ofstream out = open_out(path);
  put_magic(out, "CUHB");
  put_u64(out, static_cast<std::uint64_t>(codes.code_length));
  put_u64(out, static_cast<std::uint64_t>(codes.count));
  for (std::uint64_t word : codes.words) put_u64(out, word);
  if (!out) throw std::runtime_error("write failed for " + path);
}

PackedCodeMatrix load_codes(const std::string& path) {
  std::ifstream in = open_in(path);
  check_magic(in, "CUHB", path);
  PackedCodeMatrix codes;
  codes.code_length = static_cast<int>(get_u64(in, path));
  codes.count = static_cast<Index>(get_u64(in, path));
  codes.words.resize(static_cast<std::size_t>(codes.count) *
                     codes.words_per_item());
  for (std::uint64_t& word : codes.words) word = get_u64(in, path);
  expect_eof(in, path);
  return codes;
}

}  // namespace cuh
