#pragma once

// Feature/correctness datasets: in-memory container, binary file format,
// CSV import, synthetic generation, and deterministic splitting.
//
// Binary layout, all little-endian:
//   "TWF1" | version u32 | n u64 | d u32 | K u32 | flags u32 | rows
// flags bit 0: rows carry p_star. Row: o u8 [p_star f32] d*f32 features.
// Features are stored and kept in memory as f32, so a save/load round trip
// is bit-exact.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "trustpred/random.hpp"

namespace trustpred {

struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Dataset {
 public:
  Dataset(uint32_t dim, uint32_t num_classes, bool with_p_star, std::string provenance)
      : dim_(dim), num_classes_(num_classes), with_p_star_(with_p_star),
        provenance_(std::move(provenance)) {
    if (dim_ == 0) throw std::invalid_argument("dataset dimension must be positive");
    if (num_classes_ == 0) throw std::invalid_argument("dataset class count must be positive");
  }

  void add(std::span<const float> features, int o, std::optional<float> p_star) {
    if (features.size() != dim_) throw std::invalid_argument("sample dimension mismatch");
    for (float f : features)
      if (!std::isfinite(f)) throw std::invalid_argument("non-finite feature");
    if (o != 0 && o != 1) throw std::invalid_argument("correctness label must be 0 or 1");
    if (with_p_star_ != p_star.has_value())
      throw std::invalid_argument("p_star presence must match the dataset");
    if (p_star && !(*p_star >= 0.0f && *p_star <= 1.0f))
      throw std::invalid_argument("p_star out of [0,1]");
    features_.insert(features_.end(), features.begin(), features.end());
    labels_.push_back(static_cast<uint8_t>(o));
    if (p_star) p_star_.push_back(*p_star);
    n_pos_ += static_cast<uint64_t>(o);
  }

  uint64_t size() const { return labels_.size(); }
  uint32_t dim() const { return dim_; }
  uint32_t num_classes() const { return num_classes_; }
  bool has_p_star() const { return with_p_star_; }
  uint64_t n_pos() const { return n_pos_; }
  uint64_t n_neg() const { return labels_.size() - n_pos_; }
  const std::string& provenance() const { return provenance_; }

  std::span<const float> features(uint64_t i) const {
    return {features_.data() + i * dim_, dim_};
  }
  int label(uint64_t i) const { return labels_[i]; }
  std::optional<float> p_star(uint64_t i) const {
    if (!with_p_star_) return std::nullopt;
    return p_star_[i];
  }

  bool operator==(const Dataset& other) const {
    return dim_ == other.dim_ && num_classes_ == other.num_classes_ &&
           with_p_star_ == other.with_p_star_ && labels_ == other.labels_ &&
           p_star_ == other.p_star_ && features_ == other.features_;
  }

 private:
  uint32_t dim_;
  uint32_t num_classes_;
  bool with_p_star_;
  std::string provenance_;
  std::vector<float> features_;   // row-major, n * dim
  std::vector<uint8_t> labels_;
  std::vector<float> p_star_;     // empty unless with_p_star_
  uint64_t n_pos_ = 0;
};

namespace detail {

inline void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_f32(std::string& out, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

class ByteReader {
 public:
  ByteReader(const std::string& data, const std::string& name) : data_(data), name_(name) {}
  size_t offset() const { return off_; }
  void need(size_t bytes) const {
    if (off_ + bytes > data_.size())
      throw io_error(name_ + ": truncated file, need " + std::to_string(bytes) +
                     " bytes at offset " + std::to_string(off_) + ", have " +
                     std::to_string(data_.size() - off_));
  }
  uint8_t u8() {
    need(1);
    return static_cast<uint8_t>(data_[off_++]);
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<uint8_t>(data_[off_++])) << (8 * i);
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<uint8_t>(data_[off_++])) << (8 * i);
    return v;
  }
  float f32() {
    uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }

 private:
  const std::string& data_;
  std::string name_;
  size_t off_ = 0;
};

}  // namespace detail

// Single writer for every file this library emits.
inline void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open for writing: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw io_error("write failed: " + path.string());
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

inline std::string serialize_dataset(const Dataset& ds) {
  std::string out;
  size_t row = 1 + (ds.has_p_star() ? 4 : 0) + 4ull * ds.dim();
  out.reserve(25 + row * ds.size());
  out += "TWF1";
  detail::put_u32(out, 1);  // version
  detail::put_u64(out, ds.size());
  detail::put_u32(out, ds.dim());
  detail::put_u32(out, ds.num_classes());
  detail::put_u32(out, ds.has_p_star() ? 1u : 0u);
  for (uint64_t i = 0; i < ds.size(); ++i) {
    out.push_back(static_cast<char>(ds.label(i)));
    if (ds.has_p_star()) detail::put_f32(out, *ds.p_star(i));
    for (float f : ds.features(i)) detail::put_f32(out, f);
  }
  return out;
}

inline void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  write_text_file(path, serialize_dataset(ds));
}

inline Dataset parse_dataset(const std::string& bytes, const std::string& name) {
  detail::ByteReader r(bytes, name);
  r.need(4);
  if (bytes.compare(0, 4, "TWF1") != 0)
    throw io_error(name + ": magic mismatch at offset 0, expected \"TWF1\"");
  for (int i = 0; i < 4; ++i) r.u8();
  uint32_t version = r.u32();
  if (version != 1)
    throw io_error(name + ": unsupported version " + std::to_string(version) +
                   " at offset 4");
  uint64_t n = r.u64();
  uint32_t d = r.u32();
  uint32_t k = r.u32();
  uint32_t flags = r.u32();
  if (d == 0 || k == 0)
    throw io_error(name + ": zero dimension or class count in header (offset 16)");
  if (flags > 1)
    throw io_error(name + ": unknown flag bits at offset 24");
  bool has_p = (flags & 1u) != 0;
  uint64_t row = 1ull + (has_p ? 4ull : 0ull) + 4ull * d;
  uint64_t body = bytes.size() - r.offset();
  // division keeps the comparison safe when n * row would overflow
  if (n > body / row)
    throw io_error(name + ": body too short for " + std::to_string(n) + " rows of " +
                   std::to_string(row) + " bytes, only " + std::to_string(body) +
                   " bytes follow offset " + std::to_string(r.offset()) +
                   " (truncated file or corrupt row count)");
  if (n * row != body)
    throw io_error(name + ": trailing bytes, expected " + std::to_string(n * row) +
                   " after offset " + std::to_string(r.offset()) + ", found " +
                   std::to_string(body));
  Dataset ds(d, k, has_p, name);
  std::vector<float> feat(d);
  for (uint64_t i = 0; i < n; ++i) {
    size_t row_off = r.offset();
    uint8_t o = r.u8();
    if (o > 1)
      throw io_error(name + ": invalid label at offset " + std::to_string(row_off));
    std::optional<float> ps;
    if (has_p) ps = r.f32();
    for (uint32_t j = 0; j < d; ++j) feat[j] = r.f32();
    try {
      ds.add(feat, o, ps);
    } catch (const std::invalid_argument& e) {
      throw io_error(name + ": " + e.what() + " at offset " + std::to_string(row_off));
    }
  }
  return ds;
}

inline Dataset load_dataset(const std::filesystem::path& path) {
  return parse_dataset(read_file_bytes(path), path.string());
}

// CSV with header "o,p_star,f0,...,f{d-1}". p_star cells may all be empty
// (dataset without p_star); a mix of empty and filled cells is rejected.
inline Dataset import_csv(const std::filesystem::path& path, uint32_t num_classes = 2) {
  std::string text = read_file_bytes(path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw io_error(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> cols;
  {
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cols.push_back(cell);
  }
  if (cols.size() < 3 || cols[0] != "o" || cols[1] != "p_star")
    throw io_error(path.string() + ": header must be o,p_star,f0,...");
  uint32_t d = static_cast<uint32_t>(cols.size() - 2);
  for (uint32_t j = 0; j < d; ++j)
    if (cols[2 + j] != "f" + std::to_string(j))
      throw io_error(path.string() + ": feature column " + std::to_string(j) +
                     " must be named f" + std::to_string(j));

  struct Row {
    int o;
    std::optional<float> ps;
    std::vector<float> feat;
  };
  std::vector<Row> rows;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.push_back("");
    if (cells.size() != cols.size())
      throw io_error(path.string() + ": line " + std::to_string(line_no) + " has " +
                     std::to_string(cells.size()) + " cells, expected " +
                     std::to_string(cols.size()));
    Row r;
    try {
      r.o = std::stoi(cells[0]);
      if (!cells[1].empty()) r.ps = std::stof(cells[1]);
      r.feat.resize(d);
      for (uint32_t j = 0; j < d; ++j) r.feat[j] = std::stof(cells[2 + j]);
    } catch (const std::exception&) {
      throw io_error(path.string() + ": unparsable number on line " + std::to_string(line_no));
    }
    rows.push_back(std::move(r));
  }
  bool any_ps = false, all_ps = true;
  for (const auto& r : rows) {
    any_ps = any_ps || r.ps.has_value();
    all_ps = all_ps && r.ps.has_value();
  }
  if (any_ps && !all_ps)
    throw io_error(path.string() + ": p_star must be present for all rows or none");
  Dataset ds(d, num_classes, any_ps, path.string());
  for (size_t i = 0; i < rows.size(); ++i) {
    try {
      ds.add(rows[i].feat, rows[i].o, rows[i].ps);
    } catch (const std::invalid_argument& e) {
      throw io_error(path.string() + ": " + e.what() + " on data row " + std::to_string(i + 1));
    }
  }
  return ds;
}

struct SynthConfig {
  uint32_t dim = 16;
  uint64_t n = 60000;
  double imbalance = 0.85;       // fraction of o=1
  double mean_separation = 1.5;  // distance between the class means
  double sigma = 1.0;
  uint64_t seed = 0;

  void validate() const {
    if (dim == 0) throw std::invalid_argument("synth dim must be positive");
    if (n == 0) throw std::invalid_argument("synth n must be positive");
    if (!(imbalance > 0.0 && imbalance < 1.0))
      throw std::invalid_argument("synth imbalance must lie in (0,1)");
    if (!(mean_separation >= 0.0) || !std::isfinite(mean_separation))
      throw std::invalid_argument("synth mean_separation must be finite and >= 0");
    if (!(sigma > 0.0) || !std::isfinite(sigma))
      throw std::invalid_argument("synth sigma must be finite and > 0");
  }
};

// Two isotropic Gaussians at +-(separation/2) along the first axis; o=1 sits
// on the positive side. p_star mimics a classifier's ground-truth-class
// probability: sig(2 * x0 * (2o-1)) plus mild noise, clamped to [0,1].
inline Dataset synth_generate(const SynthConfig& cfg) {
  cfg.validate();
  std::string tag = "synth(d=" + std::to_string(cfg.dim) + ",n=" + std::to_string(cfg.n) +
                    ",seed=" + std::to_string(cfg.seed) + ")";
  Dataset ds(cfg.dim, 2, true, tag);
  Rng label_rng(cfg.seed, "synth.labels");
  Rng feat_rng(cfg.seed, "synth.features");
  Rng ps_rng(cfg.seed, "synth.pstar");
  std::vector<uint8_t> labels(cfg.n);
  for (auto& o : labels) o = label_rng.uniform() < cfg.imbalance ? 1 : 0;
  double mu = cfg.mean_separation / 2.0;
  std::vector<float> feat(cfg.dim);
  for (uint64_t i = 0; i < cfg.n; ++i) {
    int o = labels[i];
    double center = o == 1 ? mu : -mu;
    for (uint32_t j = 0; j < cfg.dim; ++j) {
      double v = feat_rng.gaussian() * cfg.sigma + (j == 0 ? center : 0.0);
      feat[j] = static_cast<float>(v);
    }
    double signal = 2.0 * static_cast<double>(feat[0]) * (2.0 * o - 1.0);
    double ps = 1.0 / (1.0 + std::exp(-signal)) + 0.05 * ps_rng.gaussian();
    ps = std::min(1.0, std::max(0.0, ps));
    ds.add(feat, o, static_cast<float>(ps));
  }
  return ds;
}

// Seeded permutation, then prefix/suffix. Both parts must be nonempty.
inline std::pair<Dataset, Dataset> split(const Dataset& ds, double fraction, uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("split fraction must lie in (0,1)");
  if (ds.size() < 2) throw std::invalid_argument("split needs at least two samples");
  uint64_t n_train = static_cast<uint64_t>(
      std::llround(fraction * static_cast<double>(ds.size())));
  if (n_train == 0 || n_train >= ds.size())
    throw std::invalid_argument("split fraction produces an empty part");
  std::vector<uint64_t> order(ds.size());
  for (uint64_t i = 0; i < ds.size(); ++i) order[i] = i;
  Rng rng(seed, "split");
  rng.shuffle(order);
  Dataset train(ds.dim(), ds.num_classes(), ds.has_p_star(), ds.provenance() + "#train");
  Dataset eval(ds.dim(), ds.num_classes(), ds.has_p_star(), ds.provenance() + "#eval");
  for (uint64_t i = 0; i < ds.size(); ++i) {
    uint64_t src = order[i];
    (i < n_train ? train : eval).add(ds.features(src), ds.label(src), ds.p_star(src));
  }
  return {std::move(train), std::move(eval)};
}

// Shortest round-trip decimal form, for deterministic CSV output.
inline std::string format_double(double v);

}  // namespace trustpred

#include <charconv>

namespace trustpred {

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace trustpred
