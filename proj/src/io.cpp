#include "ifl/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "ifl/error.hpp"
#include "json.hpp"

namespace ifl {
namespace {

namespace fs = std::filesystem;

constexpr std::uint32_t kVersion = 1;

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

class Reader {
 public:
  Reader(const std::string& bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {}

  void magic(const char* tag) {
    if (bytes_.size() < 4 || bytes_.compare(0, 4, tag) != 0) {
      throw FormatError("bad " + std::string(tag) + " header");
    }
    pos_ = 4;
    const std::uint32_t version = u32();
    if (version != kVersion) {
      throw FormatError(std::string(tag) + " version " + std::to_string(version) + " unsupported");
    }
  }

  std::uint64_t uint(int width) {
    need(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(width);
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(uint(4)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(uint(2)); }
  std::uint64_t u64() { return uint(8); }
  float f32() { return std::bit_cast<float>(u32()); }

  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError(what_ + ": truncated file");
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  void finish() const {
    if (pos_ != bytes_.size()) throw FormatError(what_ + ": trailing bytes");
  }

 private:
  const std::string& bytes_;
  std::string what_;
  std::size_t pos_ = 0;
};

class Writer {
 public:
  void raw(const char* s) { out_.append(s, 4); }
  void uint(std::uint64_t v, int width) {
    for (int i = 0; i < width; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u32(std::uint32_t v) { uint(v, 4); }
  void u16(std::uint16_t v) { uint(v, 2); }
  void u64(std::uint64_t v) { uint(v, 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  std::string& str() { return out_; }

 private:
  std::string out_;
};

std::uint32_t checked_u32(std::int64_t v, const char* what) {
  if (v < 0 || static_cast<std::uint64_t>(v) > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError(std::string(what) + " does not fit in u32");
  }
  return static_cast<std::uint32_t>(v);
}

}  // namespace

void write_text_file(const fs::path& path, const std::string& text) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ResourceError("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw ResourceError("write failed: " + path.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw ResourceError("cannot move " + tmp.string() + " to " + path.string());
}

ActivationMatrix read_activations(const fs::path& path, std::string model_id) {
  const std::string bytes = slurp(path);
  Reader in(bytes, path.string());
  in.magic("ACTV");
  const std::uint32_t n = in.u32();
  const std::uint32_t d = in.u32();
  if (n < 2 || d < 1) throw FormatError(path.string() + ": need N >= 2 and d >= 1");
  const std::uint64_t count = static_cast<std::uint64_t>(n) * d;
  if (in.remaining() != count * 4) {
    throw FormatError(path.string() + ": payload size does not match N*d");
  }
  ActivationMatrix act;
  act.model_id = model_id.empty() ? path.stem().string() : std::move(model_id);
  act.values.resize(n, d);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = 0; j < d; ++j) {
      const float v = in.f32();
      if (!std::isfinite(v)) throw FormatError(path.string() + ": non-finite activation");
      act.values(i, j) = v;
    }
  }
  in.finish();
  return act;
}

void write_activations(const fs::path& path, const ActivationMatrix& act) {
  Writer out;
  out.raw("ACTV");
  out.u32(kVersion);
  out.u32(checked_u32(act.values.rows(), "N"));
  out.u32(checked_u32(act.values.cols(), "d"));
  for (Eigen::Index i = 0; i < act.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < act.values.cols(); ++j) out.f32(act.values(i, j));
  }
  write_text_file(path, out.str());
}

std::vector<int> read_predictions(const fs::path& path) {
  const std::string bytes = slurp(path);
  Reader in(bytes, path.string());
  in.magic("PRED");
  const std::uint32_t n = in.u32();
  if (in.remaining() != static_cast<std::uint64_t>(n) * 2) {
    throw FormatError(path.string() + ": payload size does not match N");
  }
  std::vector<int> labels(n);
  for (auto& l : labels) l = in.u16();
  in.finish();
  return labels;
}

void write_predictions(const fs::path& path, const std::vector<int>& labels) {
  Writer out;
  out.raw("PRED");
  out.u32(kVersion);
  out.u32(checked_u32(static_cast<std::int64_t>(labels.size()), "N"));
  for (const int l : labels) {
    if (l < 0 || l > 0xffff) throw ValidationError("label " + std::to_string(l) + " does not fit in u16");
    out.u16(static_cast<std::uint16_t>(l));
  }
  write_text_file(path, out.str());
}

std::string encode_tensor(const InteractionTensor& omega) {
  Writer out;
  out.raw("ITNS");
  out.u32(kVersion);
  out.u32(omega.models);
  out.u32(omega.data);
  out.u32(omega.features);
  out.f32(omega.gamma_corr);
  out.f32(omega.gamma_data);
  out.u64(omega.entries.size());
  for (const auto& e : omega.entries) {
    out.u32(e.m);
    out.u32(e.n);
    out.u32(e.t);
  }
  return std::move(out.str());
}

InteractionTensor decode_tensor(const std::string& bytes) {
  Reader in(bytes, "ITNS");
  in.magic("ITNS");
  InteractionTensor omega;
  omega.models = in.u32();
  omega.data = in.u32();
  omega.features = in.u32();
  omega.gamma_corr = in.f32();
  omega.gamma_data = in.f32();
  const std::uint64_t nnz = in.u64();
  if (in.remaining() / 12 < nnz || in.remaining() != nnz * 12) {
    throw FormatError("ITNS: payload size does not match nnz");
  }
  omega.entries.resize(nnz);
  for (auto& e : omega.entries) {
    e.m = in.u32();
    e.n = in.u32();
    e.t = in.u32();
    if (e.m >= omega.models || e.n >= omega.data || e.t >= omega.features) {
      throw FormatError("ITNS: triple out of bounds");
    }
  }
  for (std::size_t i = 1; i < omega.entries.size(); ++i) {
    if (!(omega.entries[i - 1] < omega.entries[i])) throw FormatError("ITNS: triples not sorted and unique");
  }
  in.finish();
  return omega;
}

InteractionTensor read_tensor(const fs::path& path) { return decode_tensor(slurp(path)); }

void write_tensor(const fs::path& path, const InteractionTensor& omega) {
  write_text_file(path, encode_tensor(omega));
}

Manifest read_manifest(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(slurp(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    const fs::path q(p);
    return q.is_absolute() ? q : base / q;
  };
  auto fail = [&](const std::string& msg) -> FormatError {
    return FormatError(path.string() + ": " + msg);
  };
  if (!j.is_object()) throw fail("manifest must be a JSON object");
  if (!j.contains("models") || !j["models"].is_array()) throw fail("field 'models' must be an array");

  Manifest m;
  for (const auto& entry : j["models"]) {
    if (!entry.is_object()) throw fail("each model entry must be an object");
    ManifestModel mm;
    if (!entry.contains("activations") || !entry["activations"].is_string()) {
      throw fail("model entry needs a string 'activations'");
    }
    mm.activations = resolve(entry["activations"].get<std::string>());
    if (entry.contains("id")) {
      mm.id = entry["id"].is_string() ? entry["id"].get<std::string>() : entry["id"].dump();
    } else {
      mm.id = mm.activations.stem().string();
    }
    if (entry.contains("predictions")) {
      if (!entry["predictions"].is_string()) throw fail("'predictions' must be a string");
      mm.predictions = resolve(entry["predictions"].get<std::string>());
    }
    m.models.push_back(std::move(mm));
  }
  if (j.contains("labels")) {
    if (!j["labels"].is_string()) throw fail("'labels' must be a string");
    m.labels = resolve(j["labels"].get<std::string>());
  }
  if (j.contains("pcs")) {
    if (!j["pcs"].is_number_unsigned() || j["pcs"].get<std::size_t>() < 1) {
      throw fail("'pcs' must be a positive integer");
    }
    m.pcs = j["pcs"].get<std::size_t>();
  }
  for (const char* key : {"corr_percentile", "data_percentile"}) {
    if (!j.contains(key)) continue;
    if (!j[key].is_number()) throw fail(std::string("'") + key + "' must be a number");
    const double v = j[key].get<double>();
    (std::string(key) == "corr_percentile" ? m.corr_percentile : m.data_percentile) = v;
  }
  return m;
}

}  // namespace ifl
