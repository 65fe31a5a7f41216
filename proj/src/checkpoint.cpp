#include <bit>
#include <cmath>
#include <cstring>

#include "lxm/error.hpp"
#include "lxm/seqmodel.hpp"
#include "lxm/util.hpp"

namespace lxm::model {

namespace {

constexpr char kMagic[4] = {'L', 'X', 'M', '1'};
constexpr std::uint32_t kFormatVersion = 1;

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void bytes(std::string_view s) { out_.append(s); }
  const std::string& str() const { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(std::string_view data, std::string source) : data_(data), source_(std::move(source)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == data_.size(); }
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(source_, 0, what + " (byte offset " + std::to_string(pos_) + ")");
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) fail("truncated checkpoint");
  }
  std::string_view data_;
  std::string source_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const ModelParams& model, const std::filesystem::path& path) {
  const auto& arch = model.arch();
  Writer w;
  w.bytes(std::string_view(kMagic, 4));
  w.u32(kFormatVersion);
  w.u32(static_cast<std::uint32_t>(arch.input_dim));
  w.u32(static_cast<std::uint32_t>(arch.window));
  w.u32(static_cast<std::uint32_t>(arch.horizon));
  w.u32(static_cast<std::uint32_t>(arch.layer_count()));
  for (int h : arch.hidden_sizes) w.u32(static_cast<std::uint32_t>(h));

  const auto& tensors = model.layout().tensors();
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    w.u32(static_cast<std::uint32_t>(t.name.size()));
    w.bytes(t.name);
    w.u32(static_cast<std::uint32_t>(t.rows));
    w.u32(static_cast<std::uint32_t>(t.cols));
  }
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const auto m = model.tensor(i);
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) w.f32(static_cast<float>(m(r, c)));
  }
  write_file(path, w.str());
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("checkpoint not found: " + path.string());
  const std::string data = read_file(path);
  Reader r(data, path.string());
  if (r.bytes(4) != std::string_view(kMagic, 4)) r.fail("bad magic, not an LXM1 checkpoint");
  if (const auto version = r.u32(); version != kFormatVersion) r.fail("unsupported version " + std::to_string(version));

  Architecture arch;
  arch.input_dim = static_cast<int>(r.u32());
  arch.window = static_cast<int>(r.u32());
  arch.horizon = static_cast<int>(r.u32());
  const auto layers = r.u32();
  if (layers == 0 || layers > 64) r.fail("implausible layer count");
  arch.hidden_sizes.clear();
  for (std::uint32_t i = 0; i < layers; ++i) arch.hidden_sizes.push_back(static_cast<int>(r.u32()));
  try {
    arch.validate();
  } catch (const ConfigError& e) {
    r.fail(e.what());
  }

  ModelParams model(arch);
  const auto& tensors = model.layout().tensors();
  if (r.u32() != tensors.size()) r.fail("tensor count does not match architecture");
  for (const auto& t : tensors) {
    const auto name_len = r.u32();
    if (r.bytes(name_len) != t.name) r.fail("unexpected tensor name, expected " + t.name);
    const auto rows = r.u32(), cols = r.u32();
    if (rows != t.rows || cols != t.cols) r.fail("shape mismatch for " + t.name);
  }
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    auto m = model.tensor(i);
    for (Eigen::Index row = 0; row < m.rows(); ++row)
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const float v = r.f32();
        if (!std::isfinite(v)) r.fail("non-finite parameter in " + tensors[i].name);
        m(row, c) = v;
      }
  }
  if (!r.done()) r.fail("trailing bytes after tensor data");
  return model;
}

}  // namespace lxm::model
