#include "lvad/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace lvad {

namespace {

constexpr char kMagic[4] = {'L', 'V', 'C', 'K'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {(unsigned char)(v), (unsigned char)(v >> 8), (unsigned char)(v >> 16),
                        (unsigned char)(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = (unsigned char)(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& os, double d) {
  uint64_t v;
  std::memcpy(&v, &d, 8);
  put_u64(os, v);
}

void put_mat(std::ostream& os, const Mat& m) {
  put_u32(os, uint32_t(m.rows()));
  put_u32(os, uint32_t(m.cols()));
  // Column-major entry order (Eigen native).
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) put_f64(os, m(i, j));
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  require(bool(is), Errc::corrupt_file, "checkpoint truncated while reading u32");
  return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}

uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  require(bool(is), Errc::corrupt_file, "checkpoint truncated while reading u64");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) {
  uint64_t v = get_u64(is);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

void get_mat_into(std::istream& is, Mat& m, const std::string& name) {
  const uint32_t rows = get_u32(is);
  const uint32_t cols = get_u32(is);
  require(rows == uint32_t(m.rows()) && cols == uint32_t(m.cols()), Errc::incompatible_checkpoint,
          "checkpoint shape mismatch for " + name + ": stored " + std::to_string(rows) + "x" +
              std::to_string(cols) + ", expected " + std::to_string(m.rows()) + "x" +
              std::to_string(m.cols()));
  for (uint32_t j = 0; j < cols; ++j)
    for (uint32_t i = 0; i < rows; ++i) m(i, j) = get_f64(is);
}

std::string get_block(std::istream& is, const char* what) {
  const uint32_t len = get_u32(is);
  std::string s(len, '\0');
  is.read(s.data(), len);
  require(bool(is), Errc::corrupt_file, std::string("checkpoint truncated while reading ") + what);
  return s;
}

void read_header(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  require(bool(is) && std::memcmp(magic, kMagic, 4) == 0, Errc::corrupt_file,
          "not a checkpoint file (bad magic)");
  const uint32_t version = get_u32(is);
  require(version == kVersion, Errc::unsupported_version,
          "unsupported checkpoint version " + std::to_string(version));
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore& params, const AdamW* optimizer,
                     const CheckpointMeta& meta) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  require(bool(os), Errc::io_error, "cannot open checkpoint for writing: " + path);
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  put_u32(os, uint32_t(meta.config_text.size()));
  os.write(meta.config_text.data(), std::streamsize(meta.config_text.size()));
  put_u64(os, meta.step);
  put_u32(os, uint32_t(params.count()));
  for (size_t i = 0; i < params.count(); ++i) {
    const Parameter& p = params.at(i);
    put_u32(os, uint32_t(p.name.size()));
    os.write(p.name.data(), std::streamsize(p.name.size()));
    os.put(char(p.trainable ? 1 : 0));
    os.put(char(p.weight_decay ? 1 : 0));
    put_mat(os, p.value);
  }
  if (optimizer) {
    os.put(char(1));
    put_f64(os, optimizer->config().base_lr);
    put_f64(os, optimizer->config().weight_decay);
    put_u64(os, optimizer->config().horizon);
    put_u64(os, optimizer->step_count());
    const auto& m = optimizer->first_moments();
    const auto& v = optimizer->second_moments();
    for (size_t i = 0; i < params.count(); ++i) {
      put_mat(os, m[i]);
      put_mat(os, v[i]);
    }
  } else {
    os.put(char(0));
  }
  require(bool(os), Errc::io_error, "failed writing checkpoint: " + path);
}

CheckpointMeta load_checkpoint(const std::string& path, ParamStore& params, AdamW* optimizer) {
  std::ifstream is(path, std::ios::binary);
  require(bool(is), Errc::data_not_found, "cannot open checkpoint: " + path);
  read_header(is);
  CheckpointMeta meta;
  meta.config_text = get_block(is, "config echo");
  meta.step = get_u64(is);
  const uint32_t count = get_u32(is);
  require(count == uint32_t(params.count()), Errc::incompatible_checkpoint,
          "checkpoint holds " + std::to_string(count) + " parameters, model expects " +
              std::to_string(params.count()));
  for (uint32_t i = 0; i < count; ++i) {
    const std::string name = get_block(is, "parameter name");
    Parameter& p = params.at(i);
    require(name == p.name, Errc::incompatible_checkpoint,
            "checkpoint parameter '" + name + "' does not match model parameter '" + p.name + "'");
    int trainable = is.get();
    int decay = is.get();
    require(trainable != EOF && decay != EOF, Errc::corrupt_file, "checkpoint truncated");
    get_mat_into(is, p.value, name);
  }
  const int has_opt = is.get();
  require(has_opt != EOF, Errc::corrupt_file, "checkpoint truncated before optimizer block");
  if (has_opt && optimizer) {
    get_f64(is);  // base_lr: the live optimizer keeps its configured schedule
    get_f64(is);
    get_u64(is);
    optimizer->set_step_count(get_u64(is));
    for (uint32_t i = 0; i < count; ++i) {
      get_mat_into(is, optimizer->first_moments()[i], "optimizer.m");
      get_mat_into(is, optimizer->second_moments()[i], "optimizer.v");
    }
  }
  return meta;
}

std::string read_checkpoint_config(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(bool(is), Errc::data_not_found, "cannot open checkpoint: " + path);
  read_header(is);
  return get_block(is, "config echo");
}

}  // namespace lvad
