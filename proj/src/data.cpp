#include "lvad/data.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace lvad {

void validate_frame(const PointCloudFrame& frame) {
  require(frame.points.rows() >= 1, Errc::empty_frame, "frame has no points");
  require(frame.points.cols() == 3, Errc::invalid_frame, "frame points must be N x 3");
  require(frame.points.allFinite(), Errc::invalid_frame, "frame contains non-finite coordinates");
}

void CameraIntrinsics::validate() const {
  require(fx > 0 && fy > 0, Errc::invalid_argument, "intrinsics: focal lengths must be positive");
  require(width > 0 && height > 0, Errc::invalid_argument, "intrinsics: image size must be positive");
  require(cx >= 0 && cx < width && cy >= 0 && cy < height, Errc::invalid_argument,
          "intrinsics: principal point outside the image");
}

std::string SequenceRecord::meta_value(const std::string& key) const {
  std::istringstream is(metadata);
  std::string line;
  while (std::getline(is, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      size_t b = s.find_first_not_of(" \t\r");
      size_t e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    if (trim(line.substr(0, eq)) == key) return trim(line.substr(eq + 1));
  }
  return "";
}

bool operator==(const SequenceRecord& a, const SequenceRecord& b) {
  if (a.id != b.id || a.labels != b.labels || a.metadata != b.metadata) return false;
  if (a.frames.size() != b.frames.size()) return false;
  for (size_t i = 0; i < a.frames.size(); ++i)
    if (a.frames[i].rows() != b.frames[i].rows() || a.frames[i] != b.frames[i]) return false;
  return true;
}

void SyntheticConfig::validate() const {
  require(frames >= 1 && points >= 1 && actors >= 1, Errc::invalid_argument,
          "synthetic config: frames, points and actors must be >= 1");
  require(noise_std >= 0, Errc::invalid_argument, "synthetic config: noise must be >= 0");
  require(speed_min >= 0 && speed_max >= speed_min, Errc::invalid_argument,
          "synthetic config: speed range is invalid");
  if (!anomaly.empty()) {
    require(anomaly == "velocity-jump" || anomaly == "teleport" || anomaly == "shape-collapse" ||
                anomaly == "extra-object",
            Errc::invalid_argument, "synthetic config: unknown anomaly type '" + anomaly + "'");
    require(onset_min >= 1 && onset_min <= onset_max && onset_max < frames, Errc::invalid_argument,
            "synthetic config: onset range must lie within [1, frames)");
  }
}

namespace {

Eigen::Vector3d random_unit(Rng& rng) {
  Eigen::Vector3d v(rng.normal(), rng.normal(), rng.normal());
  double n = v.norm();
  if (n < 1e-12) return Eigen::Vector3d(1, 0, 0);
  return v / n;
}

}  // namespace

SequenceRecord generate_synthetic_video(const SyntheticConfig& cfg, const std::string& id) {
  cfg.validate();
  Rng rng = Rng::derive(cfg.seed, "synthetic");

  struct Blob {
    Eigen::Vector3d center;
    Eigen::Vector3d velocity;
    double radius;
  };
  std::vector<Blob> blobs(size_t(cfg.actors));
  for (auto& b : blobs) {
    b.center = Eigen::Vector3d(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), rng.uniform(2.0, 4.0));
    b.velocity = rng.uniform(cfg.speed_min, cfg.speed_max) * random_unit(rng);
    b.radius = cfg.radius;
  }

  // All anomaly decisions are drawn up front so the per-frame point stream is
  // a pure function of the configuration.
  int onset = -1;
  size_t victim = 0;
  Eigen::Vector3d teleport_offset = Eigen::Vector3d::Zero();
  Eigen::Vector3d jump_velocity = Eigen::Vector3d::Zero();
  Blob extra{};
  if (!cfg.anomaly.empty()) {
    onset = cfg.onset_min + int(rng.uniform_index(uint64_t(cfg.onset_max - cfg.onset_min + 1)));
    victim = rng.uniform_index(uint64_t(cfg.actors));
    teleport_offset = rng.uniform(1.2, 2.0) * random_unit(rng);
    jump_velocity = 5.0 * rng.uniform(cfg.speed_min, cfg.speed_max) * random_unit(rng);
    extra.center =
        Eigen::Vector3d(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), rng.uniform(2.0, 4.0));
    extra.velocity = rng.uniform(cfg.speed_min, cfg.speed_max) * random_unit(rng);
    extra.radius = cfg.radius * 1.2;
  }

  SequenceRecord rec;
  rec.id = id;
  rec.labels.assign(size_t(cfg.frames), 0);
  rec.frames.reserve(size_t(cfg.frames));
  {
    std::ostringstream meta;
    meta << "source = synthetic\n";
    meta << "category = " << (cfg.anomaly.empty() ? "normal" : cfg.anomaly) << "\n";
    meta << "frames = " << cfg.frames << "\npoints = " << cfg.points << "\n";
    meta << "actors = " << cfg.actors << "\nnoise_std = " << cfg.noise_std << "\n";
    meta << "seed = " << cfg.seed << "\n";
    if (onset >= 0) meta << "onset = " << onset << "\n";
    rec.metadata = meta.str();
  }

  for (int t = 0; t < cfg.frames; ++t) {
    const bool anomalous = onset >= 0 && t >= onset;
    if (t == onset) {
      if (cfg.anomaly == "teleport") blobs[victim].center += teleport_offset;
      if (cfg.anomaly == "velocity-jump") blobs[victim].velocity = jump_velocity;
      if (cfg.anomaly == "shape-collapse") blobs[victim].radius = cfg.radius * 0.2;
    }
    if (anomalous) rec.labels[size_t(t)] = 1;

    std::vector<const Blob*> active;
    for (const auto& b : blobs) active.push_back(&b);
    if (anomalous && cfg.anomaly == "extra-object") active.push_back(&extra);

    Mat pts(cfg.points, 3);
    const int k = int(active.size());
    for (int i = 0; i < cfg.points; ++i) {
      const Blob& b = *active[size_t(i % k)];
      for (int d = 0; d < 3; ++d)
        pts(i, d) = b.center[d] + b.radius * rng.normal() + cfg.noise_std * rng.normal();
    }
    rec.frames.push_back(std::move(pts));

    for (auto& b : blobs) b.center += b.velocity;
    extra.center += extra.velocity;
  }
  return rec;
}

PointCloudFrame backproject_depth(const Mat& depth, const CameraIntrinsics& intr) {
  intr.validate();
  require(depth.rows() == intr.height && depth.cols() == intr.width, Errc::invalid_argument,
          "backproject_depth: raster size does not match intrinsics");
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(size_t(depth.size()));
  for (int v = 0; v < intr.height; ++v)
    for (int u = 0; u < intr.width; ++u) {
      const double z = depth(v, u);
      if (!std::isfinite(z) || z <= 0.0) continue;
      pts.emplace_back((u - intr.cx) * z / intr.fx, (v - intr.cy) * z / intr.fy, z);
    }
  require(!pts.empty(), Errc::empty_frame, "backproject_depth: no valid depth pixels");
  Mat out(Eigen::Index(pts.size()), 3);
  for (Eigen::Index i = 0; i < out.rows(); ++i) out.row(i) = pts[size_t(i)].transpose();
  return PointCloudFrame{std::move(out)};
}

PointCloudFrame downsample_frame(const PointCloudFrame& frame, int n_target, uint64_t seed) {
  validate_frame(frame);
  require(n_target >= 1, Errc::invalid_argument, "downsample_frame: target must be >= 1");
  const int n = int(frame.points.rows());
  Mat out(n_target, 3);
  Rng rng = Rng::derive(seed, "downsample");
  if (n > n_target) {
    // Partial Fisher-Yates over an index vector: first n_target entries form
    // a uniform sample without replacement.
    std::vector<int> idx(size_t(n));
    for (int i = 0; i < n; ++i) idx[size_t(i)] = i;
    for (int i = 0; i < n_target; ++i) {
      int j = i + int(rng.uniform_index(uint64_t(n - i)));
      std::swap(idx[size_t(i)], idx[size_t(j)]);
      out.row(i) = frame.points.row(idx[size_t(i)]);
    }
  } else {
    out.topRows(n) = frame.points;
    for (int i = n; i < n_target; ++i)
      out.row(i) = frame.points.row(Eigen::Index(rng.uniform_index(uint64_t(n))));
  }
  return PointCloudFrame{std::move(out)};
}

namespace {

constexpr char kMagic[4] = {'P', 'C', 'V', 'S'};
constexpr uint32_t kFormatVersion = 1;

void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {(unsigned char)(v), (unsigned char)(v >> 8), (unsigned char)(v >> 16),
                        (unsigned char)(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_f64(std::ostream& os, double d) {
  uint64_t v;
  std::memcpy(&v, &d, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = (unsigned char)(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  require(bool(is), Errc::corrupt_file, "truncated file while reading u32");
  return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  require(bool(is), Errc::corrupt_file, "truncated file while reading f64");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
  double d;
  std::memcpy(&d, &v, 8);
  return d;
}

std::string get_block(std::istream& is, const char* what) {
  uint32_t len = get_u32(is);
  std::string s(len, '\0');
  is.read(s.data(), len);
  require(bool(is), Errc::corrupt_file, std::string("truncated file while reading ") + what);
  return s;
}

}  // namespace

void write_sequence(const SequenceRecord& record, const std::string& path) {
  require(record.labels.size() == record.frames.size(), Errc::invalid_argument,
          "write_sequence: label count must equal frame count");
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  require(bool(os), Errc::io_error, "write_sequence: cannot open " + path);
  os.write(kMagic, 4);
  put_u32(os, kFormatVersion);
  put_u32(os, uint32_t(record.id.size()));
  os.write(record.id.data(), std::streamsize(record.id.size()));
  put_u32(os, uint32_t(record.frames.size()));
  put_u32(os, uint32_t(record.metadata.size()));
  os.write(record.metadata.data(), std::streamsize(record.metadata.size()));
  for (size_t t = 0; t < record.frames.size(); ++t) {
    const Mat& f = record.frames[t];
    require(f.cols() == 3 && f.allFinite(), Errc::invalid_frame,
            "write_sequence: frames must be finite N x 3");
    put_u32(os, uint32_t(f.rows()));
    os.put(char(record.labels[t] ? 1 : 0));
    for (Eigen::Index i = 0; i < f.rows(); ++i)
      for (int d = 0; d < 3; ++d) put_f64(os, f(i, d));
  }
  require(bool(os), Errc::io_error, "write_sequence: write failed for " + path);
}

SequenceRecord read_sequence(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  require(bool(is), Errc::data_not_found, "read_sequence: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  require(bool(is) && std::memcmp(magic, kMagic, 4) == 0, Errc::corrupt_file,
          "read_sequence: bad magic bytes in " + path);
  const uint32_t version = get_u32(is);
  require(version == kFormatVersion, Errc::unsupported_version,
          "read_sequence: unsupported format version " + std::to_string(version));
  SequenceRecord rec;
  rec.id = get_block(is, "video id");
  const uint32_t frames = get_u32(is);
  rec.metadata = get_block(is, "metadata");
  rec.frames.reserve(frames);
  rec.labels.reserve(frames);
  for (uint32_t t = 0; t < frames; ++t) {
    const uint32_t n = get_u32(is);
    int label = is.get();
    require(label != EOF, Errc::corrupt_file, "read_sequence: truncated label");
    rec.labels.push_back(uint8_t(label ? 1 : 0));
    Mat f(n, 3);
    for (uint32_t i = 0; i < n; ++i)
      for (int d = 0; d < 3; ++d) f(i, d) = get_f64(is);
    require(f.allFinite(), Errc::invalid_frame,
            "read_sequence: non-finite coordinates in " + path);
    rec.frames.push_back(std::move(f));
  }
  return rec;
}

SequenceRecord ingest_depth_dir(const std::string& dir) {
  const fs::path root(dir);
  require(fs::is_directory(root), Errc::data_not_found, "ingest_depth_dir: no such directory " + dir);

  CameraIntrinsics intr;
  {
    std::ifstream is(root / "intrinsics.txt");
    require(bool(is), Errc::data_not_found, "ingest_depth_dir: missing intrinsics.txt");
    std::string line;
    while (std::getline(is, line)) {
      auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::istringstream key(line.substr(0, eq)), value(line.substr(eq + 1));
      std::string k;
      key >> k;
      if (k == "fx") value >> intr.fx;
      else if (k == "fy") value >> intr.fy;
      else if (k == "cx") value >> intr.cx;
      else if (k == "cy") value >> intr.cy;
      else if (k == "width") value >> intr.width;
      else if (k == "height") value >> intr.height;
    }
  }
  intr.validate();

  std::vector<fs::path> frame_files;
  for (const auto& e : fs::directory_iterator(root)) {
    const std::string name = e.path().filename().string();
    if (name.rfind("frame_", 0) == 0 && e.path().extension() == ".bin")
      frame_files.push_back(e.path());
  }
  require(!frame_files.empty(), Errc::data_not_found, "ingest_depth_dir: no frame_*.bin files");
  std::sort(frame_files.begin(), frame_files.end());

  SequenceRecord rec;
  rec.id = root.filename().string();
  rec.metadata = "source = backprojected\n";
  for (const auto& f : frame_files) {
    std::ifstream is(f, std::ios::binary);
    require(bool(is), Errc::io_error, "ingest_depth_dir: cannot open " + f.string());
    Mat depth(intr.height, intr.width);
    for (int v = 0; v < intr.height; ++v)
      for (int u = 0; u < intr.width; ++u) depth(v, u) = get_f64(is);
    rec.frames.push_back(backproject_depth(depth, intr).points);
    rec.labels.push_back(0);
  }

  std::ifstream labels(root / "labels.txt");
  if (labels) {
    for (size_t t = 0; t < rec.frames.size(); ++t) {
      int v = 0;
      require(bool(labels >> v), Errc::corrupt_file,
              "ingest_depth_dir: labels.txt shorter than the frame list");
      rec.labels[t] = uint8_t(v ? 1 : 0);
    }
  }
  return rec;
}

std::vector<std::string> list_sequence_files(const std::string& dir) {
  require(fs::is_directory(dir), Errc::data_not_found, "no such data directory: " + dir);
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".pcvs") files.push_back(e.path().string());
  require(!files.empty(), Errc::data_not_found, "no .pcvs sequences under " + dir);
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace lvad
