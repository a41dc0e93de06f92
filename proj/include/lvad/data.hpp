#pragma once

#include <string>
#include <vector>

#include "lvad/common.hpp"
#include "lvad/rng.hpp"

namespace lvad {

// One frame of raw 3D points, meters. Rows are points.
struct PointCloudFrame {
  Mat points;  // N x 3
};

// Throws InvalidFrame / EmptyFrame when the frame is unusable.
void validate_frame(const PointCloudFrame& frame);

struct CameraIntrinsics {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;
  void validate() const;
};

// A point cloud video with per-frame binary labels and a free-form
// key=value metadata block (source, category, generator settings).
struct SequenceRecord {
  std::string id;
  std::vector<Mat> frames;  // each N_t x 3
  std::vector<uint8_t> labels;
  std::string metadata;

  // First value of `key = ...` in the metadata block, or "" if absent.
  std::string meta_value(const std::string& key) const;
};

bool operator==(const SequenceRecord& a, const SequenceRecord& b);

struct SyntheticConfig {
  int frames = 25;
  int points = 256;
  int actors = 2;
  double speed_min = 0.05;  // per-frame centroid displacement bounds
  double speed_max = 0.15;
  double radius = 0.25;     // blob standard radius, meters
  double noise_std = 0.01;
  std::string anomaly;      // "", "velocity-jump", "teleport", "shape-collapse", "extra-object"
  int onset_min = 10;       // inclusive onset range, 0-based frame index
  int onset_max = 14;
  uint64_t seed = 0;

  void validate() const;
};

// Gaussian blobs on constant-velocity trajectories; the configured anomaly
// perturbs the scene from a seeded onset frame onward and labels those frames.
SequenceRecord generate_synthetic_video(const SyntheticConfig& cfg, const std::string& id);

// Pinhole back-projection: pixel (u, v) with depth z > 0 maps to
// ((u-cx) z / fx, (v-cy) z / fy, z). Non-finite or non-positive depths drop.
PointCloudFrame backproject_depth(const Mat& depth, const CameraIntrinsics& intrinsics);

// Uniform subsample without replacement when over target, duplicate-padding
// when under. Output has exactly n_target points.
PointCloudFrame downsample_frame(const PointCloudFrame& frame, int n_target, uint64_t seed);

// PCVS container (see docs/FORMATS.md for the byte layout).
void write_sequence(const SequenceRecord& record, const std::string& path);
SequenceRecord read_sequence(const std::string& path);

// Reads a directory holding intrinsics.txt, frame_*.bin depth rasters
// (width*height float64 little-endian, row-major) and an optional labels.txt,
// and back-projects every frame.
SequenceRecord ingest_depth_dir(const std::string& dir);

// Sorted *.pcvs paths under dir. Throws DataNotFound when none exist.
std::vector<std::string> list_sequence_files(const std::string& dir);

}  // namespace lvad
