#include <cstring>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "lvad.h"

namespace fs = std::filesystem;

namespace {

const char* kMicroConfig =
    "[model]\n"
    "space = hyperbolic\nloss = lorentzian\nmode = prediction\n"
    "layers = 1\nheads = 2\nchannels = 7\nframes = 2\npoints = 12\n"
    "encoder_hidden = 8\ndecoder_hidden = 8\ndropout = 0.0\n"
    "[train]\nepochs = 1\nlr = 1e-3\nbatch = 4\nseed = 21\nwindow = 10\n"
    "[data]\ntrain_sequences = 4\ntest_sequences = 4\nanomalous_fraction = 0.5\n"
    "train_frames = 5\ntest_frames = 12\nactors = 2\nonset_min = 5\nonset_max = 7\n";

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str(const std::string& sub = "") const { return (path / sub).string(); }
};

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::strlen(lvad_version()) > 0);
  CHECK(std::string(lvad_status_name(LVAD_OK)) == "Ok");
  CHECK(std::string(lvad_status_name(LVAD_E_CORRUPT_FILE)) == "CorruptFile");
}

TEST_CASE("config handling through the C API") {
  lvad_config* cfg = nullptr;
  REQUIRE(lvad_config_parse(kMicroConfig, &cfg) == LVAD_OK);
  REQUIRE(cfg != nullptr);

  char* text = nullptr;
  REQUIRE(lvad_config_report_params(cfg, &text) == LVAD_OK);
  CHECK(std::string(text).find("total trainable:") != std::string::npos);
  lvad_string_free(text);
  lvad_config_free(cfg);

  SUBCASE("invalid configs produce the right status and a message") {
    lvad_config* bad = nullptr;
    lvad_status s = lvad_config_parse("[model]\nheads = 3\nchannels = 7\n", &bad);
    CHECK(s == LVAD_E_INVALID_CONFIG);
    CHECK(std::strlen(lvad_last_error()) > 0);
  }

  SUBCASE("null arguments are refused") {
    CHECK(lvad_config_parse(nullptr, nullptr) == LVAD_E_INVALID_ARGUMENT);
  }

  SUBCASE("defaults load") {
    lvad_config* def = nullptr;
    REQUIRE(lvad_config_default(&def) == LVAD_OK);
    lvad_config_free(def);
  }
}

TEST_CASE("full workflow through the C API") {
  TempDir dir("lvad_capi_flow");
  lvad_config* cfg = nullptr;
  REQUIRE(lvad_config_parse(kMicroConfig, &cfg) == LVAD_OK);

  REQUIRE(lvad_gen_data(cfg, dir.str().c_str()) == LVAD_OK);
  REQUIRE(lvad_train(cfg, dir.str().c_str(), dir.str("m.ckpt").c_str(), dir.str("m.log").c_str()) ==
          LVAD_OK);
  REQUIRE(lvad_score(cfg, dir.str("m.ckpt").c_str(), dir.str().c_str(), "test",
                     dir.str("scores").c_str()) == LVAD_OK);

  double raw = -1, smoothed = -1;
  REQUIRE(lvad_eval(dir.str("scores").c_str(), dir.str("test").c_str(),
                    dir.str("report.csv").c_str(), &raw, &smoothed) == LVAD_OK);
  CHECK(raw >= 0.0);
  CHECK(raw <= 1.0);
  CHECK(smoothed >= 0.0);
  CHECK(smoothed <= 1.0);
  CHECK(fs::exists(dir.str("report.csv")));

  SUBCASE("seed override changes the trained checkpoint") {
    REQUIRE(lvad_config_set_seed(cfg, 999) == LVAD_OK);
    REQUIRE(lvad_train(cfg, dir.str().c_str(), dir.str("m2.ckpt").c_str(),
                       dir.str("m2.log").c_str()) == LVAD_OK);
    std::ifstream a(dir.str("m.ckpt"), std::ios::binary), b(dir.str("m2.ckpt"), std::ios::binary);
    std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa != sb);
  }

  SUBCASE("gradient check reports a small error") {
    char* report = nullptr;
    double max_rel = 1.0;
    REQUIRE(lvad_check_grad(cfg, 1e-5, &report, &max_rel) == LVAD_OK);
    CHECK(max_rel < 1e-4);
    CHECK(std::string(report).find("overall") != std::string::npos);
    lvad_string_free(report);
  }

  lvad_config_free(cfg);
}

TEST_CASE("error paths surface precise status codes") {
  TempDir dir("lvad_capi_err");
  lvad_config* cfg = nullptr;
  REQUIRE(lvad_config_parse(kMicroConfig, &cfg) == LVAD_OK);

  CHECK(lvad_train(cfg, dir.str("missing").c_str(), dir.str("x.ckpt").c_str(),
                   dir.str("x.log").c_str()) == LVAD_E_DATA_NOT_FOUND);
  CHECK(lvad_eval(dir.str("no_scores").c_str(), nullptr, nullptr, nullptr, nullptr) ==
        LVAD_E_DATA_NOT_FOUND);

  {
    std::ofstream os(dir.str("fake.ckpt"), std::ios::binary);
    os << "garbage bytes here";
  }
  CHECK(lvad_score(cfg, dir.str("fake.ckpt").c_str(), dir.str().c_str(), "test",
                   dir.str("s").c_str()) == LVAD_E_CORRUPT_FILE);

  lvad_config_free(cfg);
}

TEST_CASE("auroc and moving average helpers") {
  const double scores[4] = {0.9, 0.8, 0.2, 0.1};
  const uint8_t labels[4] = {1, 1, 0, 0};
  double out = 0;
  REQUIRE(lvad_auroc(scores, labels, 4, &out) == LVAD_OK);
  CHECK(out == doctest::Approx(1.0));

  const uint8_t ones[4] = {1, 1, 1, 1};
  CHECK(lvad_auroc(scores, ones, 4, &out) == LVAD_E_DEGENERATE_LABELS);

  const double raw[5] = {10, 0, 0, 0, 0};
  double sm[5];
  REQUIRE(lvad_moving_average(raw, 5, 2, sm) == LVAD_OK);
  CHECK(sm[0] == 10.0);
  CHECK(sm[1] == 5.0);
  CHECK(sm[2] == 0.0);
  CHECK(lvad_moving_average(raw, 5, 0, sm) == LVAD_E_INVALID_WINDOW);
}

TEST_CASE("depth ingestion through the C API") {
  TempDir dir("lvad_capi_depth");
  {
    std::ofstream os(dir.str("intrinsics.txt"));
    os << "fx = 10\nfy = 10\ncx = 2\ncy = 2\nwidth = 4\nheight = 4\n";
  }
  {
    std::ofstream os(dir.str("frame_0000.bin"), std::ios::binary);
    for (int i = 0; i < 16; ++i) {
      double d = 1.5;
      os.write(reinterpret_cast<const char*>(&d), 8);
    }
  }
  const std::string out = dir.str("depth.pcvs");
  REQUIRE(lvad_ingest_depth(dir.str().c_str(), out.c_str()) == LVAD_OK);
  CHECK(fs::exists(out));
  CHECK(lvad_ingest_depth(dir.str("nope").c_str(), out.c_str()) == LVAD_E_DATA_NOT_FOUND);
}
