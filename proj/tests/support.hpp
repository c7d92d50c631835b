#pragma once

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "gjsscc/classifier.hpp"
#include "gjsscc/imaging.hpp"
#include "gjsscc/shapley.hpp"

namespace gjsscc::test {

inline Image textured(int w, int h, int channels = 1) {
  Image img(w, h, channels);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < channels; ++c) img.at(x, y, c) = static_cast<std::uint8_t>((x * 7 + y * 13 + c * 31) % 256);
  return img;
}

inline RegionMask box_mask(int w, int h, const Rect& r) {
  RegionMask m(w, h);
  for (int y = r.y0; y < r.y1(); ++y)
    for (int x = r.x0; x < r.x1(); ++x) m.set(x, y);
  return m;
}

/// 32x32 gray image whose object box [4, 28)^2 is split into a rows x cols
/// grid. The three prototype templates agree everywhere except in two planted
/// regions: in `discriminative` the image matches the target class 1 and both
/// competitors differ; in `misleading` the image matches class 2 and the
/// target template differs. All other regions are ignored by the classifier.
struct PlantedInstance {
  Image image;
  RegionMask object;
  RegionMask background;
  RegionSet regions;
  std::optional<PrototypeModel> model;
  CodingProfile profile;
  TransmissionOptions transmission{StreamFormat::raw, true};
  int target = 1;
  int discriminative = 0;
  int misleading = 0;

  CoalitionContext context() { return {image, regions, background, profile, transmission, *model, target}; }

  const RegionMask& mask_of(int id) const {
    for (const auto& r : regions)
      if (r.id == id) return r.mask;
    throw std::out_of_range("no region " + std::to_string(id));
  }
};

// A black pixel read at BER 0.2014 has mean 51.4, so a competitor template
// at 100 sits almost exactly at the decision boundary of an untreated pixel,
// while a treated pixel (mean 2.6) clearly favours the black template.
inline constexpr std::uint8_t kPlantedContrast = 100;
inline constexpr double kPlantedBeta = 1.0 / 256.0;

inline PlantedInstance planted_instance(int rows, int cols, int discriminative, int misleading, int trials = 8,
                                        std::uint64_t seed = 7) {
  PlantedInstance inst;
  const int w = 32, h = 32;
  inst.image = textured(w, h);
  inst.object = box_mask(w, h, {4, 4, 24, 24});
  inst.background = inst.object.complement();
  inst.regions = grid_presegment(inst.object, rows, cols);
  inst.discriminative = discriminative;
  inst.misleading = misleading;

  Image t1 = inst.image, t2 = inst.image, t3 = inst.image;
  for (const auto& r : inst.regions) {
    if (r.id != discriminative && r.id != misleading) continue;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!r.mask.test(x, y)) continue;
        inst.image.at(x, y) = 0;
        if (r.id == discriminative) {
          t1.at(x, y) = 0;
          t2.at(x, y) = kPlantedContrast;
          t3.at(x, y) = kPlantedContrast;
        } else {
          t1.at(x, y) = kPlantedContrast;
          t2.at(x, y) = 0;
          t3.at(x, y) = kPlantedContrast;
        }
      }
    }
  }
  inst.model.emplace(std::vector<Image>{t1, t2, t3}, kPlantedBeta);
  inst.profile.q_basic = 1;
  inst.profile.q_target = 50;
  inst.profile.ber_channel = 0.2014;
  inst.profile.ber_target = 0.01;
  inst.profile.trials = trials;
  inst.profile.master_seed = seed;
  return inst;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    auto base = std::filesystem::temp_directory_path() / "gjsscc-test-XXXXXX";
    std::string tmpl = base.string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace gjsscc::test
