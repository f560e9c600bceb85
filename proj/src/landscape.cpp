#include "oodgauge/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace oodgauge {

LandscapeImage compute_landscape(const MlpParams& model,
                                 const LandscapeSpec& spec,
                                 const MahalanobisStats* stats,
                                 const OdinParams& odin) {
  if (model.d_in() != 2) {
    throw std::invalid_argument(
        "landscape: requires a model with 2-d inputs");
  }
  if (spec.resolution < 2) {
    throw std::invalid_argument("landscape: resolution must be >= 2");
  }
  if (!(spec.extent > 0.0)) {
    throw std::invalid_argument("landscape: extent must be > 0");
  }
  if (spec.scorer == Scorer::md && stats == nullptr) {
    throw std::invalid_argument(
        "landscape: md scorer requires fitted Mahalanobis statistics");
  }

  const int res = spec.resolution;
  Matrix points(res * res, 2);
  for (int i = 0; i < res; ++i) {
    const double y = spec.extent - 2.0 * spec.extent * i / (res - 1);
    for (int j = 0; j < res; ++j) {
      const double x = -spec.extent + 2.0 * spec.extent * j / (res - 1);
      points(i * res + j, 0) = x;
      points(i * res + j, 1) = y;
    }
  }

  std::vector<double> scores;
  switch (spec.scorer) {
    case Scorer::baseline:
      scores = msp_scores(forward(model, points).logits, model.head);
      break;
    case Scorer::md:
      scores = md_scores(*stats, forward(model, points).features);
      break;
    case Scorer::odin:
      scores = odin_scores(model, points, odin);
      break;
  }

  LandscapeImage image;
  image.resolution = res;
  image.raw_min = *std::min_element(scores.begin(), scores.end());
  image.raw_max = *std::max_element(scores.begin(), scores.end());
  image.pixels.resize(scores.size());
  const double range = image.raw_max - image.raw_min;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (range == 0.0) {
      image.pixels[i] = 128;
    } else {
      const double unit = (scores[i] - image.raw_min) / range;
      image.pixels[i] = static_cast<std::uint8_t>(std::lround(255.0 * unit));
    }
  }
  return image;
}

void write_landscape(const LandscapeImage& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "P5\n" << image.resolution << ' ' << image.resolution << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw std::runtime_error("write failed: " + path);

  const std::string sidecar_path = path + ".minmax";
  std::ofstream sidecar(sidecar_path);
  if (!sidecar) {
    throw std::runtime_error("cannot open for writing: " + sidecar_path);
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf), "min %.17g\nmax %.17g\n", image.raw_min,
                image.raw_max);
  sidecar << buf;
  if (!sidecar) throw std::runtime_error("write failed: " + sidecar_path);
}

void render_landscape(const MlpParams& model, const LandscapeSpec& spec,
                      const MahalanobisStats* stats, const OdinParams& odin,
                      const std::string& path) {
  write_landscape(compute_landscape(model, spec, stats, odin), path);
}

}  // namespace oodgauge
