#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oodgauge/model.hpp"
#include "oodgauge/scoring.hpp"

namespace oodgauge {

struct LandscapeSpec {
  double extent = 6.5;   // half-width of the square window, covers r = 5.9
  int resolution = 200;  // pixels per side
  Scorer scorer = Scorer::baseline;
};

struct LandscapeImage {
  int resolution = 0;
  double raw_min = 0.0;  // normalization range recorded in the sidecar
  double raw_max = 0.0;
  std::vector<std::uint8_t> pixels;  // row-major; row 0 is y = +extent
};

// Scores every pixel of the [-extent, extent]^2 grid and normalizes
// linearly to 8-bit grayscale, darker = lower score (more OOD). A constant
// score field renders as a uniform mid-gray image. Requires a 2-d input
// model; `stats` is required for the md scorer.
LandscapeImage compute_landscape(const MlpParams& model,
                                 const LandscapeSpec& spec,
                                 const MahalanobisStats* stats,
                                 const OdinParams& odin = {});

// PGM (P5) plus a "<path>.minmax" sidecar holding the normalization range.
void write_landscape(const LandscapeImage& image, const std::string& path);

void render_landscape(const MlpParams& model, const LandscapeSpec& spec,
                      const MahalanobisStats* stats, const OdinParams& odin,
                      const std::string& path);

}  // namespace oodgauge
