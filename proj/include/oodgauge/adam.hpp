#pragma once

#include <cstdint>
#include <vector>

#include "oodgauge/matrix.hpp"

namespace oodgauge {

struct AdamHyper {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Per-parameter first/second moment estimates plus the shared step counter.
struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::int64_t t = 0;

  static AdamState init(const std::vector<Matrix*>& params);
};

// One bias-corrected Adam update, in place. `params`, `grads` and the state
// must line up one-to-one with matching shapes.
void adam_step(const std::vector<Matrix*>& params,
               const std::vector<Matrix>& grads, AdamState& state,
               const AdamHyper& hyper);

}  // namespace oodgauge
