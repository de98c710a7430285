#pragma once

#include <span>
#include <string>
#include <vector>

#include "rcc/network.hpp"

namespace rcc {

struct GradCheckConfig {
  double step = 1e-5;
  double tolerance = 1e-6;
  /// Denominator floor of the relative error, so that gradients that are
  /// zero up to rounding compare on an absolute scale.
  double scale_floor = 1e-4;
};

struct TensorCheck {
  std::string name;
  std::size_t checked = 0;
  std::size_t failures = 0;
  /// Entries whose +/- step changed a ReLU or pooling branch; the central
  /// difference there spans a kink and is not compared.
  std::size_t kinks = 0;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<TensorCheck> tensors;
  bool passed() const;
};

/// |a - n| / max(|a|, |n|, floor)
double relative_error(double analytic, double numeric, double floor);

/// Compares every backprop gradient entry against a central difference of
/// the mean batch loss. The perturbed passes use compensated arithmetic and
/// recompute only the touched unit and the layers after it. An entry whose
/// perturbation flips any ReLU or pooling branch is counted as a kink rather
/// than compared; a tensor with no smooth entry left fails.
GradCheckReport gradient_check(std::span<const Sample> batch, const NetworkParams& params,
                               const GradCheckConfig& cfg = {});

}  // namespace rcc
