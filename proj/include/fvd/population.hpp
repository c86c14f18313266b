#pragma once

#include <cstddef>
#include <vector>

#include "fvd/diffusion.hpp"

namespace fvd {

struct Particle {
  State x;
  /// Index of the x_T draw this particle descends from.
  std::size_t lineage_id = 0;
  /// Sum of log G_s along the particle's survival/cloning history.
  double cum_log_potential = 0.0;
};

using Population = std::vector<Particle>;

}  // namespace fvd
