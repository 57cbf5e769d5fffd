#pragma once

#include <cstdint>

#include "kfp/grid.hpp"

namespace kfp {

/// Seeded smooth random field: a short sum of separable trigonometric modes
/// with random integer frequencies, phases and amplitudes. The same seed
/// gives the same closed-form function on any grid over the same box, which
/// makes the fields usable across refinement levels.
///
/// With vanish_v_boundary the v factors are pure sine modes in normalized
/// coordinates, so the field is v-compactly supported in the discrete sense.
ScalarField random_trig_field(const GridSpec& g, std::uint64_t seed, int n_modes = 4,
                              bool vanish_v_boundary = false);

} // namespace kfp
