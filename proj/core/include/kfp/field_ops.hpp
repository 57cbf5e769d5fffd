#pragma once

#include "kfp/grid.hpp"

namespace kfp {

/// Discrete transport Yu = v . grad_x u - d_t u.
///
/// Each x-derivative is the one-sided difference toward +sign(v_i), i.e.
/// the stencil pulls from the face where v . N_x > 0, which is where
/// Kolmogorov data lives; the time derivative is the backward difference.
/// Nodes missing the upwind neighbor use the difference from the available
/// side, so the operator is defined on the whole grid.
ScalarField apply_Y(const ScalarField& u);

} // namespace kfp
