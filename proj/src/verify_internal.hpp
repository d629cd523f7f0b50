#pragma once

#include <json.hpp>

#include "membrane/density.hpp"
#include "membrane/geometry.hpp"

namespace membrane::detail {

nlohmann::json model_json(const ModelParams& p);

/// Smooth bump phi(y) = exp(-|y - c|^2 / 2) with c slightly off the membrane
/// and off the drift axis, so every term of the flux condition is exercised.
TestFunction gaussian_bump(const SpaceDecomposition& dec);

/// Tolerances used by the finite-difference residual checks.
QuadratureSpec pde_quadrature_spec();

}  // namespace membrane::detail
