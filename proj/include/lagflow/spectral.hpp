#pragma once

#include "lagflow/grid_field.hpp"

namespace lagflow {

// solve Lap U = coeff * rho on a fully periodic grid; the k=0 mode (mean) is
// subtracted, so the returned potential has zero mean
GridField poisson_periodic(const GridField& rho, double coeff);

// spectral gradient of a periodic scalar field
GridField spectral_gradient(const GridField& scalar);

}  // namespace lagflow
