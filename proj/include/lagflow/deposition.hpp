#pragma once

#include <cstdint>
#include <vector>

#include "lagflow/grid_field.hpp"
#include "lagflow/label_space.hpp"

namespace lagflow {

// kernels regularizing delta(x - x(xi)); both are partitions of unity
enum class DepositKernel { CIC, TSC };

// deposit an arbitrary per-label scalar weight * kernel onto grid nodes,
// normalized by node volume (a density); building block for rho, rho*v, l
GridField deposit_scalar(const FlowMap& map, const Grid& grid, const std::vector<double>& weight,
                         DepositKernel kernel = DepositKernel::CIC, const std::string& units = "");

GridField deposit_density(const FlowMap& map, const Grid& grid,
                          DepositKernel kernel = DepositKernel::CIC);

struct MomentumFields {
    GridField rho;        // mass density
    GridField momentum;   // rho * v
    GridField velocity;   // momentum / rho where rho > eps, else 0
    std::vector<std::uint8_t> vacuum_mask;  // 1 where the division was refused
    double eps_rho = 0.0;
};

MomentumFields deposit_momentum(const FlowMap& map, const Grid& grid,
                                DepositKernel kernel = DepositKernel::CIC);

// momentum deposition of p itself (the field l(x) of the canonical set)
GridField deposit_l(const FlowMap& map, const Grid& grid, DepositKernel kernel = DepositKernel::CIC);

struct ResidualResult {
    double norm = 0.0;   // L2 norm of the residual field
    GridField field;
};

// d rho/dt + div(rho v), centered time difference over three snapshots
ResidualResult continuity_residual(const GridField& rho_prev, const GridField& rho_mid,
                                   const GridField& rho_next, const GridField& v_mid, double dt);

// same but with the momentum density rho*v supplied directly
ResidualResult continuity_residual_momentum(const GridField& rho_prev, const GridField& rho_next,
                                            const GridField& momentum_mid, double dt);

// rho (dv/dt + (v.grad) v) + grad p
ResidualResult euler_residual(const GridField& v_prev, const GridField& v_mid,
                              const GridField& v_next, const GridField& rho_mid,
                              const GridField& p_mid, double dt);

}  // namespace lagflow
