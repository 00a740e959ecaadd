#ifndef TCLAB_DIFFUSION_MODEL_HPP
#define TCLAB_DIFFUSION_MODEL_HPP

#include "tclab/types.hpp"

namespace tclab {

/// Brownian motion on (0,1) killed at the boundary, represented through its
/// closed-form Green kernel on a uniform interior grid x_i = i/(n+1).
/// The reference measure is Lebesgue.
struct DiffusionModel {
    int grid_n = 1000;
    Vec grid;

    double spacing() const { return 1.0 / (grid_n + 1); }
};

DiffusionModel make_diffusion(int grid_n = 1000);

/// G(x,y) = 2 min(x,y) (1 - max(x,y)); throws OutOfDomain off (0,1)^2.
double bm_green(double x, double y);

/// alpha-order kernel G_alpha(x,y); reduces to bm_green at alpha = 0.
double bm_green_alpha(double x, double y, double alpha);

/// Piecewise-linear evaluation of a grid function, pinned to 0 at {0,1}.
double grid_interp(const DiffusionModel& model, const Vec& values, double x);

/// Trapezoid integral over (0,1) of a grid function (zero boundary values).
double grid_quadrature(const DiffusionModel& model, const Vec& values);

/// Boundary-decay witness for the C0 class: linear extrapolation of the two
/// cells nearest each endpoint, relative to the sup norm.
bool vanishes_at_boundary(const DiffusionModel& model, const Vec& values, double rel_tol = 1e-3);

}  // namespace tclab

#endif
