#include "tclab/diffusion_model.hpp"

#include <cmath>

namespace tclab {

DiffusionModel make_diffusion(int grid_n) {
    if (grid_n < 3) throw BadParameters("diffusion grid needs at least 3 interior points");
    DiffusionModel model;
    model.grid_n = grid_n;
    model.grid.resize(grid_n);
    const double h = 1.0 / (grid_n + 1);
    for (int i = 0; i < grid_n; ++i) model.grid(i) = (i + 1) * h;
    return model;
}

static void check_domain(double x, double y) {
    if (!(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0))
        throw OutOfDomain("green kernel arguments must lie in (0,1)");
}

double bm_green(double x, double y) {
    check_domain(x, y);
    return 2.0 * std::min(x, y) * (1.0 - std::max(x, y));
}

double bm_green_alpha(double x, double y, double alpha) {
    if (alpha < 0.0) throw BadParameters("kernel order must be nonnegative");
    if (alpha == 0.0) return bm_green(x, y);
    check_domain(x, y);
    // Generator (1/2) d^2/dx^2: homogeneous solutions sinh(s x), s = sqrt(2 alpha),
    // Wronskian-normalised to match G_0 as alpha -> 0.  Written with expm1 so
    // large orders neither overflow nor cancel:
    //   2 sinh(p) sinh(q) / (s sinh(s)) with p = s min, q = s (1 - max).
    const double s = std::sqrt(2.0 * alpha);
    const double p = s * std::min(x, y);
    const double q = s * (1.0 - std::max(x, y));
    return -std::exp(p + q - s) * std::expm1(-2.0 * p) * std::expm1(-2.0 * q) /
           (s * std::expm1(-2.0 * s));
}

double grid_interp(const DiffusionModel& model, const Vec& values, double x) {
    if (values.size() != model.grid_n) throw BadParameters("grid function has wrong size");
    if (!(x > 0.0 && x < 1.0)) throw OutOfDomain("evaluation point must lie in (0,1)");
    const double h = model.spacing();
    const double pos = x / h;  // node i sits at pos = i+1, so left ranges over [-1, n-1]
    const int left = static_cast<int>(std::floor(pos)) - 1;
    const double frac = pos - std::floor(pos);
    const double v_left = (left < 0) ? 0.0 : values(left);
    const double v_right = (left + 1 >= model.grid_n) ? 0.0 : values(left + 1);
    return v_left + frac * (v_right - v_left);
}

double grid_quadrature(const DiffusionModel& model, const Vec& values) {
    if (values.size() != model.grid_n) throw BadParameters("grid function has wrong size");
    return model.spacing() * values.sum();
}

bool vanishes_at_boundary(const DiffusionModel& model, const Vec& values, double rel_tol) {
    if (values.size() != model.grid_n || model.grid_n < 2)
        throw BadParameters("grid function has wrong size");
    const double sup = sup_norm(values);
    if (sup == 0.0) return true;
    const int n = model.grid_n;
    const double at_zero = 2.0 * values(0) - values(1);
    const double at_one = 2.0 * values(n - 1) - values(n - 2);
    return std::abs(at_zero) <= rel_tol * sup && std::abs(at_one) <= rel_tol * sup;
}

}  // namespace tclab
