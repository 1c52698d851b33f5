#include "visrisk/kernels.hpp"

namespace visrisk::kernels {
namespace {

void masked_sq_distances(const double* x, const unsigned char* mask, std::size_t dim, const double* refs_t,
                         std::size_t units, double* out) {
    for (std::size_t i = 0; i < units; ++i) out[i] = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        if (!mask[k]) continue;
        const double xk = x[k];
        const double* r = refs_t + k * units;
        for (std::size_t i = 0; i < units; ++i) {
            const double diff = xk - r[i];
            out[i] = out[i] + diff * diff;
        }
    }
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) y[k] = y[k] + a * x[k];
}

void repulsion(double px, double py, const double* xs, const double* ys, std::size_t n, double k2, double* fx,
               double* fy) {
    for (std::size_t j = 0; j < n; ++j) {
        const double dx = px - xs[j];
        const double dy = py - ys[j];
        const double d2 = dx * dx + dy * dy;
        if (d2 == 0.0) {
            fx[j] = 0.0;
            fy[j] = 0.0;
            continue;
        }
        const double s = k2 / d2;
        fx[j] = dx * s;
        fy[j] = dy * s;
    }
}

}  // namespace

const KernelTable& scalar_kernels() {
    static const KernelTable table{"scalar", masked_sq_distances, axpy, repulsion};
    return table;
}

}  // namespace visrisk::kernels
