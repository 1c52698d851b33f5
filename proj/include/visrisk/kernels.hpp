#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference version and,
// where the build and CPU allow, an AVX2 version selected at runtime. The
// vector versions evaluate the same per-element operation sequence as the
// scalar ones (no FMA, no reassociation) and therefore agree bit-for-bit.

#include <cstddef>
#include <string_view>

namespace visrisk::kernels {

struct KernelTable {
    std::string_view name;

    /// out[i] = sum over observed k (ascending) of (x[k] - refs_t[k * units + i])^2.
    /// `refs_t` is dimension-major: all units' k-th components are contiguous.
    void (*masked_sq_distances)(const double* x, const unsigned char* mask, std::size_t dim,
                                const double* refs_t, std::size_t units, double* out);

    /// y[k] += a * x[k].
    void (*axpy)(double a, const double* x, double* y, std::size_t n);

    /// Fruchterman-Reingold repulsion on node (px, py) from each of n nodes:
    /// (fx[j], fy[j]) = (dx, dy) * k2 / (dx^2 + dy^2), dx = px - xs[j]; zero when coincident.
    void (*repulsion)(double px, double py, const double* xs, const double* ys, std::size_t n, double k2,
                      double* fx, double* fy);
};

const KernelTable& scalar_kernels();

/// nullptr when AVX2 was not compiled in or the CPU lacks it.
const KernelTable* avx2_kernels();

/// Best available table, resolved once. Setting VISRISK_KERNELS=scalar in the
/// environment forces the reference kernels.
const KernelTable& active_kernels();

}  // namespace visrisk::kernels
