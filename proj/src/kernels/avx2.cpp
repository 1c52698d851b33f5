// Compiled with -mavx2 (see src/CMakeLists.txt); only reached after a runtime CPU check.
#include <immintrin.h>

#include "visrisk/kernels.hpp"

namespace visrisk::kernels::avx2 {
namespace {

void masked_sq_distances(const double* x, const unsigned char* mask, std::size_t dim, const double* refs_t,
                         std::size_t units, double* out) {
    const std::size_t body = units - units % 4;
    for (std::size_t i = 0; i < units; ++i) out[i] = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
        if (!mask[k]) continue;
        const double xk = x[k];
        const __m256d xv = _mm256_set1_pd(xk);
        const double* r = refs_t + k * units;
        std::size_t i = 0;
        for (; i < body; i += 4) {
            const __m256d diff = _mm256_sub_pd(xv, _mm256_loadu_pd(r + i));
            const __m256d acc = _mm256_loadu_pd(out + i);
            _mm256_storeu_pd(out + i, _mm256_add_pd(acc, _mm256_mul_pd(diff, diff)));
        }
        for (; i < units; ++i) {
            const double diff = xk - r[i];
            out[i] = out[i] + diff * diff;
        }
    }
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    const __m256d av = _mm256_set1_pd(a);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d prod = _mm256_mul_pd(av, _mm256_loadu_pd(x + k));
        _mm256_storeu_pd(y + k, _mm256_add_pd(_mm256_loadu_pd(y + k), prod));
    }
    for (; k < n; ++k) y[k] = y[k] + a * x[k];
}

void repulsion(double px, double py, const double* xs, const double* ys, std::size_t n, double k2, double* fx,
               double* fy) {
    const __m256d pxv = _mm256_set1_pd(px);
    const __m256d pyv = _mm256_set1_pd(py);
    const __m256d k2v = _mm256_set1_pd(k2);
    const __m256d zero = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const __m256d dx = _mm256_sub_pd(pxv, _mm256_loadu_pd(xs + j));
        const __m256d dy = _mm256_sub_pd(pyv, _mm256_loadu_pd(ys + j));
        const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy));
        const __m256d coincident = _mm256_cmp_pd(d2, zero, _CMP_EQ_OQ);
        const __m256d s = _mm256_div_pd(k2v, d2);
        _mm256_storeu_pd(fx + j, _mm256_blendv_pd(_mm256_mul_pd(dx, s), zero, coincident));
        _mm256_storeu_pd(fy + j, _mm256_blendv_pd(_mm256_mul_pd(dy, s), zero, coincident));
    }
    for (; j < n; ++j) {
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

const KernelTable& table() {
    static const KernelTable t{"avx2", masked_sq_distances, axpy, repulsion};
    return t;
}

}  // namespace visrisk::kernels::avx2
