#include "visrisk/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace visrisk::linalg {

SymmetricEigen symmetric_eigen(const Matrix& input) {
    const std::size_t n = input.rows();
    if (input.cols() != n) throw std::invalid_argument("symmetric_eigen: matrix not square");
    Matrix a = input;
    Matrix v(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

    double scale = 0.0;
    for (double x : a.data()) scale = std::max(scale, std::abs(x));

    for (int sweep = 0; sweep < 100 && scale > 0.0; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(off) <= 1e-15 * scale) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

    SymmetricEigen out{std::vector<double>(n), Matrix(n, n)};
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t col = order[r];
        out.values[r] = a(col, col);
        std::size_t lead = 0;
        for (std::size_t k = 1; k < n; ++k)
            if (std::abs(v(k, col)) > std::abs(v(lead, col))) lead = k;
        const double sign = v(lead, col) < 0.0 ? -1.0 : 1.0;
        for (std::size_t k = 0; k < n; ++k) out.vectors(r, k) = sign * v(k, col);
    }
    return out;
}

Moments complete_case_moments(const MaskedRows& rows) {
    const std::size_t n = rows.dim();
    Moments m{0, std::vector<double>(n, 0.0), Matrix(n, n, 0.0)};
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (!rows.complete(r)) continue;
        ++m.count;
        auto x = rows.values(r);
        for (std::size_t k = 0; k < n; ++k) m.mean[k] += x[k];
    }
    if (m.count == 0) return m;
    for (double& x : m.mean) x /= static_cast<double>(m.count);
    if (m.count < 2) return m;
    std::vector<double> centered(n);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (!rows.complete(r)) continue;
        auto x = rows.values(r);
        for (std::size_t k = 0; k < n; ++k) centered[k] = x[k] - m.mean[k];
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p; q < n; ++q) m.covariance(p, q) += centered[p] * centered[q];
    }
    const double denom = static_cast<double>(m.count - 1);
    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = p; q < n; ++q) {
            m.covariance(p, q) /= denom;
            m.covariance(q, p) = m.covariance(p, q);
        }
    return m;
}

}  // namespace visrisk::linalg
