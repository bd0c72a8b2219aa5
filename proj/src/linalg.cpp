#include "dtwc/linalg.hpp"

#include <cmath>

#include "dtwc/kernels.hpp"

namespace dtwc::linalg {

void matmul_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            if (arow[p] != 0.0) kernels::axpy(arow[p], b + p * n, crow, n);
        }
    }
}

void matmul_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            crow[j] += kernels::dot(arow, b + j * k, k);
        }
    }
}

void matmul_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        const double* brow = b + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            if (arow[p] != 0.0) kernels::axpy(arow[p], brow, c + p * n, n);
        }
    }
}

double l2_norm(const double* x, std::size_t n) { return std::sqrt(kernels::dot(x, x, n)); }

} // namespace dtwc::linalg
