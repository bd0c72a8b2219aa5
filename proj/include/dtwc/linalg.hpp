#pragma once

#include <cstddef>

// Row-major dense helpers layered on the dispatched kernels. These are the
// inner loops of embedding training and the encoder; keep them allocation
// free.

namespace dtwc::linalg {

// C(m x n) += A(m x k) * B(k x n)
void matmul_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n);

// C(m x n) += A(m x k) * B(n x k)^T
void matmul_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n);

// C(k x n) += A(m x k)^T * B(m x n)
void matmul_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t n);

double l2_norm(const double* x, std::size_t n);

} // namespace dtwc::linalg
