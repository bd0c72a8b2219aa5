#pragma once

#include <cstddef>
#include <string>

// Double-precision vector kernels behind a runtime-dispatched function
// pointer table. The scalar variants are the reference semantics; the
// AVX2/FMA variants must agree with them within floating-point
// reassociation tolerance (see tests/test_kernels.cpp).

namespace dtwc::kernels {

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double* x, double alpha, std::size_t n);
double sum(const double* x, std::size_t n);
} // namespace scalar

#if defined(DTWC_HAVE_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double* x, double alpha, std::size_t n);
double sum(const double* x, std::size_t n);
} // namespace avx2
#endif

using dot_fn = double (*)(const double*, const double*, std::size_t);
using axpy_fn = void (*)(double, const double*, double*, std::size_t);
using scale_fn = void (*)(double*, double, std::size_t);
using sum_fn = double (*)(const double*, std::size_t);

struct Backend {
    const char* name;
    dot_fn dot;
    axpy_fn axpy;
    scale_fn scale;
    sum_fn sum;
};

// Selected once per process: AVX2+FMA when the CPU supports it, scalar
// otherwise. DTWC_SIMD=scalar|avx2 overrides detection.
const Backend& active();
std::string backend_name();

// True when the binary carries the AVX2 kernels and the CPU can run them.
bool cpu_supports_avx2();

inline double dot(const double* a, const double* b, std::size_t n) { return active().dot(a, b, n); }
inline void axpy(double alpha, const double* x, double* y, std::size_t n) { active().axpy(alpha, x, y, n); }
inline void scale(double* x, double alpha, std::size_t n) { active().scale(x, alpha, n); }
inline double sum(const double* x, std::size_t n) { return active().sum(x, n); }

} // namespace dtwc::kernels
