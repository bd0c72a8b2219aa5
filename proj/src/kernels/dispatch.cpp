#include <cstdlib>
#include <cstring>

#include "dtwc/kernels.hpp"

// TODO: add a NEON backend for aarch64; scalar is the fallback there today.

namespace dtwc::kernels {

namespace {

const Backend kScalar = {"scalar", scalar::dot, scalar::axpy, scalar::scale, scalar::sum};

#if defined(DTWC_HAVE_AVX2)
const Backend kAvx2 = {"avx2", avx2::dot, avx2::axpy, avx2::scale, avx2::sum};
#endif

const Backend& select() {
    const char* forced = std::getenv("DTWC_SIMD");
    if (forced != nullptr && std::strcmp(forced, "scalar") == 0) return kScalar;
#if defined(DTWC_HAVE_AVX2)
    if (forced != nullptr && std::strcmp(forced, "avx2") == 0) return kAvx2;
    if (forced == nullptr && cpu_supports_avx2()) return kAvx2;
#endif
    return kScalar;
}

} // namespace

bool cpu_supports_avx2() {
#if defined(DTWC_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Backend& active() {
    static const Backend& backend = select();
    return backend;
}

std::string backend_name() { return active().name; }

} // namespace dtwc::kernels
