#include "wst/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <iostream>

namespace wst::kernels {

#ifdef WST_HAVE_AVX2_TU
const Ops* avx2_ops_impl();
#endif

bool cpu_supports_avx2() {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const Ops* avx2_ops() {
#ifdef WST_HAVE_AVX2_TU
    if (cpu_supports_avx2()) return avx2_ops_impl();
#endif
    return nullptr;
}

namespace {

const Ops& resolve() {
    const char* env = std::getenv("WST_KERNELS");
    if (env != nullptr && std::strcmp(env, "scalar") == 0) return scalar_ops();
    if (env != nullptr && std::strcmp(env, "avx2") == 0) {
        if (const Ops* ops = avx2_ops()) return *ops;
        std::cerr << "wst: WST_KERNELS=avx2 requested but AVX2/FMA is "
                     "unavailable; using scalar kernels\n";
        return scalar_ops();
    }
    if (const Ops* ops = avx2_ops()) return *ops;
    return scalar_ops();
}

} // namespace

const Ops& active_ops() {
    static const Ops& ops = resolve();
    return ops;
}

std::string active_backend_name() { return active_ops().name; }

} // namespace wst::kernels
