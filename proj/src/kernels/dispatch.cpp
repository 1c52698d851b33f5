#include <cstdlib>
#include <string_view>

#include "visrisk/kernels.hpp"

namespace visrisk::kernels {

#if defined(VISRISK_HAVE_AVX2)
namespace avx2 {
const KernelTable& table();
}
#endif

const KernelTable* avx2_kernels() {
#if defined(VISRISK_HAVE_AVX2)
    static const bool supported = [] {
        __builtin_cpu_init();
        return __builtin_cpu_supports("avx2") != 0;
    }();
    return supported ? &avx2::table() : nullptr;
#else
    return nullptr;
#endif
}

const KernelTable& active_kernels() {
    static const KernelTable& chosen = []() -> const KernelTable& {
        const char* env = std::getenv("VISRISK_KERNELS");
        if (env && std::string_view(env) == "scalar") return scalar_kernels();
        if (const auto* t = avx2_kernels()) return *t;
        return scalar_kernels();
    }();
    return chosen;
}

}  // namespace visrisk::kernels
