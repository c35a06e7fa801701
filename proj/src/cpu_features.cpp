#include "icmh/cpu_features.hpp"

namespace icmh::cpu {

bool has_avx2() {
#if defined(__x86_64__) && defined(__GNUC__)
    static const bool ok =
        __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    return ok;
#else
    return false;
#endif
}

}  // namespace icmh::cpu
