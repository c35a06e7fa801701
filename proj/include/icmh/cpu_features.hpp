#pragma once

namespace icmh::cpu {

// True when the running CPU supports AVX2 and FMA.
bool has_avx2();

}  // namespace icmh::cpu
