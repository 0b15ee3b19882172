#include "jbmir/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string_view>

namespace jbmir::kernels {
namespace {

const KernelTable* select_from_environment() {
    const char* env = std::getenv("JBMIR_SIMD");
    const std::string_view choice = env ? env : "auto";
    if (choice == "scalar") return &scalar_table();
    if (choice == "avx2") {
        if (!cpu_has_avx2()) throw std::runtime_error("JBMIR_SIMD=avx2 requested but the CPU lacks AVX2/FMA");
        return avx2_table();
    }
    if (cpu_has_avx2()) return avx2_table();
    return &scalar_table();
}

std::atomic<const KernelTable*>& slot() {
    static std::atomic<const KernelTable*> table{select_from_environment()};
    return table;
}

}  // namespace

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    return avx2_table() != nullptr && __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

void force(Isa isa) {
    if (isa == Isa::scalar) {
        slot().store(&scalar_table(), std::memory_order_release);
        return;
    }
    if (!cpu_has_avx2()) throw std::runtime_error("AVX2 kernels unavailable on this CPU");
    slot().store(avx2_table(), std::memory_order_release);
}

const char* name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

}  // namespace jbmir::kernels
