#pragma once

#include <cstddef>
#include <cstdint>

// Data-parallel inner loops. Every kernel has a portable scalar reference
// implementation and an AVX2 variant; the variant is chosen once at runtime
// from the CPU feature flags (override with JBMIR_SIMD=scalar|avx2).
//
// Elementwise kernels produce bit-identical results across variants.
// Reductions differ only by summation order.

namespace jbmir::kernels {

enum class Isa { scalar, avx2 };

struct CsrView {
    std::size_t rows = 0;
    const std::int64_t* row_ptr = nullptr;
    const std::int32_t* cols = nullptr;
    const double* vals = nullptr;
};

struct KernelTable {
    Isa isa;

    double (*dot)(const double* a, const double* b, std::size_t n);
    // sum_k (a_k - b_k)^2
    double (*sq_dist)(const double* a, const double* b, std::size_t n);
    // y = A x
    void (*spmv)(const CsrView& a, const double* x, double* y);
    // sum_k v_k^2 (gx_k^2 + gy_k^2)
    double (*smooth_energy)(const double* gx, const double* gy, const double* v, std::size_t n);
    // sum_k (eps |g_k|^2 + (1 - v_k)^2 / (4 eps)) * (1 + gamma (vo_k - v_k)^2); vo may be null (weight 1)
    double (*edge_energy)(const double* gx, const double* gy, const double* v, const double* vo, double eps,
                          double gamma, std::size_t n);
    // ox = w * gx, oy = w * gy
    void (*scale_pair)(const double* w, const double* gx, const double* gy, double* ox, double* oy,
                       std::size_t n);
    // out = clamp(x - t g, lo, hi)
    void (*projected_step)(const double* x, const double* g, double t, double lo, double hi, double* out,
                           std::size_t n);
    // Pointwise pieces of the edge-term derivative with respect to v:
    //   w_k    = 1 + gamma (vo_k - v_k)^2            (1 when vo is null)
    //   pt_k   = -w_k (1 - v_k) / (2 eps) - 2 gamma (vo_k - v_k) a_k,  a_k = eps|g_k|^2 + (1-v_k)^2/(4 eps)
    void (*edge_grad_pointwise)(const double* gx, const double* gy, const double* v, const double* vo,
                                double eps, double gamma, double* w, double* pt, std::size_t n);
    // out_k += scale * (v_k - vo_k) * a_k with a_k built from (gx, gy, vo) and eps
    void (*edge_cross_grad)(const double* gx, const double* gy, const double* vo, const double* v, double eps,
                            double scale, double* out, std::size_t n);
};

const KernelTable& scalar_table();
/// Null when the binary was built without AVX2 support.
const KernelTable* avx2_table();
bool cpu_has_avx2();

/// Table in use for this process.
const KernelTable& active();
/// Pins the active table; throws std::runtime_error when the ISA is unavailable.
void force(Isa isa);
const char* name(Isa isa);

}  // namespace jbmir::kernels
