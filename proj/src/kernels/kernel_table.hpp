#pragma once

#include <cstddef>

// Internal dispatch table. One instance per backend; entries are plain
// function pointers so the hot loops stay call-through-pointer cheap.

namespace recomb::kernels::detail {

struct KernelTable {
    double (*sum)(const double*, std::size_t);
    double (*dot)(const double*, const double*, std::size_t);
    double (*min_value)(const double*, std::size_t);
    double (*max_abs)(const double*, std::size_t);
    double (*l1_distance)(const double*, const double*, std::size_t);
    double (*max_abs_diff)(const double*, const double*, std::size_t);
    double (*xlogx_sum)(const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    void (*scale_add)(double*, const double*, double, const double*, std::size_t);
    void (*rk4_combine)(double*, const double*, double, const double*, const double*,
                        const double*, const double*, std::size_t);
};

const KernelTable& scalar_table();

#if defined(RECOMB_HAVE_AVX2)
const KernelTable& avx2_table();
#endif

} // namespace recomb::kernels::detail
