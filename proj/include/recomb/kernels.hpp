#pragma once

#include <cstddef>
#include <span>

namespace recomb::kernels {

/// Kernel backends. `scalar` is the portable reference; `avx2` is selected
/// automatically at startup when the CPU supports AVX2+FMA. The environment
/// variable RECOMB_KERNEL_BACKEND=scalar|avx2 overrides the automatic choice.
enum class Backend { scalar = 0, avx2 = 1 };

Backend active_backend();
bool backend_available(Backend b);

/// Switches the active backend. Returns false (and leaves the backend
/// unchanged) when `b` is not available on this machine.
bool set_backend(Backend b);

const char* backend_name(Backend b);

// Reductions. SIMD variants accumulate in lane-striped order, so results may
// differ from the scalar reference by reassociation roundoff only.
double sum(std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);
double min_value(std::span<const double> x);   // +inf on empty input
double max_abs(std::span<const double> x);     // 0 on empty input
double l1_distance(std::span<const double> a, std::span<const double> b);
double max_abs_diff(std::span<const double> a, std::span<const double> b);

/// Sum of x*ln(x) over entries with x >= DBL_MIN; smaller entries (including
/// zeros and negatives) contribute nothing, matching the 0*ln(0) = 0
/// convention for entropy sums.
double xlogx_sum(std::span<const double> x);

// Elementwise updates. Both backends evaluate these with FMA in the same
// per-element order, so scalar and SIMD results are bitwise identical.
void axpy(double a, std::span<const double> x, std::span<double> y);      // y += a*x
void scale_add(std::span<double> out, std::span<const double> x, double a,
               std::span<const double> y);                                 // out = x + a*y
void rk4_combine(std::span<double> out, std::span<const double> y, double h,
                 std::span<const double> k1, std::span<const double> k2,
                 std::span<const double> k3, std::span<const double> k4);

} // namespace recomb::kernels
