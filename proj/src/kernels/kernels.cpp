#include "recomb/kernels.hpp"

#include <cfloat>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <stdexcept>

#include "kernel_table.hpp"

namespace recomb::kernels {

namespace detail {

namespace {

double sum_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc = std::fma(a[i], b[i], acc);
    return acc;
}

double min_value_scalar(const double* x, std::size_t n) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) m = std::min(m, x[i]);
    return m;
}

double max_abs_scalar(const double* x, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(x[i]));
    return m;
}

double l1_distance_scalar(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::fabs(a[i] - b[i]);
    return acc;
}

double max_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

double xlogx_sum_scalar(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = x[i];
        if (v >= DBL_MIN) acc += v * std::log(v);
    }
    return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void scale_add_scalar(double* out, const double* x, double a, const double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = std::fma(a, y[i], x[i]);
}

void rk4_combine_scalar(double* out, const double* y, double h, const double* k1,
                        const double* k2, const double* k3, const double* k4, std::size_t n) {
    const double c = h / 6.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = k1[i] + 2.0 * (k2[i] + k3[i]);
        s += k4[i];
        out[i] = std::fma(c, s, y[i]);
    }
}

} // namespace

const KernelTable& scalar_table() {
    static const KernelTable table{
        sum_scalar,      dot_scalar,          min_value_scalar, max_abs_scalar,
        l1_distance_scalar, max_abs_diff_scalar, xlogx_sum_scalar, axpy_scalar,
        scale_add_scalar, rk4_combine_scalar,
    };
    return table;
}

} // namespace detail

namespace {

bool cpu_has_avx2() {
#if defined(RECOMB_HAVE_AVX2)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

struct Dispatch {
    const detail::KernelTable* table;
    Backend backend;

    Dispatch() {
        backend = cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
        if (const char* env = std::getenv("RECOMB_KERNEL_BACKEND")) {
            if (std::strcmp(env, "scalar") == 0) backend = Backend::scalar;
            else if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) backend = Backend::avx2;
        }
        table = pick(backend);
    }

    static const detail::KernelTable* pick(Backend b) {
#if defined(RECOMB_HAVE_AVX2)
        if (b == Backend::avx2) return &detail::avx2_table();
#else
        (void)b;
#endif
        return &detail::scalar_table();
    }
};

Dispatch& dispatch() {
    static Dispatch d;
    return d;
}

} // namespace

Backend active_backend() { return dispatch().backend; }

bool backend_available(Backend b) {
    if (b == Backend::scalar) return true;
    return cpu_has_avx2();
}

bool set_backend(Backend b) {
    if (!backend_available(b)) return false;
    dispatch().backend = b;
    dispatch().table = Dispatch::pick(b);
    return true;
}

const char* backend_name(Backend b) {
    switch (b) {
        case Backend::scalar: return "scalar";
        case Backend::avx2: return "avx2";
    }
    return "unknown";
}

double sum(std::span<const double> x) { return dispatch().table->sum(x.data(), x.size()); }

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
    return dispatch().table->dot(a.data(), b.data(), a.size());
}

double min_value(std::span<const double> x) {
    return dispatch().table->min_value(x.data(), x.size());
}

double max_abs(std::span<const double> x) {
    return dispatch().table->max_abs(x.data(), x.size());
}

double l1_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("l1_distance: size mismatch");
    return dispatch().table->l1_distance(a.data(), b.data(), a.size());
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("max_abs_diff: size mismatch");
    return dispatch().table->max_abs_diff(a.data(), b.data(), a.size());
}

double xlogx_sum(std::span<const double> x) {
    return dispatch().table->xlogx_sum(x.data(), x.size());
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("axpy: size mismatch");
    dispatch().table->axpy(a, x.data(), y.data(), x.size());
}

void scale_add(std::span<double> out, std::span<const double> x, double a,
               std::span<const double> y) {
    if (out.size() != x.size() || x.size() != y.size()) {
        throw std::invalid_argument("scale_add: size mismatch");
    }
    dispatch().table->scale_add(out.data(), x.data(), a, y.data(), out.size());
}

void rk4_combine(std::span<double> out, std::span<const double> y, double h,
                 std::span<const double> k1, std::span<const double> k2,
                 std::span<const double> k3, std::span<const double> k4) {
    const std::size_t n = out.size();
    if (y.size() != n || k1.size() != n || k2.size() != n || k3.size() != n || k4.size() != n) {
        throw std::invalid_argument("rk4_combine: size mismatch");
    }
    dispatch().table->rk4_combine(out.data(), y.data(), h, k1.data(), k2.data(), k3.data(),
                                  k4.data(), n);
}

} // namespace recomb::kernels
