#include "recomb/dynamics.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "recomb/kernels.hpp"

namespace recomb {

namespace {

std::size_t frame_dim(const ProductSpace& space, const SiteSet& frame) {
    std::size_t dim = 1;
    for (int site : frame) dim *= space.alphabet_size(site);
    return dim;
}

} // namespace

double transition_rate(const DenseMeasure& mu, const FrameSystem& fs, const Legend& legend,
                       std::size_t frame_idx, const Word& from, const Word& to) {
    if (mu.space() != fs.space()) throw std::invalid_argument("transition rate: space mismatch");
    if (legend.frame_count() != fs.frame_count()) {
        throw std::invalid_argument("transition rate: legend does not match frame system");
    }
    if (frame_idx >= fs.frame_count()) {
        throw std::invalid_argument("transition rate: frame index out of range");
    }
    const ProductSpace& space = fs.space();
    const StateIndex s_from = space.encode(from);
    const StateIndex s_to = space.encode(to);
    const SiteSet& frame = fs.frame(frame_idx);
    for (int site = 0; site < space.site_count(); ++site) {
        if (std::binary_search(frame.begin(), frame.end(), site)) continue;
        if (from[static_cast<std::size_t>(site)] != to[static_cast<std::size_t>(site)]) {
            return 0.0;
        }
    }
    SubsetIndexer ix(space, frame);
    const MarginalTable on_frame = marginal(mu, frame);
    return legend.matrix(frame_idx)(ix.subset_value(s_from), ix.subset_value(s_to)) *
           on_frame.weights[ix.subset_value(s_to)];
}

RecombinationFlow::RecombinationFlow(FrameSystem fs, Legend legend)
    : fs_(std::move(fs)), legend_(std::move(legend)) {
    if (legend_.frame_count() != fs_.frame_count()) {
        throw std::invalid_argument("flow: legend does not match frame system");
    }
    work_.reserve(fs_.frame_count());
    for (std::size_t f = 0; f < fs_.frame_count(); ++f) {
        const std::size_t dim = frame_dim(fs_.space(), fs_.frame(f));
        if (legend_.matrix(f).dim() != dim) {
            throw std::invalid_argument("flow: similarity matrix for frame " +
                                        std::to_string(f + 1) + " has the wrong dimension");
        }
        FrameWork wk{SubsetIndexer(fs_.space(), fs_.frame(f)),
                     std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0),
                     std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0)};
        work_.push_back(std::move(wk));
    }
}

void RecombinationFlow::add_frame_rhs(std::size_t frame_idx, std::span<const double> mu,
                                      std::span<double> out) const {
    if (frame_idx >= work_.size()) throw std::invalid_argument("flow: frame index out of range");
    const StateIndex n = fs_.space().state_count();
    if (mu.size() != n || out.size() != n) throw std::invalid_argument("flow: size mismatch");

    const FrameWork& wk = work_[frame_idx];
    const SubsetIndexer& ix = wk.indexer;
    const SimilarityMatrix& phi = legend_.matrix(frame_idx);
    const std::size_t m = ix.subset_count();

    std::fill(wk.marg.begin(), wk.marg.end(), 0.0);
    ix.for_each_rest_offset([&](StateIndex rest) {
        for (std::size_t u = 0; u < m; ++u) wk.marg[u] += mu[ix.subset_offset(u) + rest];
    });
    phi.apply(wk.marg, wk.out_rate);

    // One slice per complement sub-word: gain is the frame marginal times the
    // similarity-smoothed slice, loss is the per-sub-word outflow rate times
    // the slice itself. The matrix is symmetric, so each slice conserves mass.
    ix.for_each_rest_offset([&](StateIndex rest) {
        for (std::size_t u = 0; u < m; ++u) wk.slice[u] = mu[ix.subset_offset(u) + rest];
        phi.apply(wk.slice, wk.flux);
        for (std::size_t u = 0; u < m; ++u) {
            out[ix.subset_offset(u) + rest] +=
                wk.marg[u] * wk.flux[u] - wk.out_rate[u] * wk.slice[u];
        }
    });
}

void RecombinationFlow::rhs(std::span<const double> mu, std::span<double> out) const {
    const StateIndex n = fs_.space().state_count();
    if (mu.size() != n || out.size() != n) throw std::invalid_argument("flow: size mismatch");
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t f = 0; f < work_.size(); ++f) add_frame_rhs(f, mu, out);
}

double RecombinationFlow::stationarity_residual(const DenseMeasure& mu) const {
    if (mu.space() != fs_.space()) throw std::invalid_argument("flow: space mismatch");
    std::vector<double> deriv(fs_.space().state_count());
    rhs(mu.weights(), deriv);
    return kernels::max_abs(deriv);
}

namespace {

/// Classical Runge-Kutta step plus the conservation policy: clamp tiny
/// negative weights, rescale tiny mass drift, abort on anything larger.
class Stepper {
public:
    Stepper(const RecombinationFlow& flow, const IntegratorConfig& cfg)
        : flow_(flow), cfg_(cfg), n_(flow.space().state_count()) {
        if (cfg_.step < 0.0 || !std::isfinite(cfg_.step)) {
            throw std::invalid_argument("integrator: step must be finite and nonnegative");
        }
        if (!(cfg_.safety > 0.0)) throw std::invalid_argument("integrator: safety must be positive");
        k1_.resize(n_);
        k2_.resize(n_);
        k3_.resize(n_);
        k4_.resize(n_);
        stage_.resize(n_);
        next_.resize(n_);
    }

    /// Nominal step size: explicit when configured (validated against the
    /// rate budget), otherwise safety / total_max_rate. With no rates the
    /// derivative vanishes, so one step over the whole horizon suffices.
    double base_step(double horizon) const {
        const double rate = flow_.legend().total_max_rate();
        if (cfg_.step > 0.0) {
            if (cfg_.step * rate > cfg_.rate_budget) {
                throw std::invalid_argument(
                    "integrator: step " + std::to_string(cfg_.step) +
                    " exceeds the stability budget " + std::to_string(cfg_.rate_budget) +
                    " / total max rate " + std::to_string(rate));
            }
            return cfg_.step;
        }
        if (rate <= 0.0) return horizon > 0.0 ? horizon : 1.0;
        return cfg_.safety / rate;
    }

    void advance(std::vector<double>& mu, double h) {
        flow_.rhs(mu, k1_);
        kernels::scale_add(stage_, mu, 0.5 * h, k1_);
        flow_.rhs(stage_, k2_);
        kernels::scale_add(stage_, mu, 0.5 * h, k2_);
        flow_.rhs(stage_, k3_);
        kernels::scale_add(stage_, mu, h, k3_);
        flow_.rhs(stage_, k4_);
        kernels::rk4_combine(next_, mu, h, k1_, k2_, k3_, k4_);
        enforce_conservation(next_);
        mu.swap(next_);
    }

private:
    void enforce_conservation(std::vector<double>& v) const {
        const double lowest = kernels::min_value(v);
        if (lowest < -cfg_.negative_tol) {
            throw NumericalError("integrator: weight dropped to " + std::to_string(lowest) +
                                 "; reduce the step size");
        }
        if (lowest < 0.0) {
            for (double& x : v) {
                if (x < 0.0) x = 0.0;
            }
        }
        const double mass = kernels::sum(v);
        const double drift = std::fabs(mass - 1.0);
        if (drift > cfg_.drift_limit) {
            throw NumericalError("integrator: total mass drifted to " + std::to_string(mass));
        }
        if (drift > cfg_.renorm_tol) {
            const double inv = 1.0 / mass;
            for (double& x : v) x *= inv;
        }
    }

    const RecombinationFlow& flow_;
    const IntegratorConfig& cfg_;
    StateIndex n_;
    std::vector<double> k1_, k2_, k3_, k4_, stage_, next_;
};

// Snapshot measures tolerate the small mass drift the policy leaves behind.
constexpr double kSnapshotMassTol = 1e-9;

TrajectoryRecord make_record(const RecombinationFlow& flow, double t,
                             const std::vector<double>& mu, const DenseMeasure& target,
                             const IntegratorConfig& cfg, std::vector<double>& scratch) {
    DenseMeasure snap(flow.space_ptr(), mu, kSnapshotMassTol);
    TrajectoryRecord rec;
    rec.time = t;
    rec.entropy = entropy(snap);
    flow.rhs(mu, scratch);
    rec.max_residual = kernels::max_abs(scratch);
    rec.tv_to_limit = tv_distance(snap, target);
    rec.separation_violation = check_separation(snap, flow.frame_system()).max_violation;
    rec.support_size = static_cast<std::size_t>(
        std::count_if(mu.begin(), mu.end(),
                      [&](double w) { return w > cfg.support_threshold; }));
    return rec;
}

DenseMeasure resolve_target(const RecombinationFlow& flow, const DenseMeasure& mu0,
                            const DenseMeasure* target_override) {
    if (target_override) {
        if (target_override->space() != flow.space()) {
            throw std::invalid_argument("integrator: target measure lives on the wrong space");
        }
        return *target_override;
    }
    return predicted_limit(mu0, flow.frame_system());
}

// Steps shrink (with a sliver-absorbing fudge) so trajectories land on the
// requested end time exactly.
double plan_step(double t, double stop, double h) {
    const double remaining = stop - t;
    return remaining <= h * (1.0 + 1e-9) ? remaining : h;
}

} // namespace

DenseMeasure predicted_limit(const DenseMeasure& mu0, const FrameSystem& fs) {
    if (mu0.space() != fs.space()) throw std::invalid_argument("predicted limit: space mismatch");
    return block_product(mu0, equivalence_classes(fs));
}

Trajectory integrate(const RecombinationFlow& flow, const DenseMeasure& mu0, double t_end,
                     const IntegratorConfig& cfg, std::size_t snapshot_stride,
                     const DenseMeasure* target_override) {
    if (mu0.space() != flow.space()) throw std::invalid_argument("integrator: space mismatch");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
        throw std::invalid_argument("integrator: end time must be finite and nonnegative");
    }
    if (snapshot_stride == 0) throw std::invalid_argument("integrator: zero snapshot stride");

    DenseMeasure target = resolve_target(flow, mu0, target_override);
    Stepper stepper(flow, cfg);
    const double h = stepper.base_step(t_end);

    std::vector<double> mu(mu0.weights().begin(), mu0.weights().end());
    std::vector<double> scratch(mu.size());

    std::vector<TrajectoryRecord> records;
    records.push_back(make_record(flow, 0.0, mu, target, cfg, scratch));

    double t = 0.0;
    std::size_t steps = 0;
    while (t < t_end) {
        const double hk = plan_step(t, t_end, h);
        stepper.advance(mu, hk);
        t = (hk == t_end - t) ? t_end : t + hk;
        ++steps;
        if (steps % snapshot_stride == 0 && t < t_end) {
            records.push_back(make_record(flow, t, mu, target, cfg, scratch));
        }
    }
    if (records.back().time != t) {
        records.push_back(make_record(flow, t, mu, target, cfg, scratch));
    }

    return Trajectory{std::move(records), DenseMeasure(flow.space_ptr(), std::move(mu), kSnapshotMassTol),
                      std::move(target), t, steps};
}

std::vector<DenseMeasure> measures_at_times(const RecombinationFlow& flow,
                                            const DenseMeasure& mu0,
                                            std::span<const double> times,
                                            const IntegratorConfig& cfg) {
    if (mu0.space() != flow.space()) throw std::invalid_argument("integrator: space mismatch");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0) || !std::isfinite(times[i]) ||
            (i > 0 && times[i] < times[i - 1])) {
            throw std::invalid_argument("integrator: times must be nonnegative and ascending");
        }
    }
    std::vector<DenseMeasure> out;
    if (times.empty()) return out;

    Stepper stepper(flow, cfg);
    const double h = stepper.base_step(times.back());
    std::vector<double> mu(mu0.weights().begin(), mu0.weights().end());

    double t = 0.0;
    for (const double stop : times) {
        while (t < stop) {
            const double hk = plan_step(t, stop, h);
            stepper.advance(mu, hk);
            t = (hk == stop - t) ? stop : t + hk;
        }
        out.emplace_back(flow.space_ptr(), mu, kSnapshotMassTol);
    }
    return out;
}

ConvergenceResult run_to_convergence(const RecombinationFlow& flow, const DenseMeasure& mu0,
                                     double tv_tol, double t_max, const IntegratorConfig& cfg,
                                     const DenseMeasure* target_override) {
    if (mu0.space() != flow.space()) throw std::invalid_argument("integrator: space mismatch");
    if (!(tv_tol >= 0.0)) throw std::invalid_argument("integrator: negative tolerance");
    if (!(t_max > 0.0) || !std::isfinite(t_max)) {
        throw std::invalid_argument("integrator: horizon must be finite and positive");
    }

    DenseMeasure target = resolve_target(flow, mu0, target_override);
    Stepper stepper(flow, cfg);
    const double h = stepper.base_step(t_max);

    std::vector<double> mu(mu0.weights().begin(), mu0.weights().end());
    std::vector<double> scratch(mu.size());

    std::vector<TrajectoryRecord> records;
    records.push_back(make_record(flow, 0.0, mu, target, cfg, scratch));

    bool converged = records.back().tv_to_limit <= tv_tol;
    double conv_time = 0.0;
    double t = 0.0;
    while (!converged && t < t_max) {
        const double hk = plan_step(t, t_max, h);
        stepper.advance(mu, hk);
        t = (hk == t_max - t) ? t_max : t + hk;
        records.push_back(make_record(flow, t, mu, target, cfg, scratch));
        if (records.back().tv_to_limit <= tv_tol) {
            converged = true;
            conv_time = t;
        }
    }

    ConvergenceResult result{converged,
                             converged ? conv_time : t,
                             records.back().tv_to_limit,
                             DenseMeasure(flow.space_ptr(), std::move(mu), kSnapshotMassTol),
                             std::move(target),
                             std::move(records)};
    return result;
}

EntropyTraceReport entropy_trace_check(std::span<const TrajectoryRecord> records, double tol) {
    EntropyTraceReport report;
    for (std::size_t i = 1; i < records.size(); ++i) {
        const double jump = records[i].entropy - records[i - 1].entropy;
        if (jump > report.max_increase) {
            report.max_increase = jump;
            report.at_index = i;
        }
    }
    report.monotone = report.max_increase <= tol;
    return report;
}

EntropyDecomposition entropy_decomposition(const DenseMeasure& mu, const FrameSystem& fs,
                                           std::size_t frame_idx) {
    if (mu.space() != fs.space()) throw std::invalid_argument("decomposition: space mismatch");
    if (frame_idx >= fs.frame_count()) {
        throw std::invalid_argument("decomposition: frame index out of range");
    }
    const SiteSet& frame = fs.frame(frame_idx);
    SubsetIndexer ix(mu.space(), frame);
    const MarginalTable on_frame = marginal(mu, frame);
    const MarginalTable on_rest = marginal(mu, complement_sites(mu.space(), frame));
    const std::span<const double> w = mu.weights();

    EntropyDecomposition d;
    d.joint = entropy(mu);
    d.frame_entropy = kernels::xlogx_sum(on_frame.weights);
    d.rest_entropy = kernels::xlogx_sum(on_rest.weights);

    std::vector<double> conditional(ix.subset_count());
    std::size_t rest_index = 0;
    ix.for_each_rest_offset([&](StateIndex rest) {
        const double rest_weight = on_rest.weights[rest_index++];
        if (rest_weight < DBL_MIN) return; // empty slice contributes nothing
        for (std::size_t u = 0; u < conditional.size(); ++u) {
            conditional[u] = w[ix.subset_offset(u) + rest] / rest_weight;
        }
        d.conditional_kl += rest_weight * kl_divergence(conditional, on_frame.weights);
    });

    d.defect = std::fabs(d.joint - (d.conditional_kl + d.frame_entropy + d.rest_entropy));
    return d;
}

} // namespace recomb
