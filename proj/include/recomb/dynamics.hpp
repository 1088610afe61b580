#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "recomb/frames.hpp"
#include "recomb/measure.hpp"

namespace recomb {

/// Rate of the elementary recombination `from` -> `to` along frame
/// `frame_idx` under `mu`: the similarity of the two frame sub-words times
/// the mu-marginal weight of the target sub-word. Zero when the words differ
/// outside the frame (no such move exists).
double transition_rate(const DenseMeasure& mu, const FrameSystem& fs, const Legend& legend,
                       std::size_t frame_idx, const Word& from, const Word& to);

/// The mean-field recombination flow: evaluates the time derivative of a
/// distribution in which each frame resamples its sub-word from the current
/// frame marginal, weighted by similarity to the sub-word it replaces.
///
/// Evaluation runs frame by frame; within a frame the state space is swept
/// slice-wise (one slice per sub-word of the complement), so the work per
/// frame is one matrix-vector product per slice plus a gather/scatter pass:
/// O(frame_dim * state_count) per frame, O(frame_dim) extra memory.
///
/// Holds per-frame scratch buffers, so instances are not thread-safe.
class RecombinationFlow {
public:
    RecombinationFlow(FrameSystem fs, Legend legend);

    const FrameSystem& frame_system() const { return fs_; }
    const Legend& legend() const { return legend_; }
    const ProductSpace& space() const { return fs_.space(); }
    const SpacePtr& space_ptr() const { return fs_.space_ptr(); }

    /// Adds one frame's contribution to the derivative: out += d_frame mu.
    /// `mu` is any weight vector (integrator stages need not be normalized).
    void add_frame_rhs(std::size_t frame_idx, std::span<const double> mu,
                       std::span<double> out) const;

    /// out = d mu / dt, frames accumulated in index order (a fixed order, so
    /// repeated evaluation is reproducible bit for bit on one backend).
    void rhs(std::span<const double> mu, std::span<double> out) const;

    /// Max-norm of the derivative at mu; vanishes exactly at rest points.
    double stationarity_residual(const DenseMeasure& mu) const;

private:
    struct FrameWork {
        SubsetIndexer indexer;
        mutable std::vector<double> marg;     // frame marginal of the input
        mutable std::vector<double> out_rate; // matrix * marg: per-sub-word outflow rate
        mutable std::vector<double> slice;    // gathered slice of the input
        mutable std::vector<double> flux;     // matrix * slice: per-sub-word inflow
    };

    FrameSystem fs_;
    Legend legend_;
    std::vector<FrameWork> work_;
};

/// Numeric policy for the fixed-step classical Runge-Kutta integrator.
struct IntegratorConfig {
    /// Step size; 0 picks safety / total_max_rate automatically. An explicit
    /// step must keep step * total_max_rate within `rate_budget`.
    double step = 0.0;
    double safety = 0.1;
    double rate_budget = 0.5;

    /// Mass is rescaled to 1 when |mass - 1| exceeds renorm_tol after a step;
    /// drift beyond drift_limit aborts with NumericalError, as does any entry
    /// below -negative_tol. Entries in [-negative_tol, 0) are clamped to 0.
    double renorm_tol = 1e-12;
    double drift_limit = 1e-6;
    double negative_tol = 1e-12;

    /// Weights strictly above this count toward the reported support size.
    double support_threshold = 1e-12;

    bool operator==(const IntegratorConfig&) const = default;
};

/// Scalar diagnostics recorded along a trajectory, one row per snapshot.
struct TrajectoryRecord {
    double time = 0.0;
    double entropy = 0.0;               // sum mu ln mu
    double max_residual = 0.0;          // stationarity residual
    double tv_to_limit = 0.0;           // distance to the predicted limit
    double separation_violation = 0.0;  // worst product defect over frames
    std::size_t support_size = 0;
};

struct Trajectory {
    std::vector<TrajectoryRecord> records; // t = 0, every stride-th step, final
    DenseMeasure final_measure;
    DenseMeasure target; // predicted limit used for tv_to_limit
    double final_time = 0.0;
    std::size_t steps_taken = 0;
};

/// Predicted long-time limit of the flow started at mu0: the independent
/// coupling of the initial marginals over the equivalence classes of the
/// frame system (site marginals when it is T0).
DenseMeasure predicted_limit(const DenseMeasure& mu0, const FrameSystem& fs);

/// Integrates the flow from mu0 to t_end, recording diagnostics at t = 0,
/// after every `snapshot_stride`-th step, and at t_end. `target_override`
/// replaces the predicted limit in the tv_to_limit column.
Trajectory integrate(const RecombinationFlow& flow, const DenseMeasure& mu0, double t_end,
                     const IntegratorConfig& cfg = {}, std::size_t snapshot_stride = 1,
                     const DenseMeasure* target_override = nullptr);

/// Measures at the requested times (ascending, nonnegative); steps shrink to
/// land on each time exactly.
std::vector<DenseMeasure> measures_at_times(const RecombinationFlow& flow,
                                            const DenseMeasure& mu0,
                                            std::span<const double> times,
                                            const IntegratorConfig& cfg = {});

struct ConvergenceResult {
    bool converged = false;
    double time = 0.0;     // first time the distance reached tv_tol, else t_max
    double final_tv = 0.0; // distance to target at the end of the run
    DenseMeasure final_measure;
    DenseMeasure target;
    std::vector<TrajectoryRecord> records; // every step
};

/// Runs the flow until the total-variation distance to the predicted limit
/// (or `target_override`) drops to tv_tol, giving up at t_max.
ConvergenceResult run_to_convergence(const RecombinationFlow& flow, const DenseMeasure& mu0,
                                     double tv_tol, double t_max,
                                     const IntegratorConfig& cfg = {},
                                     const DenseMeasure* target_override = nullptr);

/// Worst step-to-step entropy increase over a record sequence. The flow makes
/// sum mu ln mu non-increasing, so `monotone` failing beyond integrator
/// roundoff indicates a wrong derivative or an unstable step.
struct EntropyTraceReport {
    bool monotone = true;
    double max_increase = 0.0; // largest positive jump between snapshots
    std::size_t at_index = 0;  // record index where that jump was observed
};

EntropyTraceReport entropy_trace_check(std::span<const TrajectoryRecord> records,
                                       double tol = 1e-10);

/// Exact split of sum mu ln mu across one frame I:
///   joint = conditional_kl + frame_entropy + rest_entropy,
/// where conditional_kl averages, over the complement marginal, the relative
/// entropy of the conditional slice with respect to the frame marginal.
struct EntropyDecomposition {
    double joint = 0.0;
    double conditional_kl = 0.0;
    double frame_entropy = 0.0;
    double rest_entropy = 0.0;
    double defect = 0.0; // |joint - (conditional_kl + frame_entropy + rest_entropy)|
};

EntropyDecomposition entropy_decomposition(const DenseMeasure& mu, const FrameSystem& fs,
                                           std::size_t frame_idx);

} // namespace recomb
