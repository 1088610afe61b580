#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "recomb/frames.hpp"
#include "recomb/measure.hpp"
#include "recomb/rng.hpp"

namespace recomb {

/// One thinning proposal: at `time`, `particle` proposed to replace its
/// letters on frame `frame_index` with `partner`'s. Segments are the frame
/// sub-indices of the particle before and after (equal unless accepted).
struct ParticleEvent {
    double time = 0.0;
    std::uint32_t particle = 0;
    std::uint32_t partner = 0;
    std::uint32_t frame_index = 0;
    std::uint32_t pre_segment = 0;
    std::uint32_t post_segment = 0;
    bool accepted = false;
};

struct EventLog {
    std::vector<ParticleEvent> events;
    std::uint64_t proposed = 0;
    std::uint64_t accepted = 0;
};

struct ParticleSnapshot {
    double time = 0.0;
    DenseMeasure measure;
};

struct ParticleRunResult {
    std::vector<ParticleSnapshot> snapshots;
    DenseMeasure final_measure;
    double final_time = 0.0;
    EventLog log;
};

/// N interacting particles realizing the mean-field recombination process:
/// each particle resamples frame segments from the ensemble's own empirical
/// measure. Simulation is exact in distribution via thinning: proposals
/// arrive at the constant rate N * total_max_rate; a proposal draws a frame
/// (proportionally to its largest similarity), a particle and a partner
/// (uniformly, self-pairing included, so rates match the unweighted empirical
/// measure), and is accepted with probability similarity / frame maximum.
///
/// Draw discipline (frozen for reproducibility): every proposal consumes
/// exactly five uniforms, in order: waiting time, frame, particle, partner,
/// acceptance. A proposal whose waiting time overshoots the horizon consumes
/// only the first draw.
class ParticleEnsemble {
public:
    /// Starts with n iid draws from mu0 (inverse CDF over the state
    /// enumeration, one uniform per particle, particle 0 first).
    ParticleEnsemble(FrameSystem fs, Legend legend, const DenseMeasure& mu0, std::size_t n,
                     std::uint64_t seed);

    std::size_t particle_count() const { return states_.size(); }
    double time() const { return time_; }

    /// Constant total proposal rate: N * total_max_rate.
    double proposal_rate() const { return rate_; }

    const std::vector<StateIndex>& states() const { return states_; }

    /// Unweighted empirical distribution of the ensemble.
    DenseMeasure empirical_measure() const;

    /// One full proposal: advances time by an exponential increment and
    /// applies the accepted recombination, if any. Requires a positive
    /// proposal rate.
    ParticleEvent step();

    /// Runs to t_end, capturing the empirical measure at each snapshot time
    /// (sorted, within [current time, t_end]). A snapshot at time s reflects
    /// every event with time <= s. Events are logged only when keep_log.
    ParticleRunResult run(double t_end, std::span<const double> snapshot_times,
                          bool keep_log = true);

private:
    ParticleEvent complete_proposal(double event_time);

    FrameSystem fs_;
    Legend legend_;
    std::vector<SubsetIndexer> indexers_;
    std::vector<double> frame_cdf_; // cumulative frame-pick probabilities
    std::vector<StateIndex> states_;
    RandomStream stream_;
    double time_ = 0.0;
    double rate_ = 0.0;
};

} // namespace recomb
