#include "recomb/particle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace recomb {

ParticleEnsemble::ParticleEnsemble(FrameSystem fs, Legend legend, const DenseMeasure& mu0,
                                   std::size_t n, std::uint64_t seed)
    : fs_(std::move(fs)), legend_(std::move(legend)), stream_(seed) {
    if (mu0.space() != fs_.space()) throw std::invalid_argument("ensemble: space mismatch");
    if (legend_.frame_count() != fs_.frame_count()) {
        throw std::invalid_argument("ensemble: legend does not match frame system");
    }
    if (n == 0) throw std::invalid_argument("ensemble: need at least one particle");
    if (n > std::numeric_limits<std::uint32_t>::max()) {
        throw std::invalid_argument("ensemble: particle count too large");
    }

    indexers_.reserve(fs_.frame_count());
    for (std::size_t f = 0; f < fs_.frame_count(); ++f) {
        indexers_.emplace_back(fs_.space(), fs_.frame(f));
    }

    const double total = legend_.total_max_rate();
    rate_ = static_cast<double>(n) * total;
    frame_cdf_.reserve(legend_.frame_count());
    double acc = 0.0;
    for (std::size_t f = 0; f < legend_.frame_count(); ++f) {
        acc += legend_.matrix(f).max_value() / total;
        frame_cdf_.push_back(acc);
    }
    if (!frame_cdf_.empty()) frame_cdf_.back() = 1.0; // absorb cumulative roundoff

    // Inverse-CDF sampling of the initial states over the state enumeration.
    std::vector<double> cdf(mu0.weights().begin(), mu0.weights().end());
    for (std::size_t s = 1; s < cdf.size(); ++s) cdf[s] += cdf[s - 1];
    cdf.back() = 1.0;
    states_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double u = stream_.uniform();
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        states_[k] = static_cast<StateIndex>(it - cdf.begin());
    }
}

DenseMeasure ParticleEnsemble::empirical_measure() const {
    std::vector<double> counts(fs_.space().state_count(), 0.0);
    for (const StateIndex s : states_) counts[s] += 1.0;
    return DenseMeasure::normalized(fs_.space_ptr(), std::move(counts));
}

ParticleEvent ParticleEnsemble::complete_proposal(double event_time) {
    const double u_frame = stream_.uniform();
    std::size_t f = 0;
    while (f + 1 < frame_cdf_.size() && u_frame >= frame_cdf_[f]) ++f;

    const auto k = static_cast<std::uint32_t>(stream_.uniform_index(states_.size()));
    const auto l = static_cast<std::uint32_t>(stream_.uniform_index(states_.size()));
    const double u_accept = stream_.uniform();

    const SubsetIndexer& ix = indexers_[f];
    const SimilarityMatrix& phi = legend_.matrix(f);
    const std::size_t seg_k = ix.subset_value(states_[k]);
    const std::size_t seg_l = ix.subset_value(states_[l]);

    ParticleEvent ev;
    ev.time = event_time;
    ev.particle = k;
    ev.partner = l;
    ev.frame_index = static_cast<std::uint32_t>(f);
    ev.pre_segment = static_cast<std::uint32_t>(seg_k);
    ev.post_segment = ev.pre_segment;
    ev.accepted = u_accept < phi(seg_k, seg_l) / phi.max_value();
    if (ev.accepted) {
        states_[k] = states_[k] - ix.subset_offset(seg_k) + ix.subset_offset(seg_l);
        ev.post_segment = static_cast<std::uint32_t>(seg_l);
    }
    time_ = event_time;
    return ev;
}

ParticleEvent ParticleEnsemble::step() {
    if (!(rate_ > 0.0)) throw std::logic_error("ensemble: no frames, nothing can happen");
    const double dt = stream_.exponential(rate_);
    return complete_proposal(time_ + dt);
}

ParticleRunResult ParticleEnsemble::run(double t_end, std::span<const double> snapshot_times,
                                        bool keep_log) {
    if (!(t_end >= time_) || !std::isfinite(t_end)) {
        throw std::invalid_argument("ensemble: end time must be finite and not in the past");
    }
    for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
        const double s = snapshot_times[i];
        if (!(s >= time_) || s > t_end || (i > 0 && s < snapshot_times[i - 1])) {
            throw std::invalid_argument(
                "ensemble: snapshot times must be sorted within the run window");
        }
    }

    ParticleRunResult result{{}, empirical_measure(), t_end, {}};
    result.snapshots.reserve(snapshot_times.size());
    std::size_t next_snap = 0;
    const auto emit_before = [&](double horizon) {
        while (next_snap < snapshot_times.size() && snapshot_times[next_snap] < horizon) {
            result.snapshots.push_back({snapshot_times[next_snap], empirical_measure()});
            ++next_snap;
        }
    };

    if (rate_ > 0.0) {
        for (;;) {
            const double dt = stream_.exponential(rate_);
            const double t_next = time_ + dt;
            if (t_next > t_end) break;
            emit_before(t_next);
            const ParticleEvent ev = complete_proposal(t_next);
            ++result.log.proposed;
            result.log.accepted += ev.accepted ? 1 : 0;
            if (keep_log) result.log.events.push_back(ev);
        }
    }
    time_ = t_end;
    emit_before(std::numeric_limits<double>::infinity());
    result.final_measure = empirical_measure();
    return result;
}

} // namespace recomb
