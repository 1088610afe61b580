#include "recomb/measure.hpp"

#include <cfloat>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "recomb/kernels.hpp"

namespace recomb {

namespace {

// Kahan-compensated sum: error stays O(eps) regardless of length, so mass
// validation does not drift on large state spaces the way a naive sum would.
double compensated_sum(std::span<const double> x) {
    double s = 0.0, c = 0.0;
    for (const double v : x) {
        const double t = v - c;
        const double u = s + t;
        c = (u - s) - t;
        s = u;
    }
    return s;
}

void check_weights(const ProductSpace& space, const std::vector<double>& w) {
    if (w.size() != space.state_count()) {
        throw std::invalid_argument("measure: expected " + std::to_string(space.state_count()) +
                                    " weights, got " + std::to_string(w.size()));
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!(w[i] >= 0.0)) {
            throw std::invalid_argument("measure: weight at state " + std::to_string(i) +
                                        " is negative or not finite");
        }
    }
}

} // namespace

DenseMeasure::DenseMeasure(SpacePtr space, std::vector<double> weights, double mass_tol)
    : space_(std::move(space)), weights_(std::move(weights)) {
    if (!space_) throw std::invalid_argument("measure: null space");
    check_weights(*space_, weights_);
    const double mass = compensated_sum(weights_);
    if (std::fabs(mass - 1.0) > mass_tol) {
        throw std::invalid_argument("measure: total mass " + std::to_string(mass) +
                                    " deviates from 1 beyond tolerance");
    }
}

DenseMeasure DenseMeasure::uniform(SpacePtr space) {
    if (!space) throw std::invalid_argument("measure: null space");
    const auto n = space->state_count();
    std::vector<double> w(n, 1.0 / static_cast<double>(n));
    return DenseMeasure(std::move(space), std::move(w), 1e-9);
}

DenseMeasure DenseMeasure::point_mass(SpacePtr space, const Word& word) {
    if (!space) throw std::invalid_argument("measure: null space");
    std::vector<double> w(space->state_count(), 0.0);
    w[space->encode(word)] = 1.0;
    return DenseMeasure(std::move(space), std::move(w));
}

DenseMeasure DenseMeasure::uniform_on(SpacePtr space, const std::vector<Word>& words) {
    if (!space) throw std::invalid_argument("measure: null space");
    if (words.empty()) throw std::invalid_argument("measure: uniform_on needs at least one word");
    std::vector<double> w(space->state_count(), 0.0);
    std::size_t atoms = 0;
    for (const Word& word : words) {
        double& slot = w[space->encode(word)];
        if (slot == 0.0) ++atoms;
        slot = 1.0;
    }
    const double p = 1.0 / static_cast<double>(atoms);
    for (double& v : w) {
        if (v != 0.0) v = p;
    }
    return DenseMeasure(std::move(space), std::move(w), 1e-9);
}

DenseMeasure DenseMeasure::normalized(SpacePtr space, std::vector<double> weights) {
    if (!space) throw std::invalid_argument("measure: null space");
    check_weights(*space, weights);
    const double mass = compensated_sum(weights);
    if (!(mass > 0.0)) throw std::invalid_argument("measure: cannot normalize zero total mass");
    const double inv = 1.0 / mass;
    for (double& v : weights) v *= inv;
    return DenseMeasure(std::move(space), std::move(weights), 1e-9);
}

double DenseMeasure::total_mass() const { return compensated_sum(weights_); }

MarginalTable marginal(const ProductSpace& space, std::span<const double> weights,
                       const SiteSet& sites) {
    if (weights.size() != space.state_count()) {
        throw std::invalid_argument("marginal: one weight per state required");
    }
    SubsetIndexer ix(space, sites);
    MarginalTable out;
    out.sites = sites;
    out.sizes = ix.subset_sizes();
    out.weights.assign(ix.subset_count(), 0.0);
    // Rest-outer, subset-inner: one odometer pass total, tabulated offsets in
    // the inner loop.
    ix.for_each_rest_offset([&](StateIndex rest) {
        for (std::size_t u = 0; u < out.weights.size(); ++u) {
            out.weights[u] += weights[ix.subset_offset(u) + rest];
        }
    });
    return out;
}

MarginalTable marginal(const DenseMeasure& mu, const SiteSet& sites) {
    return marginal(mu.space(), mu.weights(), sites);
}

DenseMeasure block_product(const DenseMeasure& mu, const std::vector<SiteSet>& blocks) {
    const ProductSpace& space = mu.space();
    std::vector<char> seen(static_cast<std::size_t>(space.site_count()), 0);
    for (const SiteSet& block : blocks) {
        space.require_site_subset(block);
        if (block.empty()) throw std::invalid_argument("block_product: empty block");
        for (int site : block) {
            if (seen[static_cast<std::size_t>(site)]) {
                throw std::invalid_argument("block_product: site " + std::to_string(site + 1) +
                                            " appears in two blocks");
            }
            seen[static_cast<std::size_t>(site)] = 1;
        }
    }
    for (std::size_t i = 0; i < seen.size(); ++i) {
        if (!seen[i]) {
            throw std::invalid_argument("block_product: site " + std::to_string(i + 1) +
                                        " not covered by any block");
        }
    }

    std::vector<double> w(space.state_count(), 1.0);
    for (const SiteSet& block : blocks) {
        const MarginalTable m = marginal(mu, block);
        SubsetIndexer ix(space, block);
        ix.for_each_rest_offset([&](StateIndex rest) {
            for (std::size_t u = 0; u < m.weights.size(); ++u) {
                w[ix.subset_offset(u) + rest] *= m.weights[u];
            }
        });
    }
    // Masses of the factors each sit within roundoff of 1; the product can
    // drift a little farther, hence the relaxed tolerance.
    return DenseMeasure(mu.space_ptr(), std::move(w), 1e-9);
}

DenseMeasure product_of_site_marginals(const DenseMeasure& mu) {
    std::vector<SiteSet> blocks;
    blocks.reserve(static_cast<std::size_t>(mu.space().site_count()));
    for (int i = 0; i < mu.space().site_count(); ++i) blocks.push_back({i});
    return block_product(mu, blocks);
}

double entropy(std::span<const double> weights) { return kernels::xlogx_sum(weights); }

double entropy(const DenseMeasure& mu) { return entropy(mu.weights()); }

double kl_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: size mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pi = p[i];
        const double qi = q[i];
        if (pi < DBL_MIN) {
            acc += qi - pi;
            continue;
        }
        if (qi < DBL_MIN) {
            throw NumericalError("kl_divergence: first argument has mass at index " +
                                 std::to_string(i) + " where second has none");
        }
        acc += pi * std::log(pi / qi) - pi + qi;
    }
    return acc < 0.0 ? 0.0 : acc;
}

double kl_divergence(const DenseMeasure& p, const DenseMeasure& q) {
    if (p.space() != q.space()) throw std::invalid_argument("kl_divergence: space mismatch");
    return kl_divergence(p.weights(), q.weights());
}

double tv_distance(const DenseMeasure& a, const DenseMeasure& b) {
    if (a.space() != b.space()) throw std::invalid_argument("tv_distance: space mismatch");
    return 0.5 * kernels::l1_distance(a.weights(), b.weights());
}

std::vector<StateIndex> support(const DenseMeasure& mu, double threshold) {
    std::vector<StateIndex> out;
    const std::span<const double> w = mu.weights();
    for (StateIndex s = 0; s < w.size(); ++s) {
        if (w[s] > threshold) out.push_back(s);
    }
    return out;
}

} // namespace recomb
