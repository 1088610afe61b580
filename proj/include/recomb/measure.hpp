#pragma once

#include <span>
#include <vector>

#include "recomb/product_space.hpp"

namespace recomb {

/// Probability measure on a ProductSpace, stored densely by state index.
/// Construction validates nonnegativity and total mass, so a DenseMeasure in
/// hand is always a (numerically) honest distribution.
class DenseMeasure {
public:
    static constexpr double kDefaultMassTol = 1e-12;

    /// Takes one weight per state, in state-index order. Throws
    /// std::invalid_argument on a size mismatch, a negative or non-finite
    /// weight, or total mass farther than `mass_tol` from 1.
    DenseMeasure(SpacePtr space, std::vector<double> weights,
                 double mass_tol = kDefaultMassTol);

    static DenseMeasure uniform(SpacePtr space);
    static DenseMeasure point_mass(SpacePtr space, const Word& w);

    /// Uniform over the given words; duplicate words collapse to one atom.
    static DenseMeasure uniform_on(SpacePtr space, const std::vector<Word>& words);

    /// Rescales arbitrary nonnegative weights with positive total mass to a
    /// probability vector.
    static DenseMeasure normalized(SpacePtr space, std::vector<double> weights);

    const SpacePtr& space_ptr() const { return space_; }
    const ProductSpace& space() const { return *space_; }

    std::span<const double> weights() const { return weights_; }
    double operator[](StateIndex s) const { return weights_[s]; }
    double at(const Word& w) const { return weights_[space_->encode(w)]; }

    /// Compensated recomputation of the total mass (diagnostic; ~1 ulp).
    double total_mass() const;

private:
    SpacePtr space_;
    std::vector<double> weights_;
};

/// Marginal of a measure on a subset of sites. Weights are indexed in mixed
/// radix over `sites` with the first listed site most significant, matching
/// SubsetIndexer::subset_value.
struct MarginalTable {
    SiteSet sites;
    std::vector<Letter> sizes;
    std::vector<double> weights;
};

/// Marginal of `mu` on `sites` (sorted, duplicate-free). O(state_count).
MarginalTable marginal(const DenseMeasure& mu, const SiteSet& sites);

/// Same contraction for a raw weight vector (one entry per state). Signed
/// entries are fine: derivative vectors get contracted this way too.
MarginalTable marginal(const ProductSpace& space, std::span<const double> weights,
                       const SiteSet& sites);

/// Product measure assembled from marginals over the `blocks`, which must
/// partition the site set. Weight of x is the product over blocks of the
/// block-marginal weight of x restricted to that block.
DenseMeasure block_product(const DenseMeasure& mu, const std::vector<SiteSet>& blocks);

/// block_product over singleton blocks: the independent coupling of the
/// single-site marginals of `mu`.
DenseMeasure product_of_site_marginals(const DenseMeasure& mu);

/// Sum of mu(x) ln mu(x) with the 0 ln 0 = 0 convention. This is the negative
/// of the Shannon entropy; it is non-increasing along the recombination flow
/// and is the quantity reported in trajectory output.
double entropy(const DenseMeasure& mu);
double entropy(std::span<const double> weights);

/// Relative entropy KL(p || q) = sum p ln(p/q), computed termwise in the
/// nonnegative form p ln(p/q) - p + q and clamped at 0, so roundoff cannot
/// produce a negative result. Requires equal lengths. Throws NumericalError
/// when p carries mass where q has none (the divergence is infinite).
double kl_divergence(std::span<const double> p, std::span<const double> q);
double kl_divergence(const DenseMeasure& p, const DenseMeasure& q);

/// Total-variation distance: half the L1 distance between weight vectors.
double tv_distance(const DenseMeasure& a, const DenseMeasure& b);

/// State indices with weight strictly above `threshold`, ascending.
std::vector<StateIndex> support(const DenseMeasure& mu, double threshold = 1e-12);

} // namespace recomb
