#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "recomb/measure.hpp"
#include "recomb/product_space.hpp"

namespace recomb {

/// The set of frames (site subsets) along which recombination acts. Frames
/// are sorted, duplicate-free, nonempty site lists; repeating a frame in the
/// system is rejected because rate legends are matched to frames by index.
class FrameSystem {
public:
    FrameSystem(SpacePtr space, std::vector<SiteSet> frames);

    const SpacePtr& space_ptr() const { return space_; }
    const ProductSpace& space() const { return *space_; }

    std::size_t frame_count() const { return frames_.size(); }
    const SiteSet& frame(std::size_t idx) const { return frames_[idx]; }
    const std::vector<SiteSet>& frames() const { return frames_; }

    bool has_full_frame() const { return has_full_frame_; }

    /// True when some frame contains exactly one of the two sites.
    bool separates(int site_a, int site_b) const;

private:
    SpacePtr space_;
    std::vector<SiteSet> frames_;
    bool has_full_frame_ = false;
};

/// Symmetric, strictly positive rate matrix on the sub-words of one frame,
/// indexed by the frame's mixed-radix sub-index. Row-major storage.
class SimilarityMatrix {
public:
    /// Throws std::invalid_argument unless `values` is dim*dim, exactly
    /// symmetric, and strictly positive with finite entries.
    SimilarityMatrix(std::size_t dim, std::vector<double> values);

    static SimilarityMatrix constant(std::size_t dim, double value);

    std::size_t dim() const { return dim_; }
    double operator()(std::size_t a, std::size_t b) const { return values_[a * dim_ + b]; }
    std::span<const double> row(std::size_t a) const {
        return {values_.data() + a * dim_, dim_};
    }

    double max_value() const { return max_value_; }

    /// All entries equal; lets callers collapse the matvec to a scaled sum.
    bool is_constant() const { return constant_; }

    /// out = matrix * v. Uses the constant fast path when available.
    void apply(std::span<const double> v, std::span<double> out) const;

private:
    std::size_t dim_ = 0;
    std::vector<double> values_;
    double max_value_ = 0.0;
    bool constant_ = false;
};

/// One similarity matrix per frame, matched to the frame system by index.
class Legend {
public:
    /// Throws std::invalid_argument when the count or any matrix dimension
    /// does not match the frame system.
    Legend(const FrameSystem& fs, std::vector<SimilarityMatrix> matrices);

    /// Constant rate on every frame.
    static Legend uniform(const FrameSystem& fs, double rate = 1.0);

    std::size_t frame_count() const { return matrices_.size(); }
    const SimilarityMatrix& matrix(std::size_t frame_idx) const { return matrices_[frame_idx]; }

    /// Sum over frames of the largest matrix entry: the proposal-rate budget
    /// for one particle pair, and the stiffness scale for step-size control.
    double total_max_rate() const { return total_max_rate_; }

private:
    std::vector<SimilarityMatrix> matrices_;
    double total_max_rate_ = 0.0;
};

/// First site pair (ascending) no frame separates, if any.
std::optional<std::pair<int, int>> find_unseparated_pair(const FrameSystem& fs);

/// T0 property: every pair of distinct sites is separated by some frame.
bool is_t0(const FrameSystem& fs);

/// Partition of the sites into maximal groups that no frame separates; two
/// sites are grouped exactly when they have identical frame membership.
/// Classes are ordered by smallest member. A T0 system yields all singletons.
std::vector<SiteSet> equivalence_classes(const FrameSystem& fs);

/// The frame system induced on the quotient alphabet: each equivalence class
/// becomes one site whose alphabet is the product of its members' alphabets,
/// and each frame maps to the set of classes it contains (frames are unions
/// of classes, so the mapping is one-to-one and index-aligned). The quotient
/// system is always T0.
struct QuotientSystem {
    std::vector<SiteSet> classes;
    SpacePtr original_space;
    SpacePtr space;
    FrameSystem system;

    /// Repacks a word: the letter at quotient site j is the mixed-radix value
    /// of the original letters over class j (first member most significant).
    Word to_quotient(const Word& w) const;
    Word from_quotient(const Word& qw) const;
};

QuotientSystem quotient_system(const FrameSystem& fs);

/// Separation check: for each frame I, how far mu is from the product of its
/// marginals across the cut I | complement(I), in the max norm.
struct SeparationReport {
    bool separated = true;
    double max_violation = 0.0;
    std::size_t worst_frame = 0;
    StateIndex worst_state = 0;
};

SeparationReport check_separation(const DenseMeasure& mu, const FrameSystem& fs,
                                  double tol = 1e-9);

/// Compares mu with the independent coupling of its marginals over the
/// equivalence classes of `fs` (site marginals when the system is T0).
/// Measures the flow leaves fixed factor this way, so a small defect here
/// cross-checks a small stationarity residual.
struct FactorizationReport {
    bool factorized = true;
    double max_defect = 0.0;
};

FactorizationReport check_factorization(const DenseMeasure& mu, const FrameSystem& fs,
                                        double tol = 1e-9);

} // namespace recomb
