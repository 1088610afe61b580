#include "recomb/frames.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "recomb/kernels.hpp"

namespace recomb {

FrameSystem::FrameSystem(SpacePtr space, std::vector<SiteSet> frames)
    : space_(std::move(space)), frames_(std::move(frames)) {
    if (!space_) throw std::invalid_argument("frame system: null space");
    if (frames_.empty()) throw std::invalid_argument("frame system: no frames");
    for (std::size_t f = 0; f < frames_.size(); ++f) {
        if (frames_[f].empty()) {
            throw std::invalid_argument("frame system: frame " + std::to_string(f + 1) +
                                        " is empty");
        }
        space_->require_site_subset(frames_[f]);
        for (std::size_t g = 0; g < f; ++g) {
            if (frames_[g] == frames_[f]) {
                throw std::invalid_argument("frame system: frames " + std::to_string(g + 1) +
                                            " and " + std::to_string(f + 1) + " are identical");
            }
        }
        if (static_cast<int>(frames_[f].size()) == space_->site_count()) has_full_frame_ = true;
    }
}

bool FrameSystem::separates(int site_a, int site_b) const {
    for (const SiteSet& frame : frames_) {
        const bool in_a = std::binary_search(frame.begin(), frame.end(), site_a);
        const bool in_b = std::binary_search(frame.begin(), frame.end(), site_b);
        if (in_a != in_b) return true;
    }
    return false;
}

SimilarityMatrix::SimilarityMatrix(std::size_t dim, std::vector<double> values)
    : dim_(dim), values_(std::move(values)) {
    if (dim_ == 0) throw std::invalid_argument("similarity matrix: zero dimension");
    if (values_.size() != dim_ * dim_) {
        throw std::invalid_argument("similarity matrix: expected " +
                                    std::to_string(dim_ * dim_) + " values, got " +
                                    std::to_string(values_.size()));
    }
    constant_ = true;
    for (std::size_t a = 0; a < dim_; ++a) {
        for (std::size_t b = 0; b < dim_; ++b) {
            const double v = values_[a * dim_ + b];
            if (!std::isfinite(v) || v <= 0.0) {
                throw std::invalid_argument("similarity matrix: entry (" + std::to_string(a) +
                                            ", " + std::to_string(b) +
                                            ") must be finite and positive");
            }
            if (v != values_[b * dim_ + a]) {
                throw std::invalid_argument("similarity matrix: not symmetric at (" +
                                            std::to_string(a) + ", " + std::to_string(b) + ")");
            }
            max_value_ = std::max(max_value_, v);
            if (v != values_[0]) constant_ = false;
        }
    }
}

SimilarityMatrix SimilarityMatrix::constant(std::size_t dim, double value) {
    return SimilarityMatrix(dim, std::vector<double>(dim * dim, value));
}

void SimilarityMatrix::apply(std::span<const double> v, std::span<double> out) const {
    if (v.size() != dim_ || out.size() != dim_) {
        throw std::invalid_argument("similarity matrix: vector size mismatch");
    }
    if (constant_) {
        const double s = values_[0] * kernels::sum(v);
        std::fill(out.begin(), out.end(), s);
        return;
    }
    for (std::size_t a = 0; a < dim_; ++a) out[a] = kernels::dot(row(a), v);
}

namespace {

std::size_t frame_dim(const ProductSpace& space, const SiteSet& frame) {
    std::size_t dim = 1;
    for (int site : frame) dim *= space.alphabet_size(site);
    return dim;
}

} // namespace

Legend::Legend(const FrameSystem& fs, std::vector<SimilarityMatrix> matrices)
    : matrices_(std::move(matrices)) {
    if (matrices_.size() != fs.frame_count()) {
        throw std::invalid_argument("legend: " + std::to_string(matrices_.size()) +
                                    " matrices for " + std::to_string(fs.frame_count()) +
                                    " frames");
    }
    for (std::size_t f = 0; f < matrices_.size(); ++f) {
        const std::size_t want = frame_dim(fs.space(), fs.frame(f));
        if (matrices_[f].dim() != want) {
            throw std::invalid_argument("legend: matrix for frame " + std::to_string(f + 1) +
                                        " has dimension " + std::to_string(matrices_[f].dim()) +
                                        ", frame needs " + std::to_string(want));
        }
        total_max_rate_ += matrices_[f].max_value();
    }
}

Legend Legend::uniform(const FrameSystem& fs, double rate) {
    std::vector<SimilarityMatrix> mats;
    mats.reserve(fs.frame_count());
    for (std::size_t f = 0; f < fs.frame_count(); ++f) {
        mats.push_back(SimilarityMatrix::constant(frame_dim(fs.space(), fs.frame(f)), rate));
    }
    return Legend(fs, std::move(mats));
}

std::optional<std::pair<int, int>> find_unseparated_pair(const FrameSystem& fs) {
    const int n = fs.space().site_count();
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (!fs.separates(i, j)) return std::make_pair(i, j);
        }
    }
    return std::nullopt;
}

bool is_t0(const FrameSystem& fs) { return !find_unseparated_pair(fs).has_value(); }

std::vector<SiteSet> equivalence_classes(const FrameSystem& fs) {
    const int n = fs.space().site_count();
    std::vector<SiteSet> classes;
    for (int i = 0; i < n; ++i) {
        bool placed = false;
        for (SiteSet& cls : classes) {
            if (!fs.separates(cls.front(), i)) {
                cls.push_back(i);
                placed = true;
                break;
            }
        }
        if (!placed) classes.push_back({i});
    }
    return classes;
}

QuotientSystem quotient_system(const FrameSystem& fs) {
    const ProductSpace& space = fs.space();
    std::vector<SiteSet> classes = equivalence_classes(fs);

    std::vector<Letter> sizes;
    sizes.reserve(classes.size());
    for (const SiteSet& cls : classes) {
        StateIndex prod = 1;
        for (int site : cls) prod *= space.alphabet_size(site);
        if (prod > StateIndex{0xFFFFFFFF}) {
            throw CapExceededError("quotient: merged alphabet too large for one site");
        }
        sizes.push_back(static_cast<Letter>(prod));
    }
    SpacePtr qspace = make_space(std::move(sizes), space.state_cap());

    // A frame never splits a class, so class membership of any one member
    // decides membership of the class; the induced frames stay index-aligned.
    std::vector<SiteSet> qframes;
    qframes.reserve(fs.frame_count());
    for (const SiteSet& frame : fs.frames()) {
        SiteSet qframe;
        for (std::size_t j = 0; j < classes.size(); ++j) {
            if (std::binary_search(frame.begin(), frame.end(), classes[j].front())) {
                qframe.push_back(static_cast<int>(j));
            }
        }
        qframes.push_back(std::move(qframe));
    }
    FrameSystem qsystem(qspace, std::move(qframes));
    return QuotientSystem{std::move(classes), fs.space_ptr(), std::move(qspace),
                          std::move(qsystem)};
}

Word QuotientSystem::to_quotient(const Word& w) const {
    if (!original_space->valid_word(w)) {
        throw std::invalid_argument("quotient: word does not belong to the original space");
    }
    Word qw(classes.size());
    for (std::size_t j = 0; j < classes.size(); ++j) {
        StateIndex v = 0;
        for (int site : classes[j]) {
            v = v * original_space->alphabet_size(site) + w[static_cast<std::size_t>(site)];
        }
        qw[j] = static_cast<Letter>(v);
    }
    return qw;
}

Word QuotientSystem::from_quotient(const Word& qw) const {
    if (!space->valid_word(qw)) {
        throw std::invalid_argument("quotient: word does not belong to the quotient space");
    }
    Word w(static_cast<std::size_t>(original_space->site_count()));
    for (std::size_t j = 0; j < classes.size(); ++j) {
        StateIndex v = qw[j];
        for (auto it = classes[j].rbegin(); it != classes[j].rend(); ++it) {
            const Letter k = original_space->alphabet_size(*it);
            w[static_cast<std::size_t>(*it)] = static_cast<Letter>(v % k);
            v /= k;
        }
    }
    return w;
}

SeparationReport check_separation(const DenseMeasure& mu, const FrameSystem& fs, double tol) {
    if (mu.space() != fs.space()) throw std::invalid_argument("separation: space mismatch");
    SeparationReport report;
    const std::span<const double> w = mu.weights();
    for (std::size_t f = 0; f < fs.frame_count(); ++f) {
        const SiteSet& frame = fs.frame(f);
        SubsetIndexer ix(mu.space(), frame);
        const MarginalTable on_frame = marginal(mu, frame);
        const MarginalTable on_rest = marginal(mu, complement_sites(mu.space(), frame));
        // The odometer enumerates rest sub-words in ascending sub-index
        // order, so a running counter lines offsets up with the rest marginal.
        std::size_t rest_index = 0;
        ix.for_each_rest_offset([&](StateIndex rest) {
            const double rest_weight = on_rest.weights[rest_index++];
            for (std::size_t u = 0; u < on_frame.weights.size(); ++u) {
                const StateIndex s = ix.subset_offset(u) + rest;
                const double defect = std::fabs(w[s] - on_frame.weights[u] * rest_weight);
                if (defect > report.max_violation) {
                    report.max_violation = defect;
                    report.worst_frame = f;
                    report.worst_state = s;
                }
            }
        });
    }
    report.separated = report.max_violation <= tol;
    return report;
}

FactorizationReport check_factorization(const DenseMeasure& mu, const FrameSystem& fs,
                                        double tol) {
    if (mu.space() != fs.space()) throw std::invalid_argument("factorization: space mismatch");
    const DenseMeasure coupled = block_product(mu, equivalence_classes(fs));
    FactorizationReport report;
    report.max_defect = kernels::max_abs_diff(mu.weights(), coupled.weights());
    report.factorized = report.max_defect <= tol;
    return report;
}

} // namespace recomb
