#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "recomb/errors.hpp"

namespace recomb {

/// Symbol code within a site alphabet. Codes are 0-based and dense.
using Letter = std::uint32_t;

/// Index of a point of the product space in the mixed-radix enumeration.
using StateIndex = std::uint64_t;

/// A word: one letter per site, in site order.
using Word = std::vector<Letter>;

/// Sorted, duplicate-free list of 0-based site positions.
using SiteSet = std::vector<int>;

/// Finite product space X = K_1 x ... x K_n of per-site alphabets.
///
/// States are enumerated in mixed radix with site 0 as the most significant
/// digit. This convention is frozen: serialized measures, test vectors and
/// file formats all depend on it.
class ProductSpace {
public:
    static constexpr StateIndex kDefaultStateCap = StateIndex{1} << 24;

    /// Throws std::invalid_argument on an empty site list or a zero alphabet,
    /// CapExceededError when the product of alphabet sizes exceeds `state_cap`.
    explicit ProductSpace(std::vector<Letter> alphabet_sizes,
                          StateIndex state_cap = kDefaultStateCap);

    int site_count() const { return static_cast<int>(sizes_.size()); }
    Letter alphabet_size(int site) const { return sizes_[static_cast<std::size_t>(site)]; }
    const std::vector<Letter>& alphabet_sizes() const { return sizes_; }
    StateIndex state_count() const { return total_; }
    StateIndex state_cap() const { return cap_; }

    /// Mixed-radix weight of a site digit.
    StateIndex place_value(int site) const { return places_[static_cast<std::size_t>(site)]; }

    /// Word -> state index. Throws std::invalid_argument on length mismatch
    /// or a letter outside its alphabet.
    StateIndex encode(const Word& w) const;

    /// State index -> word. Inverse of encode for every index < state_count().
    Word decode(StateIndex s) const;

    bool valid_word(const Word& w) const;
    bool valid_site(int site) const { return site >= 0 && site < site_count(); }

    /// Checks `subset` is sorted, duplicate-free and within range.
    void require_site_subset(const SiteSet& subset) const;

    bool operator==(const ProductSpace& other) const { return sizes_ == other.sizes_; }
    bool operator!=(const ProductSpace& other) const { return !(*this == other); }

private:
    std::vector<Letter> sizes_;
    std::vector<StateIndex> places_;
    StateIndex total_ = 0;
    StateIndex cap_ = kDefaultStateCap;
};

using SpacePtr = std::shared_ptr<const ProductSpace>;

SpacePtr make_space(std::vector<Letter> alphabet_sizes,
                    StateIndex state_cap = ProductSpace::kDefaultStateCap);

/// Letters of `w` at the positions in `subset`, in site order.
Word restrict_word(const ProductSpace& space, const Word& w, const SiteSet& subset);

/// Complement of `subset` in the site set of `space`.
SiteSet complement_sites(const ProductSpace& space, const SiteSet& subset);

/// Splits the state index into a subset part and a complement ("rest") part:
/// every state is subset_offset(u) + rest_offset for exactly one pair, where
/// u enumerates the sub-words over the subset and rest_offset the sub-words
/// over the complement. The workhorse behind marginals and the per-frame
/// dynamics; offsets for the subset are tabulated, rest offsets are produced
/// by an odometer so memory stays O(subset_count).
class SubsetIndexer {
public:
    SubsetIndexer(const ProductSpace& space, SiteSet subset);

    const SiteSet& subset() const { return subset_; }
    const SiteSet& rest_sites() const { return rest_; }
    const std::vector<Letter>& subset_sizes() const { return subset_sizes_; }

    std::size_t subset_count() const { return subset_count_; }
    StateIndex rest_count() const { return rest_count_; }

    StateIndex subset_offset(std::size_t u) const {
        return identity_ ? static_cast<StateIndex>(u) : offsets_[u];
    }

    /// Sub-index of the subset digits of state `s` (mixed radix over the
    /// subset, first subset site most significant).
    std::size_t subset_value(StateIndex s) const;

    /// Calls f(rest_offset) once per complement sub-word, in a fixed order.
    template <class F>
    void for_each_rest_offset(F&& f) const {
        if (rest_.empty()) {
            f(StateIndex{0});
            return;
        }
        std::vector<Letter> digits(rest_.size(), 0);
        StateIndex offset = 0;
        for (;;) {
            f(offset);
            int j = static_cast<int>(rest_.size()) - 1;
            for (; j >= 0; --j) {
                const auto site = static_cast<std::size_t>(rest_[static_cast<std::size_t>(j)]);
                if (++digits[static_cast<std::size_t>(j)] < rest_sizes_[static_cast<std::size_t>(j)]) {
                    offset += places_[site];
                    break;
                }
                digits[static_cast<std::size_t>(j)] = 0;
                offset -= places_[site] * (rest_sizes_[static_cast<std::size_t>(j)] - 1);
            }
            if (j < 0) break;
        }
    }

private:
    SiteSet subset_;
    SiteSet rest_;
    std::vector<Letter> subset_sizes_;
    std::vector<Letter> rest_sizes_;
    std::vector<StateIndex> places_;       // per original site
    std::vector<StateIndex> subset_places_; // mixed-radix weights of the sub-index
    std::vector<StateIndex> offsets_;       // empty when identity_
    std::size_t subset_count_ = 1;
    StateIndex rest_count_ = 1;
    bool identity_ = false;
};

} // namespace recomb
