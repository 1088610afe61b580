#include "recomb/product_space.hpp"

#include <algorithm>
#include <sstream>
#include <string>

namespace recomb {

ProductSpace::ProductSpace(std::vector<Letter> alphabet_sizes, StateIndex state_cap)
    : sizes_(std::move(alphabet_sizes)), cap_(state_cap) {
    if (sizes_.empty()) {
        throw std::invalid_argument("ProductSpace: site list must be nonempty");
    }
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
        if (sizes_[i] == 0) {
            throw std::invalid_argument("ProductSpace: alphabet of site " + std::to_string(i + 1) +
                                        " is empty");
        }
    }
    places_.assign(sizes_.size(), 1);
    StateIndex total = 1;
    for (std::size_t i = sizes_.size(); i-- > 0;) {
        places_[i] = total;
        if (total > cap_ / sizes_[i]) {
            throw CapExceededError("ProductSpace: state count exceeds cap of " +
                                   std::to_string(cap_) + " states");
        }
        total *= sizes_[i];
    }
    if (total > cap_) {
        throw CapExceededError("ProductSpace: state count exceeds cap of " +
                               std::to_string(cap_) + " states");
    }
    total_ = total;
}

StateIndex ProductSpace::encode(const Word& w) const {
    if (w.size() != sizes_.size()) {
        throw std::invalid_argument("encode: word has " + std::to_string(w.size()) +
                                    " letters, space has " + std::to_string(sizes_.size()) +
                                    " sites");
    }
    StateIndex s = 0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] >= sizes_[i]) {
            throw std::invalid_argument("encode: letter " + std::to_string(w[i]) +
                                        " out of range at site " + std::to_string(i + 1));
        }
        s += static_cast<StateIndex>(w[i]) * places_[i];
    }
    return s;
}

Word ProductSpace::decode(StateIndex s) const {
    if (s >= total_) {
        throw std::invalid_argument("decode: state index out of range");
    }
    Word w(sizes_.size());
    for (std::size_t i = 0; i < sizes_.size(); ++i) {
        w[i] = static_cast<Letter>(s / places_[i]);
        s %= places_[i];
    }
    return w;
}

bool ProductSpace::valid_word(const Word& w) const {
    if (w.size() != sizes_.size()) return false;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i] >= sizes_[i]) return false;
    }
    return true;
}

void ProductSpace::require_site_subset(const SiteSet& subset) const {
    for (std::size_t i = 0; i < subset.size(); ++i) {
        if (!valid_site(subset[i])) {
            throw std::invalid_argument("site subset: unknown site " +
                                        std::to_string(subset[i] + 1));
        }
        if (i > 0 && subset[i] <= subset[i - 1]) {
            throw std::invalid_argument("site subset: sites must be strictly increasing");
        }
    }
}

SpacePtr make_space(std::vector<Letter> alphabet_sizes, StateIndex state_cap) {
    return std::make_shared<const ProductSpace>(std::move(alphabet_sizes), state_cap);
}

Word restrict_word(const ProductSpace& space, const Word& w, const SiteSet& subset) {
    if (w.size() != static_cast<std::size_t>(space.site_count())) {
        throw std::invalid_argument("restrict_word: word length mismatch");
    }
    space.require_site_subset(subset);
    Word out;
    out.reserve(subset.size());
    for (int site : subset) out.push_back(w[static_cast<std::size_t>(site)]);
    return out;
}

SiteSet complement_sites(const ProductSpace& space, const SiteSet& subset) {
    space.require_site_subset(subset);
    SiteSet rest;
    rest.reserve(static_cast<std::size_t>(space.site_count()) - subset.size());
    std::size_t k = 0;
    for (int site = 0; site < space.site_count(); ++site) {
        if (k < subset.size() && subset[k] == site) {
            ++k;
        } else {
            rest.push_back(site);
        }
    }
    return rest;
}

SubsetIndexer::SubsetIndexer(const ProductSpace& space, SiteSet subset)
    : subset_(std::move(subset)) {
    space.require_site_subset(subset_);
    rest_ = complement_sites(space, subset_);

    places_.resize(static_cast<std::size_t>(space.site_count()));
    for (int i = 0; i < space.site_count(); ++i) {
        places_[static_cast<std::size_t>(i)] = space.place_value(i);
    }

    subset_sizes_.reserve(subset_.size());
    for (int site : subset_) subset_sizes_.push_back(space.alphabet_size(site));
    rest_sizes_.reserve(rest_.size());
    for (int site : rest_) rest_sizes_.push_back(space.alphabet_size(site));

    subset_places_.assign(subset_.size(), 1);
    std::size_t m = 1;
    for (std::size_t i = subset_.size(); i-- > 0;) {
        subset_places_[i] = m;
        m *= subset_sizes_[i];
    }
    subset_count_ = m;
    rest_count_ = space.state_count() / static_cast<StateIndex>(m);

    identity_ = rest_.empty();
    if (!identity_) {
        // Tabulate the global offset of every sub-word over the subset.
        offsets_.assign(subset_count_, 0);
        std::vector<Letter> digits(subset_.size(), 0);
        StateIndex offset = 0;
        for (std::size_t u = 0; u < subset_count_; ++u) {
            offsets_[u] = offset;
            for (std::size_t j = subset_.size(); j-- > 0;) {
                const auto site = static_cast<std::size_t>(subset_[j]);
                if (++digits[j] < subset_sizes_[j]) {
                    offset += places_[site];
                    break;
                }
                digits[j] = 0;
                offset -= places_[site] * (subset_sizes_[j] - 1);
            }
        }
    }
}

std::size_t SubsetIndexer::subset_value(StateIndex s) const {
    if (identity_) return static_cast<std::size_t>(s);
    std::size_t u = 0;
    for (std::size_t j = 0; j < subset_.size(); ++j) {
        const auto site = static_cast<std::size_t>(subset_[j]);
        const auto digit = (s / places_[site]) % subset_sizes_[j];
        u += static_cast<std::size_t>(digit) * subset_places_[j];
    }
    return u;
}

} // namespace recomb
