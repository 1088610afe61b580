#pragma once

// Deliberately naive reference implementations, written word-by-word from the
// definitions with no shared machinery (no SubsetIndexer, no kernels). Slow
// and allocation-heavy on purpose: they exist to cross-check the optimized
// library code, so they must not share its structure.

#include <cmath>
#include <map>
#include <vector>

#include "recomb/frames.hpp"
#include "recomb/measure.hpp"
#include "recomb/product_space.hpp"

namespace oracle {

using namespace recomb;

/// Mixed-radix sub-index of the letters of `w` over `sites` (first listed
/// site most significant) — restated here rather than reused.
inline std::size_t sub_index(const ProductSpace& space, const Word& w, const SiteSet& sites) {
    std::size_t v = 0;
    for (int site : sites) {
        v = v * space.alphabet_size(site) + w[static_cast<std::size_t>(site)];
    }
    return v;
}

/// Writes sub-index `u` back into the `sites` positions of `w`.
inline void put_sub_index(const ProductSpace& space, Word& w, const SiteSet& sites,
                          std::size_t u) {
    for (auto it = sites.rbegin(); it != sites.rend(); ++it) {
        const Letter k = space.alphabet_size(*it);
        w[static_cast<std::size_t>(*it)] = static_cast<Letter>(u % k);
        u /= k;
    }
}

inline std::size_t frame_dim(const ProductSpace& space, const SiteSet& frame) {
    std::size_t d = 1;
    for (int site : frame) d *= space.alphabet_size(site);
    return d;
}

/// Marginal over `sites` by direct accumulation.
inline std::vector<double> naive_marginal(const ProductSpace& space,
                                          std::span<const double> mu, const SiteSet& sites) {
    std::vector<double> out(frame_dim(space, sites), 0.0);
    for (StateIndex s = 0; s < space.state_count(); ++s) {
        out[sub_index(space, space.decode(s), sites)] += mu[s];
    }
    return out;
}

/// Right-hand side of the master equation, transcribed literally: a point at
/// z gains from every x agreeing with z off the frame, which jumps x -> z at
/// rate phi(x_I, z_I) * mu_I(z_I); it loses at the total rate of jumps out,
/// sum over y_I of phi(z_I, y_I) * mu_I(y_I).
inline std::vector<double> naive_rhs(const ProductSpace& space,
                                     const std::vector<SiteSet>& frames,
                                     const std::vector<SimilarityMatrix>& phis,
                                     std::span<const double> mu) {
    std::vector<double> out(space.state_count(), 0.0);
    for (std::size_t f = 0; f < frames.size(); ++f) {
        const SiteSet& I = frames[f];
        const SimilarityMatrix& phi = phis[f];
        const std::size_t dim = frame_dim(space, I);
        const std::vector<double> marg = naive_marginal(space, mu, I);
        for (StateIndex z = 0; z < space.state_count(); ++z) {
            const Word zw = space.decode(z);
            const std::size_t zi = sub_index(space, zw, I);

            double out_rate = 0.0;
            for (std::size_t y = 0; y < dim; ++y) out_rate += phi(zi, y) * marg[y];
            out[z] -= mu[z] * out_rate;

            Word xw = zw;
            for (std::size_t u = 0; u < dim; ++u) {
                put_sub_index(space, xw, I, u);
                out[z] += mu[space.encode(xw)] * phi(u, zi) * marg[zi];
            }
        }
    }
    return out;
}

/// One-frame recombination of x with partner y, by words.
inline Word naive_recombine(const Word& x, const Word& y, const SiteSet& frame) {
    Word out = x;
    for (int site : frame) out[static_cast<std::size_t>(site)] = y[static_cast<std::size_t>(site)];
    return out;
}

/// Reachability closure by brute force: repeat full pairwise passes over a
/// word set until nothing new appears.
inline std::vector<Word> naive_closure(const ProductSpace& space,
                                       const std::vector<Word>& seeds,
                                       const std::vector<SiteSet>& frames) {
    std::map<Word, bool> seen;
    for (const Word& w : seeds) seen[w] = true;
    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<Word> members;
        members.reserve(seen.size());
        for (const auto& [w, _] : seen) members.push_back(w);
        for (const Word& x : members) {
            for (const Word& y : members) {
                for (const SiteSet& I : frames) {
                    const Word z = naive_recombine(x, y, I);
                    if (!seen.count(z)) {
                        seen[z] = true;
                        grew = true;
                    }
                }
            }
        }
    }
    std::vector<Word> out;
    out.reserve(seen.size());
    for (const auto& [w, _] : seen) out.push_back(w);
    (void)space;
    return out;
}

} // namespace oracle
