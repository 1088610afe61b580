#include "recomb/reach.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>
#include <utility>

namespace recomb {

Word recombine(const ProductSpace& space, const SiteSet& frame, const Word& x, const Word& y) {
    if (!space.valid_word(x) || !space.valid_word(y)) {
        throw std::invalid_argument("recombine: word does not belong to the space");
    }
    space.require_site_subset(frame);
    Word out = x;
    for (int site : frame) out[static_cast<std::size_t>(site)] = y[static_cast<std::size_t>(site)];
    return out;
}

WordSet::WordSet(SpacePtr space, const std::vector<Word>& words) : space_(std::move(space)) {
    if (!space_) throw std::invalid_argument("word set: null space");
    indices_.reserve(words.size());
    for (const Word& w : words) indices_.push_back(space_->encode(w));
    std::sort(indices_.begin(), indices_.end());
    indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
}

bool WordSet::contains(StateIndex s) const {
    return std::binary_search(indices_.begin(), indices_.end(), s);
}

std::vector<Word> WordSet::words() const {
    std::vector<Word> out;
    out.reserve(indices_.size());
    for (const StateIndex s : indices_) out.push_back(space_->decode(s));
    return out;
}

bool covers_all_letters(const WordSet& words) {
    const ProductSpace& space = words.space();
    std::vector<std::vector<char>> seen(static_cast<std::size_t>(space.site_count()));
    for (int i = 0; i < space.site_count(); ++i) {
        seen[static_cast<std::size_t>(i)].assign(space.alphabet_size(i), 0);
    }
    for (const StateIndex s : words.indices()) {
        const Word w = space.decode(s);
        for (std::size_t i = 0; i < w.size(); ++i) seen[i][w[i]] = 1;
    }
    for (const auto& site : seen) {
        for (const char hit : site) {
            if (!hit) return false;
        }
    }
    return true;
}

bool ClosureResult::contains(StateIndex s) const {
    return std::binary_search(members.begin(), members.end(), s);
}

ClosureResult closure(const WordSet& seed, const FrameSystem& fs) {
    if (seed.space() != fs.space()) throw std::invalid_argument("closure: space mismatch");
    if (seed.empty()) throw std::invalid_argument("closure: empty seed set");

    const ProductSpace& space = fs.space();
    std::vector<SubsetIndexer> indexers;
    indexers.reserve(fs.frame_count());
    for (std::size_t f = 0; f < fs.frame_count(); ++f) {
        indexers.emplace_back(space, fs.frame(f));
    }
    // Index-level recombination: swap the frame sub-offset of a for b's.
    const auto recombine_idx = [&](std::size_t f, StateIndex a, StateIndex b) {
        const SubsetIndexer& ix = indexers[f];
        return a - ix.subset_offset(ix.subset_value(a)) + ix.subset_offset(ix.subset_value(b));
    };

    ClosureResult result;
    result.space = fs.space_ptr();
    std::vector<char> member(space.state_count(), 0);
    for (const StateIndex s : seed.indices()) {
        member[s] = 1;
        result.discovery_order.push_back(s);
    }

    std::size_t head = 0;
    while (head < result.discovery_order.size()) {
        const StateIndex x = result.discovery_order[head++];
        // Pair x with everything discovered before its dequeue; words found
        // later pick up the pairing with x when they are dequeued themselves.
        const std::size_t known = result.discovery_order.size();
        for (std::size_t m = 0; m < known; ++m) {
            const StateIndex y = result.discovery_order[m];
            for (std::size_t f = 0; f < indexers.size(); ++f) {
                for (const auto& [src, par] : {std::pair{x, y}, std::pair{y, x}}) {
                    const StateIndex child = recombine_idx(f, src, par);
                    if (!member[child]) {
                        member[child] = 1;
                        result.discovery_order.push_back(child);
                        result.parents.emplace(child, ClosureResult::Parent{src, par, f});
                    }
                }
            }
        }
    }

    result.members = result.discovery_order;
    std::sort(result.members.begin(), result.members.end());
    result.full = result.members.size() == space.state_count();
    return result;
}

std::vector<RecombinationStep> find_recombination_sequence(const ClosureResult& cl,
                                                           const Word& target) {
    const StateIndex goal = cl.space->encode(target);
    if (!cl.contains(goal)) {
        throw std::invalid_argument("derivation: target word is not in the closure");
    }

    std::vector<RecombinationStep> steps;
    std::unordered_set<StateIndex> derived;
    std::vector<StateIndex> stack{goal};
    // Post-order over the discovery parents (a DAG: parents are found
    // strictly earlier than children), so both inputs of a step are seeds or
    // earlier results.
    while (!stack.empty()) {
        const StateIndex s = stack.back();
        if (derived.count(s)) {
            stack.pop_back();
            continue;
        }
        const auto it = cl.parents.find(s);
        if (it == cl.parents.end()) { // seed word
            derived.insert(s);
            stack.pop_back();
            continue;
        }
        const ClosureResult::Parent& p = it->second;
        if (!derived.count(p.source)) {
            stack.push_back(p.source);
            continue;
        }
        if (!derived.count(p.partner)) {
            stack.push_back(p.partner);
            continue;
        }
        steps.push_back({p.source, p.partner, s, p.frame_index});
        derived.insert(s);
        stack.pop_back();
    }
    return steps;
}

} // namespace recomb
