#pragma once

#include <unordered_map>
#include <vector>

#include "recomb/frames.hpp"
#include "recomb/product_space.hpp"

namespace recomb {

/// The recombination of `x` with `y` along `frame`: letters of y on the
/// frame, letters of x elsewhere.
Word recombine(const ProductSpace& space, const SiteSet& frame, const Word& x, const Word& y);

/// Deduplicated set of words over one space (a seed set for closure).
class WordSet {
public:
    /// Encodes, deduplicates and sorts. Throws on an invalid word.
    WordSet(SpacePtr space, const std::vector<Word>& words);

    const SpacePtr& space_ptr() const { return space_; }
    const ProductSpace& space() const { return *space_; }

    const std::vector<StateIndex>& indices() const { return indices_; }
    std::size_t size() const { return indices_.size(); }
    bool empty() const { return indices_.empty(); }
    bool is_full() const { return indices_.size() == space_->state_count(); }

    bool contains(StateIndex s) const;
    bool contains(const Word& w) const { return contains(space_->encode(w)); }

    std::vector<Word> words() const;

private:
    SpacePtr space_;
    std::vector<StateIndex> indices_; // sorted ascending
};

/// True iff at every site the words jointly use every letter of that site's
/// alphabet — the hypothesis under which a T0 system regenerates the whole
/// space by recombination.
bool covers_all_letters(const WordSet& words);

struct RecombinationStep {
    StateIndex source = 0;  // word contributing the off-frame letters
    StateIndex partner = 0; // word contributing the frame letters
    StateIndex result = 0;
    std::size_t frame_index = 0;
};

/// Least set of words containing the seeds and closed under recombination
/// along every frame, with the discovery bookkeeping needed to replay a
/// derivation of any member.
struct ClosureResult {
    SpacePtr space;
    std::vector<StateIndex> members;         // sorted ascending
    std::vector<StateIndex> discovery_order; // seeds (ascending) first, then BFS
    bool full = false;                       // members == entire space

    bool contains(StateIndex s) const;
    bool contains(const Word& w) const { return contains(space->encode(w)); }

    struct Parent {
        StateIndex source = 0;
        StateIndex partner = 0;
        std::size_t frame_index = 0;
    };
    /// Discovery parent of every non-seed member.
    std::unordered_map<StateIndex, Parent> parents;
};

/// Worklist saturation over encoded states. Each dequeued word is paired, in
/// both roles, with every word discovered before its dequeue; the FIFO order
/// makes logs and witness sequences reproducible.
ClosureResult closure(const WordSet& seed, const FrameSystem& fs);

/// A finite derivation of `target` from the seeds: every step recombines two
/// words that are seeds or results of earlier steps. Throws
/// std::invalid_argument when the target is outside the closure.
std::vector<RecombinationStep> find_recombination_sequence(const ClosureResult& cl,
                                                           const Word& target);

} // namespace recomb
