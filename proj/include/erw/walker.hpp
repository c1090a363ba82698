#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "erw/group.hpp"

namespace erw {

// Current position as a reduced word over the generating set. Appending a
// letter either cancels the last letter or extends the word, so the word is
// maintained as a stack and never re-reduced from scratch.
class Walker {
public:
    explicit Walker(const GroupPresentation& group, std::size_t horizon = 0)
        : group_(&group) {
        word_.reserve(horizon);
    }

    // Multiply on the right by g, keeping the word reduced.
    void apply_step(GenId g) {
        if (!word_.empty() && group_->cancels(word_.back(), g))
            word_.pop_back();
        else
            word_.push_back(g);
    }

    // Reversible form of apply_step, for depth-first path enumeration.
    struct StepUndo {
        bool extended;
        GenId popped;  // the letter removed, when the step cancelled
    };

    StepUndo apply_step_recorded(GenId g) {
        if (!word_.empty() && group_->cancels(word_.back(), g)) {
            const GenId top = word_.back();
            word_.pop_back();
            return {false, top};
        }
        word_.push_back(g);
        return {true, g};
    }

    void undo_step(const StepUndo& u) {
        if (u.extended)
            word_.pop_back();
        else
            word_.push_back(u.popped);
    }

    // Graph distance to the identity; equals the reduced word length.
    std::size_t distance() const { return word_.size(); }

    bool at_root() const { return word_.empty(); }

    // The unique neighbor step that decreases the distance. Only defined
    // away from the root.
    GenId toward_root() const {
        if (word_.empty())
            throw std::logic_error("walker: toward_root undefined at the root");
        return group_->inverse(word_.back());
    }

    void reset() { word_.clear(); }

    const std::vector<GenId>& word() const { return word_; }
    const GroupPresentation& group() const { return *group_; }

private:
    const GroupPresentation* group_;
    std::vector<GenId> word_;
};

}  // namespace erw
