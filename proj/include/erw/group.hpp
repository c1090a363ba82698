#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace erw {

// Generators are referred to by compact ids so that a walker's word costs
// one byte per letter. Canonical ordering: the 2*d1 free halves first, with
// inverse pairs adjacent (a_i at 2i, a_i^{-1} at 2i+1), then the d2
// involutions.
using GenId = std::uint8_t;

enum class GeneratorKind : std::uint8_t { FreeHalf, Involution };

struct Generator {
    GenId id;
    GeneratorKind kind;
    GenId partner;  // id of the inverse; equals id for involutions
};

// Symmetric generating set of Z^{*d1} * Z2^{*d2}, whose Cayley graph is the
// d-regular tree with d = 2*d1 + d2. Immutable after construction; safe to
// share across threads.
class GroupPresentation {
public:
    GroupPresentation(int d1, int d2) : d1_(d1), d2_(d2) {
        if (d1 < 0 || d2 < 0)
            throw std::invalid_argument("group: d1 and d2 must be nonnegative");
        const int d = 2 * d1 + d2;
        if (d < 2)
            throw std::invalid_argument("group: need 2*d1 + d2 >= 2, got d = " +
                                        std::to_string(d));
        if (d > 255)
            throw std::invalid_argument("group: generator ids are 8-bit, d must be <= 255");
        gens_.reserve(static_cast<std::size_t>(d));
        inv_.resize(static_cast<std::size_t>(d));
        for (int i = 0; i < d1; ++i) {
            const GenId a = static_cast<GenId>(2 * i);
            const GenId ainv = static_cast<GenId>(2 * i + 1);
            gens_.push_back({a, GeneratorKind::FreeHalf, ainv});
            gens_.push_back({ainv, GeneratorKind::FreeHalf, a});
            inv_[a] = ainv;
            inv_[ainv] = a;
        }
        for (int j = 0; j < d2; ++j) {
            const GenId b = static_cast<GenId>(2 * d1 + j);
            gens_.push_back({b, GeneratorKind::Involution, b});
            inv_[b] = b;
        }
    }

    int d1() const { return d1_; }
    int d2() const { return d2_; }
    int degree() const { return 2 * d1_ + d2_; }

    const Generator& generator(GenId id) const { return gens_.at(id); }
    const std::vector<Generator>& generators() const { return gens_; }

    GenId inverse(GenId g) const { return inv_[g]; }
    Generator inverse(const Generator& g) const { return gens_[inv_[g.id]]; }

    // True iff appending g to a reduced word ending in `top` shortens it.
    bool cancels(GenId top, GenId g) const { return g == inv_[top]; }

private:
    int d1_;
    int d2_;
    std::vector<Generator> gens_;
    std::vector<GenId> inv_;
};

inline GroupPresentation make_presentation(int d1, int d2) {
    return GroupPresentation(d1, d2);
}

}  // namespace erw
