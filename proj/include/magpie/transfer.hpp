#pragma once

// Grid-transfer operators connecting resolution levels: restriction is the
// 2x2 bin average (average pooling), prolongation is 2x2 replication. They
// satisfy restrict(prolong(f)) = f exactly and prolong is 4x the transpose
// of restrict, which is what makes the coarse-level descent argument work.

#include <stdexcept>
#include <string>

#include "magpie/field.hpp"

namespace magpie {

template <typename T>
inline Field2D<T> restrict_field(const Field2D<T> &f) {
    if (f.width() % 2 != 0 || f.height() % 2 != 0)
        throw std::invalid_argument("restrict_field: dimensions must be even, got " +
                                    std::to_string(f.width()) + "x" + std::to_string(f.height()));
    const int wc = f.width() / 2;
    const int hc = f.height() / 2;
    Field2D<T> out(wc, hc);
    for (int i = 0; i < hc; ++i) {
        for (int j = 0; j < wc; ++j) {
            // pairwise sum: on a constant bin both partial sums are exact
            // doublings, making restrict(prolong(f)) == f bit-exact
            out.at(i, j) = ((f.at(2 * i, 2 * j) + f.at(2 * i, 2 * j + 1)) +
                            (f.at(2 * i + 1, 2 * j) + f.at(2 * i + 1, 2 * j + 1))) *
                           0.25;
        }
    }
    return out;
}

template <typename T>
inline Field2D<T> prolong_field(const Field2D<T> &f) {
    Field2D<T> out(f.width() * 2, f.height() * 2);
    for (int i = 0; i < f.height(); ++i) {
        for (int j = 0; j < f.width(); ++j) {
            const T v = f.at(i, j);
            out.at(2 * i, 2 * j) = v;
            out.at(2 * i, 2 * j + 1) = v;
            out.at(2 * i + 1, 2 * j) = v;
            out.at(2 * i + 1, 2 * j + 1) = v;
        }
    }
    return out;
}

} // namespace magpie
