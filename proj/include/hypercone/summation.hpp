// SPDX-License-Identifier: Apache-2.0

#ifndef HYPERCONE_SUMMATION_HPP
#define HYPERCONE_SUMMATION_HPP

#include <cstddef>

namespace hypercone {

/// Pairwise (cascade) summation of term(0), ..., term(n-1). The split points
/// depend only on n, so the result is reproducible bit-for-bit.
template <class Term>
double pairwise_sum(std::size_t begin, std::size_t end, const Term& term) {
    constexpr std::size_t block = 256;
    if (end - begin <= block) {
        double s = 0.0;
        for (std::size_t i = begin; i < end; ++i) s += term(i);
        return s;
    }
    const std::size_t mid = begin + (end - begin) / 2;
    return pairwise_sum(begin, mid, term) + pairwise_sum(mid, end, term);
}

template <class Term>
double pairwise_sum(std::size_t n, const Term& term) {
    return pairwise_sum(std::size_t{0}, n, term);
}

} // namespace hypercone

#endif
