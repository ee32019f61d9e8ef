#pragma once

// Truncated dexp, dexp^{-1} and Baker-Campbell-Hausdorff series in algebra
// coordinates, together with their natural interval inclusions.
//
// Conventions (left trivialization):
//   dexp_T     = sum_k (-1)^k / (k+1)! ad_T^k
//   dexp^-1_T  = sum_k B_k / k! ad_T^k,   B_1 = +1/2
//   bch(X, Y)  = log(exp(X) exp(Y))
//              = X + Y + [X,Y]/2 + [X,[X,Y]]/12 - [Y,[X,Y]]/12 + ...
//
// Order 2 keeps terms of total polynomial degree <= 2, order 3 adds the
// degree-3 nested brackets. The interval versions enclose the truncated
// series only.

#include <stdexcept>
#include <string>

#include "interval.hpp"
#include "lie_group.hpp"

namespace lie_reach {

enum class TruncationOrder { second = 2, third = 3 };

inline TruncationOrder truncation_order_from_int(int degree)
{
    switch (degree) {
    case 2:
        return TruncationOrder::second;
    case 3:
        return TruncationOrder::third;
    default:
        throw std::invalid_argument("truncation degree must be 2 or 3, got " + std::to_string(degree));
    }
}

inline int to_int(TruncationOrder order)
{
    return static_cast<int>(order);
}

template <GroupModel G>
Vec<G::dim> dexpinv(const Vec<G::dim> &theta, const Vec<G::dim> &a, TruncationOrder order)
{
    if constexpr (G::abelian) {
        return a;
    } else {
        const Vec<G::dim> ad1 = G::bracket(theta, a);
        Vec<G::dim> out = a + 0.5 * ad1;
        if (order == TruncationOrder::third) out += (1.0 / 12.0) * G::bracket(theta, ad1);
        return out;
    }
}

template <GroupModel G>
Vec<G::dim> dexp(const Vec<G::dim> &theta, const Vec<G::dim> &a, TruncationOrder order)
{
    if constexpr (G::abelian) {
        return a;
    } else {
        const Vec<G::dim> ad1 = G::bracket(theta, a);
        Vec<G::dim> out = a - 0.5 * ad1;
        if (order == TruncationOrder::third) out += (1.0 / 6.0) * G::bracket(theta, ad1);
        return out;
    }
}

// Truncated log(exp(x) exp(y)).
template <GroupModel G>
Vec<G::dim> bch(const Vec<G::dim> &x, const Vec<G::dim> &y, TruncationOrder order)
{
    if constexpr (G::abelian) {
        return x + y;
    } else {
        const Vec<G::dim> xy = G::bracket(x, y);
        Vec<G::dim> out = (y + x) + 0.5 * xy;
        if (order == TruncationOrder::third) out += (1.0 / 12.0) * (G::bracket(x, xy) - G::bracket(y, xy));
        return out;
    }
}

// DEXPINV: encloses dexpinv(theta, a) for every theta in theta_box, a in a_box.
template <GroupModel G>
IntervalVector<G::dim> interval_dexpinv(const IntervalVector<G::dim> &theta_box, const IntervalVector<G::dim> &a_box,
                                        TruncationOrder order)
{
    if constexpr (G::abelian) {
        return a_box;
    } else {
        const IntervalVector<G::dim> ad1 = G::bracket(theta_box, a_box);
        IntervalVector<G::dim> out = a_box + 0.5 * ad1;
        if (order == TruncationOrder::third) out = out + (1.0 / 12.0) * G::bracket(theta_box, ad1);
        return out;
    }
}

// BCH_c: encloses bch(c, y) = log(exp(c) exp(y)) for every y in box.
//
// Recentering a set center * exp(box) at center * exp(m) uses c = -m, since
// center * exp(y) = center * exp(m) * exp(bch(-m, y)).
template <GroupModel G>
IntervalVector<G::dim> interval_bch(const Vec<G::dim> &c, const IntervalVector<G::dim> &box, TruncationOrder order)
{
    if constexpr (G::abelian) {
        return box + c;
    } else {
        const auto cp = IntervalVector<G::dim>::point(c);
        const IntervalVector<G::dim> cy = G::bracket(cp, box);
        IntervalVector<G::dim> out = (box + c) + 0.5 * cy;
        if (order == TruncationOrder::third) {
            out = out + (1.0 / 12.0) * (G::bracket(cp, cy) - G::bracket(box, cy));
        }
        return out;
    }
}

} // namespace lie_reach
