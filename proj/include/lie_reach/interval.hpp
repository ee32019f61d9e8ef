#pragma once

// Closed real intervals and fixed-length interval vectors.
//
// Endpoints use plain double arithmetic (no directed rounding). Callers that
// test membership of floating-point results should pass a small slack to
// contains().

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "errors.hpp"

namespace lie_reach {

template <int N>
using Vec = Eigen::Matrix<double, N, 1>;

class Interval {
public:
    constexpr Interval() = default;
    explicit Interval(double point) : Interval(point, point) {}
    Interval(double lo, double hi) : lo_(lo), hi_(hi)
    {
        // NaN endpoints fail this test as well.
        if (!(lo <= hi)) {
            throw OrderingViolation("interval lower bound " + std::to_string(lo) + " exceeds upper bound "
                                    + std::to_string(hi));
        }
    }

    [[nodiscard]] constexpr double lo() const noexcept { return lo_; }
    [[nodiscard]] constexpr double hi() const noexcept { return hi_; }
    [[nodiscard]] constexpr double mid() const noexcept { return 0.5 * (lo_ + hi_); }
    [[nodiscard]] constexpr double width() const noexcept { return hi_ - lo_; }
    [[nodiscard]] constexpr bool is_point() const noexcept { return lo_ == hi_; }

    [[nodiscard]] constexpr bool contains(double x, double slack = 0.0) const noexcept
    {
        return lo_ - slack <= x && x <= hi_ + slack;
    }
    [[nodiscard]] constexpr bool subset_of(const Interval &other) const noexcept
    {
        return other.lo_ <= lo_ && hi_ <= other.hi_;
    }

    friend constexpr bool operator==(const Interval &, const Interval &) = default;

private:
    double lo_ = 0.0;
    double hi_ = 0.0;
};

inline Interval operator+(const Interval &a, const Interval &b)
{
    return {a.lo() + b.lo(), a.hi() + b.hi()};
}

inline Interval operator-(const Interval &a)
{
    return {-a.hi(), -a.lo()};
}

inline Interval operator-(const Interval &a, const Interval &b)
{
    return {a.lo() - b.hi(), a.hi() - b.lo()};
}

inline Interval operator*(const Interval &a, const Interval &b)
{
    const double p1 = a.lo() * b.lo();
    const double p2 = a.lo() * b.hi();
    const double p3 = a.hi() * b.lo();
    const double p4 = a.hi() * b.hi();
    return {std::min({p1, p2, p3, p4}), std::max({p1, p2, p3, p4})};
}

inline Interval operator*(double s, const Interval &a)
{
    return s >= 0.0 ? Interval{s * a.lo(), s * a.hi()} : Interval{s * a.hi(), s * a.lo()};
}

inline Interval operator*(const Interval &a, double s)
{
    return s * a;
}

inline Interval hull(const Interval &a, const Interval &b)
{
    return {std::min(a.lo(), b.lo()), std::max(a.hi(), b.hi())};
}

// Ordered tuple of N intervals; the order is the componentwise one.
template <int N>
class IntervalVector {
public:
    static constexpr int size = N;

    IntervalVector() = default;
    explicit IntervalVector(const std::array<Interval, N> &components) : data_(components) {}
    IntervalVector(const Vec<N> &lower, const Vec<N> &upper)
    {
        for (int i = 0; i < N; ++i) {
            data_[static_cast<std::size_t>(i)] = Interval(lower[i], upper[i]);
        }
    }

    static IntervalVector point(const Vec<N> &v) { return IntervalVector(v, v); }

    Interval &operator[](int i) { return data_[static_cast<std::size_t>(i)]; }
    const Interval &operator[](int i) const { return data_[static_cast<std::size_t>(i)]; }

    [[nodiscard]] Vec<N> lower() const
    {
        Vec<N> v;
        for (int i = 0; i < N; ++i) v[i] = (*this)[i].lo();
        return v;
    }
    [[nodiscard]] Vec<N> upper() const
    {
        Vec<N> v;
        for (int i = 0; i < N; ++i) v[i] = (*this)[i].hi();
        return v;
    }
    [[nodiscard]] Vec<N> midpoint() const { return 0.5 * (lower() + upper()); }
    [[nodiscard]] Vec<N> width() const { return upper() - lower(); }
    [[nodiscard]] double max_width() const { return N == 0 ? 0.0 : width().maxCoeff(); }

    [[nodiscard]] std::span<const Interval> components() const { return data_; }

    [[nodiscard]] bool subset_of(const IntervalVector &other) const
    {
        for (int i = 0; i < N; ++i) {
            if (!(*this)[i].subset_of(other[i])) return false;
        }
        return true;
    }

    friend bool operator==(const IntervalVector &, const IntervalVector &) = default;

private:
    std::array<Interval, static_cast<std::size_t>(N)> data_{};
};

template <int N>
IntervalVector<N> operator+(const IntervalVector<N> &a, const IntervalVector<N> &b)
{
    IntervalVector<N> out;
    for (int i = 0; i < N; ++i) out[i] = a[i] + b[i];
    return out;
}

template <int N>
IntervalVector<N> operator-(const IntervalVector<N> &a, const IntervalVector<N> &b)
{
    IntervalVector<N> out;
    for (int i = 0; i < N; ++i) out[i] = a[i] - b[i];
    return out;
}

template <int N>
IntervalVector<N> operator*(double s, const IntervalVector<N> &a)
{
    IntervalVector<N> out;
    for (int i = 0; i < N; ++i) out[i] = s * a[i];
    return out;
}

// Translation by a point; exact up to rounding of each endpoint.
template <int N>
IntervalVector<N> operator+(const IntervalVector<N> &a, const Vec<N> &shift)
{
    return IntervalVector<N>(a.lower() + shift, a.upper() + shift);
}

template <int N>
IntervalVector<N> hull(const IntervalVector<N> &a, const IntervalVector<N> &b)
{
    IntervalVector<N> out;
    for (int i = 0; i < N; ++i) out[i] = hull(a[i], b[i]);
    return out;
}

// Natural inclusion of the cross product.
inline IntervalVector<3> cross3(const IntervalVector<3> &a, const IntervalVector<3> &b)
{
    IntervalVector<3> out;
    out[0] = a[1] * b[2] - a[2] * b[1];
    out[1] = a[2] * b[0] - a[0] * b[2];
    out[2] = a[0] * b[1] - a[1] * b[0];
    return out;
}

inline bool contains(std::span<const Interval> box, std::span<const double> x, double slack)
{
    if (box.size() != x.size()) {
        throw DimensionMismatch("contains: box has " + std::to_string(box.size()) + " components, point has "
                                + std::to_string(x.size()));
    }
    for (std::size_t i = 0; i < box.size(); ++i) {
        if (!box[i].contains(x[i], slack)) return false;
    }
    return true;
}

template <int N>
bool contains(const IntervalVector<N> &box, const Vec<N> &x, double slack = 0.0)
{
    return contains(box.components(), std::span<const double>(x.data(), static_cast<std::size_t>(N)), slack);
}

// Largest amount by which x lies outside box (0 when inside).
template <int N>
double escape_margin(const IntervalVector<N> &box, const Vec<N> &x)
{
    double margin = 0.0;
    for (int i = 0; i < N; ++i) {
        margin = std::max({margin, box[i].lo() - x[i], x[i] - box[i].hi()});
    }
    return margin;
}

template <int N>
std::pair<Vec<N>, Vec<N>> midpoint_width(const IntervalVector<N> &box)
{
    return {box.midpoint(), box.width()};
}

} // namespace lie_reach
