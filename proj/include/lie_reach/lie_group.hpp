#pragma once

// Matrix Lie group models: the 2-torus SO(2) x SO(2) and SO(3).
//
// A group model is a stateless type exposing its algebra dimension, the
// closed-form exp/log pair, the group product, the Lie bracket in
// coordinates (for points and for interval boxes) and a conservative test for
// membership of a box in the injectivity region of exp.

#include <array>
#include <cmath>
#include <concepts>
#include <numbers>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

#include "errors.hpp"
#include "interval.hpp"

namespace lie_reach {

inline constexpr double kPi = std::numbers::pi;

// Default distance kept from the boundary of the injectivity region.
inline constexpr double kInjectivityMargin = 1e-6;

template <class G>
concept GroupModel = requires(const typename G::Element &g, const Vec<G::dim> &v,
                              const IntervalVector<G::dim> &box, double margin) {
    { G::dim } -> std::convertible_to<int>;
    { G::abelian } -> std::convertible_to<bool>;
    { G::name } -> std::convertible_to<const char *>;
    { G::identity() } -> std::same_as<typename G::Element>;
    { G::exp(v) } -> std::same_as<typename G::Element>;
    { G::log(g) } -> std::same_as<Vec<G::dim>>;
    { G::compose(g, g) } -> std::same_as<typename G::Element>;
    { G::inverse(g) } -> std::same_as<typename G::Element>;
    { G::bracket(v, v) } -> std::same_as<Vec<G::dim>>;
    { G::bracket(box, box) } -> std::same_as<IntervalVector<G::dim>>;
    { G::inside_injectivity(box, margin) } -> std::same_as<bool>;
    { G::orthogonality_drift(g) } -> std::convertible_to<double>;
};

namespace detail {

inline double max_row_sum(const Eigen::MatrixXd &m)
{
    return m.cwiseAbs().rowwise().sum().maxCoeff();
}

} // namespace detail

// ---------------------------------------------------------------------------
// SO(2) building blocks
// ---------------------------------------------------------------------------

inline Eigen::Matrix2d so2_exp(double angle)
{
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    Eigen::Matrix2d r;
    r << c, -s, s, c;
    return r;
}

// Principal branch, (-pi, pi].
inline double so2_log(const Eigen::Matrix2d &r)
{
    return std::atan2(r(1, 0), r(0, 0));
}

inline Eigen::Matrix2d so2_hat(double w)
{
    Eigen::Matrix2d m;
    m << 0.0, -w, w, 0.0;
    return m;
}

// ---------------------------------------------------------------------------
// Torus SO(2)^2, stored factorwise
// ---------------------------------------------------------------------------

struct Torus2 {
    static constexpr int dim = 2;
    static constexpr bool abelian = true;
    static constexpr const char *name = "torus";

    using Element = std::array<Eigen::Matrix2d, 2>;
    using AlgebraMatrix = Eigen::Matrix4d;

    static Element identity() { return {Eigen::Matrix2d::Identity(), Eigen::Matrix2d::Identity()}; }

    static Element exp(const Vec<2> &v) { return {so2_exp(v[0]), so2_exp(v[1])}; }

    static Vec<2> log(const Element &g) { return {so2_log(g[0]), so2_log(g[1])}; }

    static Element compose(const Element &a, const Element &b) { return {a[0] * b[0], a[1] * b[1]}; }

    static Element inverse(const Element &a) { return {a[0].transpose(), a[1].transpose()}; }

    static Vec<2> bracket(const Vec<2> &, const Vec<2> &) { return Vec<2>::Zero(); }

    static IntervalVector<2> bracket(const IntervalVector<2> &, const IntervalVector<2> &)
    {
        return IntervalVector<2>::point(Vec<2>::Zero());
    }

    // Block-diagonal algebra matrix.
    static AlgebraMatrix hat(const Vec<2> &v)
    {
        AlgebraMatrix m = AlgebraMatrix::Zero();
        m.block<2, 2>(0, 0) = so2_hat(v[0]);
        m.block<2, 2>(2, 2) = so2_hat(v[1]);
        return m;
    }

    static Vec<2> vee(const AlgebraMatrix &m) { return {m(1, 0), m(3, 2)}; }

    // The box must sit strictly inside (-pi, pi) in every coordinate.
    static bool inside_injectivity(const IntervalVector<2> &box, double margin = kInjectivityMargin)
    {
        for (int i = 0; i < 2; ++i) {
            if (!(box[i].lo() > -kPi + margin && box[i].hi() < kPi - margin)) return false;
        }
        return true;
    }

    static double orthogonality_drift(const Element &g)
    {
        double drift = 0.0;
        for (const auto &r : g) {
            drift = std::max(drift, detail::max_row_sum(r.transpose() * r - Eigen::Matrix2d::Identity()));
        }
        return drift;
    }

    static bool positive_determinant(const Element &g) { return g[0].determinant() > 0 && g[1].determinant() > 0; }
};

// ---------------------------------------------------------------------------
// SO(3)
// ---------------------------------------------------------------------------

struct So3 {
    static constexpr int dim = 3;
    static constexpr bool abelian = false;
    static constexpr const char *name = "so3";

    using Element = Eigen::Matrix3d;
    using AlgebraMatrix = Eigen::Matrix3d;

    // Below this rotation angle exp uses the 4th-order series coefficients.
    static constexpr double kSmallAngle = 1e-4;
    // log refuses angles closer than this to pi.
    static constexpr double kCutTolerance = 1e-9;

    static Element identity() { return Element::Identity(); }

    // u1 X + u2 Y + u3 Z with the standard generators, i.e. hat(u) w = u x w.
    static AlgebraMatrix hat(const Vec<3> &u)
    {
        AlgebraMatrix m;
        // clang-format off
        m <<  0.0,  -u[2],  u[1],
              u[2],  0.0,  -u[0],
             -u[1],  u[0],  0.0;
        // clang-format on
        return m;
    }

    static Vec<3> vee(const AlgebraMatrix &m) { return {m(2, 1), m(0, 2), m(1, 0)}; }

    // Rodrigues' formula.
    static Element exp(const Vec<3> &v)
    {
        const double theta2 = v.squaredNorm();
        const double theta = std::sqrt(theta2);
        double a = 0.0;
        double b = 0.0;
        if (theta < kSmallAngle) {
            a = 1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0;
            b = 0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0;
        } else {
            a = std::sin(theta) / theta;
            b = (1.0 - std::cos(theta)) / theta2;
        }
        const AlgebraMatrix k = hat(v);
        return Element::Identity() + a * k + b * (k * k);
    }

    // Principal logarithm, rotation angle in [0, pi).
    static Vec<3> log(const Element &r)
    {
        const double c = 0.5 * (r.trace() - 1.0);
        const Vec<3> axial = 0.5 * Vec<3>{r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1)};
        const double s = axial.norm();
        const double theta = std::atan2(s, c);
        if (kPi - theta < kCutTolerance) {
            throw AngleAtCut("SO(3) log: rotation angle " + std::to_string(theta) + " is at the cut locus");
        }
        if (theta < kSmallAngle) {
            const double t2 = theta * theta;
            return (1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0) * axial;
        }
        if (c > -0.7) {
            return (theta / s) * axial;
        }
        // Near pi the axial part is ill-conditioned; recover the axis from
        // the symmetric part (R + R^T)/2 - cI = (1 - c) a a^T.
        const Eigen::Matrix3d sym = 0.5 * (r + r.transpose()) - c * Eigen::Matrix3d::Identity();
        int j = 0;
        sym.diagonal().maxCoeff(&j);
        Vec<3> axis = sym.col(j) / std::sqrt(sym(j, j) * (1.0 - c));
        if (axis.dot(axial) < 0.0) axis = -axis;
        return theta * axis;
    }

    static Element compose(const Element &a, const Element &b) { return a * b; }

    static Element inverse(const Element &a) { return a.transpose(); }

    static Vec<3> bracket(const Vec<3> &u, const Vec<3> &v) { return u.cross(v); }

    static IntervalVector<3> bracket(const IntervalVector<3> &u, const IntervalVector<3> &v) { return cross3(u, v); }

    // Conservative: the corner of largest absolute coordinates must lie in
    // the open ball of radius pi - margin.
    static bool inside_injectivity(const IntervalVector<3> &box, double margin = kInjectivityMargin)
    {
        Vec<3> corner;
        for (int i = 0; i < 3; ++i) corner[i] = std::max(std::abs(box[i].lo()), std::abs(box[i].hi()));
        return corner.norm() < kPi - margin;
    }

    static double orthogonality_drift(const Element &r)
    {
        return detail::max_row_sum(r.transpose() * r - Eigen::Matrix3d::Identity());
    }

    static bool positive_determinant(const Element &r) { return r.determinant() > 0; }
};

static_assert(GroupModel<Torus2>);
static_assert(GroupModel<So3>);

// The set { center * exp(hat(v)) : v in box }.
template <GroupModel G>
struct ExpTangentInterval {
    typename G::Element center = G::identity();
    IntervalVector<G::dim> box;
};

} // namespace lie_reach
