#pragma once

// Concrete control systems: consensus of two oscillators on the torus and
// kinematic attitude control on SO(3).

#include <cmath>
#include <optional>
#include <string>

#include "algebra_maps.hpp"
#include "interval.hpp"
#include "lie_group.hpp"
#include "reach.hpp"

namespace lie_reach {

// x1' = x1 (w1^ + log(x2 x1^-1)),  x2' = x2 (w2^ + log(x1 x2^-1)).
//
// Around a center c the lifted field is
//   theta1' = w1 + r,  theta2' = w2 - r,   r = log(c2 c1^-1) + theta2 - theta1,
// which agrees with the principal log of the product as long as r stays in
// (-pi, pi). Inside that range the field is affine and monotone, so natural
// interval evaluation is exact endpoint-wise.
struct TorusConsensus {
    using Group = Torus2;
    static constexpr int control_dim = 0;

    double omega1 = 5.0;
    double omega2 = 2.0;

    static double relative_center_angle(const Torus2::Element &center)
    {
        return so2_log(center[1] * center[0].transpose());
    }

    [[nodiscard]] Vec<2> dynamics(const Torus2::Element &x, const Vec<0> & /*u*/) const
    {
        return {omega1 + so2_log(x[1] * x[0].transpose()), omega2 + so2_log(x[0] * x[1].transpose())};
    }

    [[nodiscard]] Vec<2> lifted_field(const Torus2::Element &center, const Vec<2> &theta) const
    {
        const double r = relative_center_angle(center) + theta[1] - theta[0];
        if (!(r > -kPi && r < kPi)) {
            throw BranchViolation("torus: relative angle " + std::to_string(r) + " left (-pi, pi)");
        }
        return {omega1 + r, omega2 - r};
    }

    [[nodiscard]] IntervalVector<2> lifted_inclusion(const Torus2::Element &center, const IntervalVector<2> &box,
                                                     const IntervalVector<0> & /*ubox*/,
                                                     TruncationOrder /*order*/) const
    {
        const Interval r = relative_range(center, box);
        if (!(r.lo() > -kPi && r.hi() < kPi)) {
            throw BranchViolation("torus: relative angle range [" + std::to_string(r.lo()) + ", "
                                  + std::to_string(r.hi()) + "] left (-pi, pi)");
        }
        IntervalVector<2> out;
        out[0] = Interval(omega1) + r;
        out[1] = Interval(omega2) - r;
        return out;
    }

    // True iff every corner of the box keeps the relative angle in (-pi, pi).
    [[nodiscard]] std::optional<bool> monotone_check(const Torus2::Element &center,
                                                     const IntervalVector<2> &box) const
    {
        const Interval r = relative_range(center, box);
        return r.lo() > -kPi && r.hi() < kPi;
    }

    [[nodiscard]] IntervalVector<0> control_bounds(double /*t*/) const { return {}; }

private:
    static Interval relative_range(const Torus2::Element &center, const IntervalVector<2> &box)
    {
        return Interval(relative_center_angle(center)) + box[1] - box[0];
    }
};

// Nominal angular-velocity input plus a bounded disturbance box.
struct So3Control {
    enum class Kind { case_study, constant };

    Kind kind = Kind::case_study;
    Vec<3> constant = Vec<3>::Zero();
    double disturbance = 0.01;

    // [(5 - t)/5, 1 - (t/5)^2, sin(pi t / 2)] for the case study.
    [[nodiscard]] Vec<3> nominal(double t) const
    {
        if (kind == Kind::constant) return constant;
        return {(5.0 - t) / 5.0, 1.0 - (t / 5.0) * (t / 5.0), std::sin(kPi * t / 2.0)};
    }
};

// R' = R u^, so the lifted field is dexp^{-1}_theta(u).
struct So3Attitude {
    using Group = So3;
    static constexpr int control_dim = 3;

    So3Control control;

    [[nodiscard]] Vec<3> dynamics(const So3::Element & /*x*/, const Vec<3> &u) const { return u; }

    [[nodiscard]] IntervalVector<3> lifted_inclusion(const So3::Element & /*center*/, const IntervalVector<3> &box,
                                                     const IntervalVector<3> &ubox, TruncationOrder order) const
    {
        return interval_dexpinv<So3>(box, ubox, order);
    }

    // No monotonicity certificate is available; use the embedding mode.
    [[nodiscard]] std::optional<bool> monotone_check(const So3::Element &, const IntervalVector<3> &) const
    {
        return std::nullopt;
    }

    [[nodiscard]] IntervalVector<3> control_bounds(double t) const
    {
        const Vec<3> u = control.nominal(t);
        const Vec<3> d = Vec<3>::Constant(control.disturbance);
        return {u - d, u + d};
    }
};

static_assert(SystemModel<TorusConsensus>);
static_assert(SystemModel<So3Attitude>);

template <SystemModel S>
struct CaseStudy {
    S system;
    ReachConfig config;
    ExpTangentInterval<typename S::Group> initial;
};

// Two oscillators with w = (5, 2), centers at angles pi/2 and pi with
// half-widths 0.6 and 0.1, horizon 3 s.
inline CaseStudy<TorusConsensus> torus_case_study()
{
    CaseStudy<TorusConsensus> cs;
    cs.system = TorusConsensus{5.0, 2.0};
    cs.config.h = 0.01;
    cs.config.steps = 300;
    cs.config.tableau = ButcherTableau::rk4();
    cs.config.mode = ReachMode::monotone;
    cs.config.recenter = RecenterPolicy::always();
    cs.config.order = TruncationOrder::third;
    cs.initial.center = Torus2::exp(Vec<2>{kPi / 2.0, kPi});
    cs.initial.box = IntervalVector<2>(Vec<2>{-0.6, -0.1}, Vec<2>{0.6, 0.1});
    return cs;
}

// Satellite attitude under the time-varying input with disturbance
// [-0.01, 0.01]^3, initial set exp([-0.01, 0.01]^3), horizon 5 s.
inline CaseStudy<So3Attitude> so3_case_study()
{
    CaseStudy<So3Attitude> cs;
    cs.system.control = So3Control{So3Control::Kind::case_study, Vec<3>::Zero(), 0.01};
    cs.config.h = 0.01;
    cs.config.steps = 500;
    cs.config.tableau = ButcherTableau::rk4();
    cs.config.mode = ReachMode::embedding;
    cs.config.recenter = RecenterPolicy::always();
    cs.config.order = TruncationOrder::third;
    cs.initial.center = So3::identity();
    cs.initial.box = IntervalVector<3>(Vec<3>::Constant(-0.01), Vec<3>::Constant(0.01));
    return cs;
}

} // namespace lie_reach
