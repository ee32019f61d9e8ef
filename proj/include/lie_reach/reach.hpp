#pragma once

// Runge-Kutta-Munthe-Kaas reachability in the Lie algebra.
//
// Each step integrates the bounds of a tangent interval around a fixed
// group center, either as two trajectories of a monotone lifted system or as
// one trajectory of the 2n-dimensional mixed-monotone embedding system, and
// then optionally moves the center to the box midpoint with the BCH
// inclusion.

#include <cmath>
#include <concepts>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "algebra_maps.hpp"
#include "errors.hpp"
#include "interval.hpp"
#include "lie_group.hpp"

namespace lie_reach {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct ButcherTableau {
    std::string name;
    std::vector<std::vector<double>> a;
    std::vector<double> b;
    std::vector<double> c;

    [[nodiscard]] int stages() const { return static_cast<int>(b.size()); }

    // Explicit schemes only: a strictly lower triangular, sum(b) = 1, c_1 = 0.
    void validate() const
    {
        const auto nu = b.size();
        if (nu == 0 || a.size() != nu || c.size() != nu) {
            throw std::invalid_argument("butcher tableau '" + name + "': inconsistent stage counts");
        }
        for (std::size_t k = 0; k < nu; ++k) {
            if (a[k].size() != nu) throw std::invalid_argument("butcher tableau '" + name + "': a is not square");
            for (std::size_t l = k; l < nu; ++l) {
                if (a[k][l] != 0.0) {
                    throw std::invalid_argument("butcher tableau '" + name
                                                + "': a must be strictly lower triangular (explicit scheme)");
                }
            }
        }
        if (std::abs(std::accumulate(b.begin(), b.end(), 0.0) - 1.0) > 1e-12) {
            throw std::invalid_argument("butcher tableau '" + name + "': weights b must sum to 1");
        }
        if (c.front() != 0.0) throw std::invalid_argument("butcher tableau '" + name + "': c_1 must be 0");
    }

    static ButcherTableau euler() { return {"euler", {{0.0}}, {1.0}, {0.0}}; }

    static ButcherTableau heun()
    {
        return {"heun", {{0.0, 0.0}, {1.0, 0.0}}, {0.5, 0.5}, {0.0, 1.0}};
    }

    static ButcherTableau rk4()
    {
        return {"rk4",
                {{0.0, 0.0, 0.0, 0.0}, {0.5, 0.0, 0.0, 0.0}, {0.0, 0.5, 0.0, 0.0}, {0.0, 0.0, 1.0, 0.0}},
                {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0},
                {0.0, 0.5, 0.5, 1.0}};
    }

    static ButcherTableau from_name(const std::string &name)
    {
        if (name == "rk4") return rk4();
        if (name == "euler") return euler();
        if (name == "heun") return heun();
        throw std::invalid_argument("unknown butcher tableau '" + name + "'");
    }
};

enum class ReachMode { monotone, embedding };

struct RecenterPolicy {
    enum class Kind { always, never, width };

    Kind kind = Kind::always;
    double threshold = 0.0;

    static RecenterPolicy always() { return {Kind::always, 0.0}; }
    static RecenterPolicy never() { return {Kind::never, 0.0}; }
    static RecenterPolicy width(double w)
    {
        if (!(w > 0.0)) throw std::invalid_argument("width recentering threshold must be positive");
        return {Kind::width, w};
    }

    template <int N>
    [[nodiscard]] bool triggers(const IntervalVector<N> &box) const
    {
        switch (kind) {
        case Kind::always:
            return true;
        case Kind::never:
            return false;
        case Kind::width:
            return box.max_width() > threshold;
        }
        return false;
    }
};

struct ReachConfig {
    double h = 0.01;
    int steps = 1;
    ButcherTableau tableau = ButcherTableau::rk4();
    ReachMode mode = ReachMode::embedding;
    RecenterPolicy recenter = RecenterPolicy::always();
    TruncationOrder order = TruncationOrder::third;

    void validate() const
    {
        if (!(h > 0.0)) throw std::invalid_argument("time step h must be positive");
        if (steps < 0) throw std::invalid_argument("step count must be non-negative");
        if (recenter.kind == RecenterPolicy::Kind::width && !(recenter.threshold > 0.0)) {
            throw std::invalid_argument("width recentering threshold must be positive");
        }
        tableau.validate();
    }
};

// ---------------------------------------------------------------------------
// Systems and tubes
// ---------------------------------------------------------------------------

// A control system x' = x A(x, u) on a matrix Lie group, together with an
// inclusion function for its lifted Lie algebra field around a center.
template <class S>
concept SystemModel =
    GroupModel<typename S::Group>
    && requires(const S &s, const typename S::Group::Element &x, const Vec<S::control_dim> &u,
                const IntervalVector<S::Group::dim> &box, const IntervalVector<S::control_dim> &ubox, double t,
                TruncationOrder order) {
           { S::control_dim } -> std::convertible_to<int>;
           { s.dynamics(x, u) } -> std::same_as<Vec<S::Group::dim>>;
           { s.lifted_inclusion(x, box, ubox, order) } -> std::same_as<IntervalVector<S::Group::dim>>;
           { s.monotone_check(x, box) } -> std::same_as<std::optional<bool>>;
           { s.control_bounds(t) } -> std::same_as<IntervalVector<S::control_dim>>;
       };

struct StepFlags {
    bool recentered = false;
    // Empty when the system offers no monotonicity test.
    std::optional<bool> monotone_check;
};

template <GroupModel G>
struct TubeEntry {
    int n = 0;
    double t = 0.0;
    ExpTangentInterval<G> set;
    StepFlags flags;
};

struct StepFailure {
    int step = 0;
    std::string kind;
    std::string message;
};

template <GroupModel G>
struct ReachTube {
    std::vector<TubeEntry<G>> entries;
    std::optional<StepFailure> failure;

    [[nodiscard]] bool truncated() const { return failure.has_value(); }
};

template <GroupModel G>
struct StepResult {
    typename G::Element center;
    IntervalVector<G::dim> box;
    StepFlags flags;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Mixed-monotone embedding field. Component i of the lower output is the
// lower end of F on the box whose i-th coordinate is pinned to lower_i; the
// upper output pins it to upper_i.
template <int N, int M, class Inclusion>
std::pair<Vec<N>, Vec<N>> embedding_field(Inclusion &&inclusion, const Vec<N> &lower, const Vec<N> &upper,
                                          const Vec<M> &u_lower, const Vec<M> &u_upper)
{
    if (!(lower.array() <= upper.array()).all()) {
        throw OrderingViolation("embedding_field: state lower bound exceeds upper bound");
    }
    if (!(u_lower.array() <= u_upper.array()).all()) {
        throw OrderingViolation("embedding_field: input lower bound exceeds upper bound");
    }
    const IntervalVector<M> ubox(u_lower, u_upper);
    Vec<N> out_lower;
    Vec<N> out_upper;
    for (int i = 0; i < N; ++i) {
        Vec<N> pinned = upper;
        pinned[i] = lower[i];
        out_lower[i] = inclusion(IntervalVector<N>(lower, pinned), ubox)[i].lo();

        pinned = lower;
        pinned[i] = upper[i];
        out_upper[i] = inclusion(IntervalVector<N>(pinned, upper), ubox)[i].hi();
    }
    return {out_lower, out_upper};
}

// Moves the center to center * exp(mid(box)) and re-expresses the box there.
template <GroupModel G>
std::pair<typename G::Element, IntervalVector<G::dim>> recenter(const typename G::Element &center,
                                                                const IntervalVector<G::dim> &box,
                                                                TruncationOrder order)
{
    const Vec<G::dim> mid = box.midpoint();
    return {G::compose(center, G::exp(mid)), interval_bch<G>(Vec<G::dim>(-mid), box, order)};
}

namespace detail {

template <int N>
Vec<N> stage_point(const Vec<N> &base, const std::vector<Vec<N>> &increments, const std::vector<double> &row, int k)
{
    Vec<N> out = base;
    for (int l = 0; l < k; ++l) out += row[static_cast<std::size_t>(l)] * increments[static_cast<std::size_t>(l)];
    return out;
}

template <int N>
Vec<N> weighted_sum(const Vec<N> &base, const std::vector<Vec<N>> &increments, const std::vector<double> &weights)
{
    Vec<N> out = base;
    for (std::size_t l = 0; l < weights.size(); ++l) out += weights[l] * increments[l];
    return out;
}

} // namespace detail

template <SystemModel S>
StepResult<typename S::Group> rkmk_step(const S &system, const ReachConfig &config,
                                        const typename S::Group::Element &center,
                                        const IntervalVector<S::Group::dim> &box, double t)
{
    using G = typename S::Group;
    constexpr int n = G::dim;
    const auto &tab = config.tableau;
    const int nu = tab.stages();
    const double h = config.h;

    if (!G::inside_injectivity(box, kInjectivityMargin)) {
        throw InjectivityExceeded("rkmk_step: input box is outside the injectivity region");
    }

    StepFlags flags;
    flags.monotone_check = system.monotone_check(center, box);

    std::vector<Vec<n>> f_lower(static_cast<std::size_t>(nu), Vec<n>::Zero());
    std::vector<Vec<n>> f_upper(static_cast<std::size_t>(nu), Vec<n>::Zero());
    const Vec<n> lo0 = box.lower();
    const Vec<n> hi0 = box.upper();

    if (config.mode == ReachMode::monotone) {
        if (!flags.monotone_check.value_or(false)) {
            throw NonMonotoneStep("rkmk_step: lifted system is not certified monotone at t = " + std::to_string(t));
        }
        for (int k = 0; k < nu; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            const auto ubox = system.control_bounds(t + tab.c[ku] * h);
            const Vec<n> om_lo = detail::stage_point(lo0, f_lower, tab.a[ku], k);
            const Vec<n> om_hi = detail::stage_point(hi0, f_upper, tab.a[ku], k);
            const Vec<n> a_lo = h * system.dynamics(G::compose(center, G::exp(om_lo)), ubox.lower());
            const Vec<n> a_hi = h * system.dynamics(G::compose(center, G::exp(om_hi)), ubox.upper());
            f_lower[ku] = dexpinv<G>(om_lo, a_lo, config.order);
            f_upper[ku] = dexpinv<G>(om_hi, a_hi, config.order);
        }
    } else {
        const auto inclusion = [&](const IntervalVector<n> &b, const IntervalVector<S::control_dim> &u) {
            return system.lifted_inclusion(center, b, u, config.order);
        };
        for (int k = 0; k < nu; ++k) {
            const auto ku = static_cast<std::size_t>(k);
            const auto ubox = system.control_bounds(t + tab.c[ku] * h);
            const Vec<n> om_lo = detail::stage_point(lo0, f_lower, tab.a[ku], k);
            const Vec<n> om_hi = detail::stage_point(hi0, f_upper, tab.a[ku], k);
            const auto [e_lo, e_hi] = embedding_field<n, S::control_dim>(inclusion, om_lo, om_hi, ubox.lower(),
                                                                         ubox.upper());
            f_lower[ku] = h * e_lo;
            f_upper[ku] = h * e_hi;
        }
    }

    const IntervalVector<n> updated(detail::weighted_sum(lo0, f_lower, tab.b),
                                    detail::weighted_sum(hi0, f_upper, tab.b));
    if (!G::inside_injectivity(updated, kInjectivityMargin)) {
        throw InjectivityExceeded("rkmk_step: updated box left the injectivity region at t = "
                                  + std::to_string(t + h));
    }
    if (config.mode == ReachMode::monotone) {
        const auto after = system.monotone_check(center, updated);
        if (!after.value_or(false)) {
            throw NonMonotoneStep("rkmk_step: monotonicity lost during step ending at t = " + std::to_string(t + h));
        }
    }

    if (!config.recenter.triggers(updated)) return {center, updated, flags};

    auto [new_center, new_box] = recenter<G>(center, updated, config.order);
    if (!G::inside_injectivity(new_box, kInjectivityMargin)) {
        throw InjectivityExceeded("rkmk_step: recentered box left the injectivity region at t = "
                                  + std::to_string(t + h));
    }
    flags.recentered = true;
    return {new_center, new_box, flags};
}

namespace detail {

inline std::string failure_kind(const reach_error &e)
{
    if (dynamic_cast<const InjectivityExceeded *>(&e)) return "InjectivityExceeded";
    if (dynamic_cast<const NonMonotoneStep *>(&e)) return "NonMonotoneStep";
    if (dynamic_cast<const BranchViolation *>(&e)) return "BranchViolation";
    if (dynamic_cast<const OrderingViolation *>(&e)) return "OrderingViolation";
    if (dynamic_cast<const AngleAtCut *>(&e)) return "AngleAtCut";
    return "ReachError";
}

} // namespace detail

// Runs config.steps steps from init. A failing step stops the run; the
// entries computed so far are kept and the failure is recorded on the tube.
template <SystemModel S>
ReachTube<typename S::Group> rkmk_reach(const S &system, const ReachConfig &config,
                                        const ExpTangentInterval<typename S::Group> &init)
{
    using G = typename S::Group;
    config.validate();
    if (!G::inside_injectivity(init.box, kInjectivityMargin)) {
        throw InjectivityExceeded("rkmk_reach: initial box is outside the injectivity region");
    }

    ReachTube<G> tube;
    tube.entries.reserve(static_cast<std::size_t>(config.steps) + 1);
    StepFlags first;
    first.monotone_check = system.monotone_check(init.center, init.box);
    tube.entries.push_back({0, 0.0, init, first});

    for (int n = 0; n < config.steps; ++n) {
        const auto &cur = tube.entries.back();
        try {
            auto step = rkmk_step(system, config, cur.set.center, cur.set.box, n * config.h);
            tube.entries.push_back(
                {n + 1, (n + 1) * config.h, ExpTangentInterval<G>{step.center, step.box}, step.flags});
        } catch (const reach_error &e) {
            tube.failure = StepFailure{n, detail::failure_kind(e), e.what()};
            break;
        }
    }
    return tube;
}

} // namespace lie_reach
