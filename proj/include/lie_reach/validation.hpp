#pragma once

// Monte Carlo containment oracle for reach tubes.
//
// Sample trajectories are integrated directly on the group with a fine-step
// RKMK4 scheme that uses the closed-form dexp^{-1} (canonical coordinates are
// reset every step). None of the truncated series or interval code used by
// the reach engine is involved.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "interval.hpp"
#include "lie_group.hpp"
#include "reach.hpp"

namespace lie_reach {

// Exact left-trivialized dexp^{-1}.
template <GroupModel G>
Vec<G::dim> dexpinv_exact(const Vec<G::dim> &theta, const Vec<G::dim> &a)
{
    if constexpr (G::abelian) {
        return a;
    } else {
        static_assert(std::same_as<G, So3>, "closed-form dexp^{-1} is only available for SO(3)");
        // I + ad/2 + (1 - (t/2) cot(t/2)) / t^2 ad^2, ad = theta x .
        const double t2 = theta.squaredNorm();
        double coeff = 0.0;
        if (t2 < 1e-6) {
            coeff = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0;
        } else {
            const double t = std::sqrt(t2);
            coeff = (1.0 - 0.5 * t / std::tan(0.5 * t)) / t2;
        }
        const Vec<3> ad1 = theta.cross(a);
        return a + 0.5 * ad1 + coeff * theta.cross(ad1);
    }
}

// Advances x from t by `substeps` RKMK4 steps of size h_ref. u(t) returns the
// control input at time t.
template <SystemModel S, class Signal>
typename S::Group::Element reference_integrate(const S &system, typename S::Group::Element x, Signal &&u, double t,
                                               double h_ref, int substeps)
{
    using G = typename S::Group;
    constexpr int n = G::dim;
    for (int k = 0; k < substeps; ++k) {
        const double tk = t + k * h_ref;
        const Vec<n> k1 = system.dynamics(x, u(tk));
        const Vec<n> o2 = 0.5 * h_ref * k1;
        const Vec<n> k2 = dexpinv_exact<G>(o2, system.dynamics(G::compose(x, G::exp(o2)), u(tk + 0.5 * h_ref)));
        const Vec<n> o3 = 0.5 * h_ref * k2;
        const Vec<n> k3 = dexpinv_exact<G>(o3, system.dynamics(G::compose(x, G::exp(o3)), u(tk + 0.5 * h_ref)));
        const Vec<n> o4 = h_ref * k3;
        const Vec<n> k4 = dexpinv_exact<G>(o4, system.dynamics(G::compose(x, G::exp(o4)), u(tk + h_ref)));
        x = G::compose(x, G::exp((h_ref / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)));
    }
    return x;
}

// States at t = 0, h, ..., steps * h, each interval resolved by `substeps`
// reference steps.
template <SystemModel S, class Signal>
std::vector<typename S::Group::Element> reference_trajectory(const S &system, const typename S::Group::Element &x0,
                                                             Signal &&u, double h, int steps, int substeps)
{
    std::vector<typename S::Group::Element> out;
    out.reserve(static_cast<std::size_t>(steps) + 1);
    out.push_back(x0);
    for (int i = 0; i < steps; ++i) {
        out.push_back(reference_integrate(system, out.back(), u, i * h, h / substeps, substeps));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

struct Meshgrid {
    int k = 7;
};

struct UniformSamples {
    int count = 1;
    std::uint64_t seed = 0;
};

using SampleMode = std::variant<Meshgrid, UniformSamples>;

// Independent generator per (seed, stream id).
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t id)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32)};
    return std::mt19937_64(seq);
}

template <int N>
Vec<N> uniform_in_box(const IntervalVector<N> &box, std::mt19937_64 &rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vec<N> v;
    for (int i = 0; i < N; ++i) v[i] = box[i].lo() + unit(rng) * box[i].width();
    return v;
}

// Grid of k^N points over the box, corners included (k >= 2), or `count`
// uniform points where point j uses stream (seed, j).
template <int N>
std::vector<Vec<N>> sample_coordinates(const IntervalVector<N> &box, const SampleMode &mode)
{
    std::vector<Vec<N>> out;
    if (const auto *grid = std::get_if<Meshgrid>(&mode)) {
        if (grid->k < 2) throw std::invalid_argument("meshgrid needs k >= 2");
        std::size_t total = 1;
        for (int i = 0; i < N; ++i) total *= static_cast<std::size_t>(grid->k);
        out.reserve(total);
        for (std::size_t idx = 0; idx < total; ++idx) {
            std::size_t rem = idx;
            Vec<N> v;
            for (int i = 0; i < N; ++i) {
                const auto j = static_cast<int>(rem % static_cast<std::size_t>(grid->k));
                rem /= static_cast<std::size_t>(grid->k);
                // Endpoints are hit exactly.
                v[i] = j == grid->k - 1 ? box[i].hi()
                                        : box[i].lo() + box[i].width() * static_cast<double>(j) / (grid->k - 1);
            }
            out.push_back(v);
        }
    } else {
        const auto &uni = std::get<UniformSamples>(mode);
        if (uni.count < 1) throw std::invalid_argument("uniform sampling needs count >= 1");
        out.reserve(static_cast<std::size_t>(uni.count));
        for (int j = 0; j < uni.count; ++j) {
            auto rng = make_stream(uni.seed, static_cast<std::uint64_t>(j));
            out.push_back(uniform_in_box(box, rng));
        }
    }
    return out;
}

template <GroupModel G>
std::vector<typename G::Element> sample_initial(const ExpTangentInterval<G> &set, const SampleMode &mode)
{
    std::vector<typename G::Element> out;
    for (const auto &v : sample_coordinates(set.box, mode)) out.push_back(G::compose(set.center, G::exp(v)));
    return out;
}

// ---------------------------------------------------------------------------
// Containment
// ---------------------------------------------------------------------------

struct Containment {
    bool contained = false;
    double margin = 0.0; // largest componentwise escape, +inf when log failed
    std::string diagnostic;
};

// x is in center * exp(box) iff vee(log(center^-1 x)) is in box.
template <GroupModel G>
Containment check_membership(const ExpTangentInterval<G> &set, const typename G::Element &x, double slack)
{
    try {
        const Vec<G::dim> v = G::log(G::compose(G::inverse(set.center), x));
        const double margin = escape_margin(set.box, v);
        return {margin <= slack, margin, {}};
    } catch (const AngleAtCut &e) {
        return {false, std::numeric_limits<double>::infinity(), e.what()};
    }
}

// One result per checkpoint; trajectory[i] is the state at tube entry i.
template <GroupModel G>
std::vector<Containment> containment_check(const ReachTube<G> &tube,
                                           const std::vector<typename G::Element> &trajectory,
                                           const std::vector<int> &checkpoints, double slack)
{
    std::vector<Containment> out;
    out.reserve(checkpoints.size());
    for (const int idx : checkpoints) {
        if (idx < 0 || static_cast<std::size_t>(idx) >= tube.entries.size()
            || static_cast<std::size_t>(idx) >= trajectory.size()) {
            throw std::out_of_range("containment_check: checkpoint " + std::to_string(idx) + " is off the tube grid");
        }
        out.push_back(check_membership(tube.entries[static_cast<std::size_t>(idx)].set,
                                       trajectory[static_cast<std::size_t>(idx)], slack));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo report
// ---------------------------------------------------------------------------

struct ValidationOptions {
    int uniform_samples = 500;
    int meshgrid_k = 0;     // 0 disables the meshgrid samples
    int checkpoints = 10;   // reported checkpoints; 0 reports every entry
    std::uint64_t seed = 0;
    double slack = 1e-6;
    int substeps = 10;      // reference steps per tube step
};

struct Violation {
    int n = 0;
    double t = 0.0;
    int sample = 0;
    double margin = 0.0;
    std::string diagnostic;
};

struct ValidationReport {
    int samples = 0;
    std::uint64_t seed = 0;
    double slack = 0.0;
    int entries_checked = 0;
    bool tube_truncated = false;
    std::vector<int> checkpoint_indices;
    std::vector<double> checkpoint_times;
    std::vector<double> containment_fraction;
    // Fraction of samples contained at every tube entry, not just checkpoints.
    double overall_fraction = 1.0;
    double max_margin = 0.0;
    std::optional<Violation> first_violation;

    [[nodiscard]] bool passed() const { return !first_violation.has_value(); }
};

inline std::vector<int> checkpoint_indices(int entries, int requested)
{
    std::vector<int> out;
    if (entries <= 0) return out;
    const int last = entries - 1;
    if (requested <= 0 || requested >= last) {
        for (int i = (last == 0 ? 0 : 1); i <= last; ++i) out.push_back(i);
        return out;
    }
    for (int k = 1; k <= requested; ++k) {
        const int idx = static_cast<int>(std::lround(static_cast<double>(k) * last / requested));
        if (out.empty() || out.back() != idx) out.push_back(idx);
    }
    return out;
}

// Samples initial states from the first tube entry (meshgrid first, then
// uniform), draws one disturbance signal per sample and checks membership at
// every tube entry. Inputs are held constant over each tube step: even sample
// ids redraw uniformly inside the bounds every step, odd ids hold one random
// corner of the bounds for the whole run.
template <SystemModel S>
ValidationReport mc_validate(const S &system, const ReachTube<typename S::Group> &tube, double h,
                             const ValidationOptions &opts)
{
    using G = typename S::Group;
    constexpr int m = S::control_dim;
    if (tube.entries.empty()) throw std::invalid_argument("mc_validate: empty tube");
    if (opts.substeps < 1) throw std::invalid_argument("mc_validate: substeps must be >= 1");

    const auto &init = tube.entries.front().set;
    std::vector<Vec<G::dim>> coords;
    if (opts.meshgrid_k > 0) coords = sample_coordinates(init.box, Meshgrid{opts.meshgrid_k});
    if (opts.uniform_samples > 0) {
        auto uni = sample_coordinates(init.box, UniformSamples{opts.uniform_samples, opts.seed});
        coords.insert(coords.end(), uni.begin(), uni.end());
    }

    const int entries = static_cast<int>(tube.entries.size());
    ValidationReport report;
    report.samples = static_cast<int>(coords.size());
    report.seed = opts.seed;
    report.slack = opts.slack;
    report.entries_checked = entries;
    report.tube_truncated = tube.truncated();
    report.checkpoint_indices = checkpoint_indices(entries, opts.checkpoints);
    std::vector<int> contained_at(report.checkpoint_indices.size(), 0);
    int contained_everywhere = 0;

    for (int s = 0; s < report.samples; ++s) {
        // Stream 2^32 + s keeps disturbance draws apart from initial-state draws.
        auto rng = make_stream(opts.seed, (std::uint64_t{1} << 32) + static_cast<std::uint64_t>(s));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        Vec<m> held;
        for (int i = 0; i < m; ++i) held[i] = unit(rng) < 0.5 ? 0.0 : 1.0;

        typename G::Element x = G::compose(init.center, G::exp(coords[static_cast<std::size_t>(s)]));
        bool ok_everywhere = true;
        std::size_t next_cp = 0;
        for (int n = 0; n < entries; ++n) {
            const auto res = check_membership(tube.entries[static_cast<std::size_t>(n)].set, x, opts.slack);
            report.max_margin = std::max(report.max_margin, res.margin);
            if (!res.contained) {
                ok_everywhere = false;
                const auto &fv = report.first_violation;
                if (!fv || n < fv->n) {
                    report.first_violation = Violation{n, n * h, s, res.margin, res.diagnostic};
                }
            }
            if (next_cp < report.checkpoint_indices.size() && report.checkpoint_indices[next_cp] == n) {
                if (res.contained) ++contained_at[next_cp];
                ++next_cp;
            }
            if (n + 1 == entries) break;

            Vec<m> lambda;
            if (s % 2 == 0) {
                for (int i = 0; i < m; ++i) lambda[i] = unit(rng);
            } else {
                lambda = held;
            }
            const auto u = [&](double t) -> Vec<m> {
                const auto b = system.control_bounds(t);
                return b.lower() + lambda.cwiseProduct(b.upper() - b.lower());
            };
            x = reference_integrate(system, x, u, n * h, h / opts.substeps, opts.substeps);
        }
        if (ok_everywhere) ++contained_everywhere;
    }

    for (std::size_t i = 0; i < report.checkpoint_indices.size(); ++i) {
        report.checkpoint_times.push_back(report.checkpoint_indices[i] * h);
        report.containment_fraction.push_back(
            report.samples == 0 ? 1.0 : static_cast<double>(contained_at[i]) / report.samples);
    }
    report.overall_fraction =
        report.samples == 0 ? 1.0 : static_cast<double>(contained_everywhere) / report.samples;
    return report;
}

} // namespace lie_reach
