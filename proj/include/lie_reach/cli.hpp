#pragma once

// Command implementations behind the `reach` executable. Each returns the
// process exit code.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "io.hpp"
#include "reach.hpp"
#include "systems.hpp"
#include "validation.hpp"

namespace lie_reach::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kEngineAbort = 2,
    kContainmentViolation = 3,
};

// REACH_LOG = error | info | debug; anything else (or unset) means info.
inline spdlog::level::level_enum log_level_from_env()
{
    const char *v = std::getenv("REACH_LOG");
    if (v == nullptr) return spdlog::level::info;
    const std::string s(v);
    if (s == "error") return spdlog::level::err;
    if (s == "debug") return spdlog::level::debug;
    return spdlog::level::info;
}

inline std::string policy_name(const RecenterPolicy &p)
{
    switch (p.kind) {
    case RecenterPolicy::Kind::always:
        return "always";
    case RecenterPolicy::Kind::never:
        return "never";
    case RecenterPolicy::Kind::width:
        return "width(" + std::to_string(p.threshold) + ")";
    }
    return "?";
}

inline int cmd_run(const std::string &config_path, const std::string &out_path)
{
    io::ExperimentConfig cfg;
    try {
        cfg = io::load_config(config_path);
    } catch (const io::config_error &e) {
        spdlog::error("{}", e.what());
        return kUsage;
    }
    return io::with_experiment(cfg, [&](const auto &cs) -> int {
        spdlog::info("run: system={} h={} steps={} tableau={} recenter={}", cfg.system, cs.config.h,
                     cs.config.steps, cs.config.tableau.name, policy_name(cfg.recenter));
        const auto tube = rkmk_reach(cs.system, cs.config, cs.initial);
        std::ofstream out(out_path);
        if (!out) {
            spdlog::error("cannot open output file '{}'", out_path);
            return kUsage;
        }
        io::write_tube(out, tube);
        out.flush();
        for (const auto &e : tube.entries) {
            spdlog::debug("n={} t={} width={} recentered={}", e.n, e.t, e.set.box.max_width(), e.flags.recentered);
        }
        if (tube.failure) {
            spdlog::error("engine aborted at step {} ({}): {}", tube.failure->step, tube.failure->kind,
                          tube.failure->message);
            spdlog::info("partial tube with {} records written to {}", tube.entries.size(), out_path);
            return kEngineAbort;
        }
        spdlog::info("tube with {} records written to {}", tube.entries.size(), out_path);
        return kOk;
    });
}

inline int cmd_validate(const std::string &tube_path, const std::string &config_path,
                        const ValidationOptions &opts, const std::string &out_path)
{
    io::ExperimentConfig cfg;
    try {
        cfg = io::load_config(config_path);
    } catch (const io::config_error &e) {
        spdlog::error("{}", e.what());
        return kUsage;
    }
    return io::with_experiment(cfg, [&](const auto &cs) -> int {
        using G = typename std::decay_t<decltype(cs.system)>::Group;
        std::ifstream in(tube_path);
        if (!in) {
            spdlog::error("cannot open tube file '{}'", tube_path);
            return kUsage;
        }
        ReachTube<G> tube;
        try {
            tube = io::read_tube<G>(in);
        } catch (const std::exception &e) {
            spdlog::error("{}", e.what());
            return kUsage;
        }
        if (tube.entries.empty()) {
            spdlog::error("tube '{}' has no step records", tube_path);
            return kUsage;
        }
        if (tube.truncated()) {
            spdlog::info("tube is truncated at step {}; validating the {} recorded entries", tube.failure->step,
                         tube.entries.size());
        }
        const auto report = mc_validate(cs.system, tube, cs.config.h, opts);
        std::ofstream out(out_path);
        if (!out) {
            spdlog::error("cannot open output file '{}'", out_path);
            return kUsage;
        }
        out << io::report_to_json(report).dump(2) << '\n';
        if (report.first_violation) {
            const auto &v = *report.first_violation;
            spdlog::error("containment violated at n={} t={} by sample {} (margin {})", v.n, v.t, v.sample,
                          v.margin);
            return kContainmentViolation;
        }
        spdlog::info("all {} samples contained at {} entries", report.samples, report.entries_checked);
        return kOk;
    });
}

struct BenchSummary {
    int repeats = 0;
    double mean = 0.0;
    double stddev = 0.0;
    double min = 0.0;
    double max = 0.0;
    bool truncated = false;
};

// Wall-clock seconds of rkmk_reach alone, repeated sequentially.
inline BenchSummary bench_experiment(const io::ExperimentConfig &cfg, int repeats)
{
    if (repeats < 3) throw std::invalid_argument("bench needs at least 3 repeats");
    return io::with_experiment(cfg, [&](const auto &cs) {
        std::vector<double> secs;
        secs.reserve(static_cast<std::size_t>(repeats));
        bool truncated = false;
        for (int r = 0; r < repeats; ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto tube = rkmk_reach(cs.system, cs.config, cs.initial);
            const auto t1 = std::chrono::steady_clock::now();
            truncated = truncated || tube.truncated();
            secs.push_back(std::chrono::duration<double>(t1 - t0).count());
        }
        BenchSummary s;
        s.repeats = repeats;
        s.mean = std::accumulate(secs.begin(), secs.end(), 0.0) / repeats;
        double ss = 0.0;
        for (const double x : secs) ss += (x - s.mean) * (x - s.mean);
        s.stddev = std::sqrt(ss / (repeats - 1));
        s.min = *std::min_element(secs.begin(), secs.end());
        s.max = *std::max_element(secs.begin(), secs.end());
        s.truncated = truncated;
        return s;
    });
}

// Published wall-clock means for the two case studies, in seconds.
inline double published_runtime(const std::string &system)
{
    return system == "torus" ? 0.039 : 0.438;
}

inline int cmd_bench(const std::string &config_path, int repeats, std::ostream &out)
{
    io::ExperimentConfig cfg;
    try {
        cfg = io::load_config(config_path);
    } catch (const io::config_error &e) {
        spdlog::error("{}", e.what());
        return kUsage;
    }
    if (repeats < 3) {
        spdlog::error("--repeats must be at least 3");
        return kUsage;
    }
    const auto s = bench_experiment(cfg, repeats);
    const double ref = published_runtime(cfg.system);
    out << "system " << cfg.system << "  repeats " << s.repeats << '\n'
        << "mean " << s.mean << " s  std " << s.stddev << " s  min " << s.min << " s  max " << s.max << " s\n"
        << "published mean " << ref << " s  ratio " << s.mean / ref << '\n';
    if (s.truncated) out << "note: the run aborts before the horizon; timings cover the partial tube\n";
    return kOk;
}

} // namespace lie_reach::cli
