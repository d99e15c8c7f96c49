#pragma once

/**
 * @file sweeps.hpp
 * @brief Single-axis parameter scans: detuning scans, power hysteresis with branch
 *        following, cooling scans, and their CSV output.
 *
 * Every scan point is an independent work item. Points are evaluated by a small thread pool
 * and stored by grid index, so output does not depend on the worker count.
 */

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "optomech/atomic_feedback.hpp"
#include "optomech/cooling.hpp"
#include "optomech/errors.hpp"
#include "optomech/params.hpp"
#include "optomech/stability.hpp"
#include "optomech/steady_state.hpp"

namespace optomech {

inline constexpr std::size_t kDefaultGridPoints = 2001;

// ---------------------------------------------------------------------------------------
// Plumbing

/// Evaluates fn(0..n-1) on `workers` threads; result k always lands in slot k.
template <class T>
std::vector<T> parallel_map(std::size_t n, const std::function<T(std::size_t)>& fn, unsigned workers = 0) {
    std::vector<T> out(n);
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto work = [&] {
        for (std::size_t k = next++; k < n && !failed; k = next++) {
            try {
                out[k] = fn(k);
            } catch (...) {
                if (!failed.exchange(true)) failure = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

/// n evenly spaced points from a to b inclusive.
inline std::vector<double> linspace(double a, double b, std::size_t n) {
    if (n == 0) throw ConfigError("points", "must be >= 1");
    if (!std::isfinite(a) || !std::isfinite(b)) throw ConfigError("range", "must be finite");
    std::vector<double> g(n);
    if (n == 1) {
        g[0] = a;
        return g;
    }
    for (std::size_t k = 0; k < n; ++k) g[k] = a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1);
    g.back() = b;
    return g;
}

namespace detail {

inline void require_ascending(const std::vector<double>& grid, const char* key) {
    if (grid.empty()) throw ConfigError(key, "grid is empty");
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!std::isfinite(grid[k])) throw ConfigError(key, "grid has non-finite entries");
        if (k > 0 && !(grid[k] > grid[k - 1])) throw ConfigError(key, "grid must be strictly ascending");
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------------------
// Branch evaluation and selection

/// Which steady states count as stable when following or selecting a branch.
enum class FollowMode {
    static_outer,  ///< positive slope of the intensity cubic (outer roots of a bistable window)
    dynamic,       ///< full linear stability of the drift matrix
};

inline const char* to_string(FollowMode m) { return m == FollowMode::dynamic ? "dynamic" : "static"; }

struct SweepRow {
    double x = 0.0;  ///< swept coordinate (Delta_A or P_in)
    std::vector<SteadyStateBranch> branches;   ///< ascending in I
    std::vector<StabilityVerdict> verdicts;    ///< parallel to branches
    std::optional<std::size_t> selected;
    bool no_stable_branch = false;
    std::string error;                         ///< solver failure at this point, scan continues
};

/// Every branch at one configuration, each classified.
inline SweepRow evaluate_point(double x, const SystemConfig& cfg, const FeedbackTerm& fb) {
    SweepRow row;
    row.x = x;
    try {
        const DerivedParams d = derive(cfg);
        row.branches = solve_branches(cfg, d, fb);
        for (auto& b : row.branches) row.verdicts.push_back(classify(b, cfg, d));
    } catch (const NumericalError& e) {
        row.branches.clear();
        row.verdicts.clear();
        row.error = e.what();
    }
    return row;
}

inline bool admissible(const SweepRow& row, std::size_t k, FollowMode mode) {
    if (mode == FollowMode::dynamic) return row.branches[k].stable == Stability::stable;
    return row.branches[k].static_stable;
}

/// Index of the admissible branch closest in I to `previous`. Equidistant candidates keep the
/// side of the previous selection: lower stays lower, upper stays upper.
inline std::optional<std::size_t> closest_branch(const SweepRow& row, FollowMode mode, double previous,
                                                 bool was_lowest) {
    std::optional<std::size_t> best;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < row.branches.size(); ++k) {
        if (!admissible(row, k, mode)) continue;
        const double dist = std::abs(row.branches[k].I - previous);
        if (dist < best_dist || (dist == best_dist && !was_lowest)) {
            best = k;
            best_dist = dist;
        }
    }
    return best;
}

/// Lowest (or highest) admissible branch.
inline std::optional<std::size_t> extreme_branch(const SweepRow& row, FollowMode mode, bool lowest) {
    std::optional<std::size_t> pick;
    for (std::size_t k = 0; k < row.branches.size(); ++k) {
        if (!admissible(row, k, mode)) continue;
        if (!pick || !lowest) pick = k;
        if (lowest) break;
    }
    return pick;
}

/// Follows a branch through rows in the given order, starting from the lowest or highest.
inline void follow_branches(std::vector<SweepRow>& rows, FollowMode mode, bool start_lowest) {
    std::optional<double> previous;
    bool was_lowest = start_lowest;
    for (auto& row : rows) {
        row.selected = previous ? closest_branch(row, mode, *previous, was_lowest)
                                : extreme_branch(row, mode, start_lowest);
        row.no_stable_branch = !row.selected;
        if (row.selected) {
            previous = row.branches[*row.selected].I;
            was_lowest = row.selected == extreme_branch(row, mode, true);
        }
    }
}

// ---------------------------------------------------------------------------------------
// Detuning scan

/// All branches with stability verdicts along a Delta_A grid at power P.
inline std::vector<SweepRow> detuning_scan(const SystemConfig& cfg, double P, const std::vector<double>& Delta_A,
                                           unsigned workers = 0) {
    detail::require_ascending(Delta_A, "Delta_A");
    const SystemConfig base = with_power(cfg, P);
    validate(base);
    const FeedbackTerm fb = feedback_term(base, derive(base));
    return parallel_map<SweepRow>(
        Delta_A.size(), [&](std::size_t k) { return evaluate_point(Delta_A[k], with_detuning(base, Delta_A[k]), fb); },
        workers);
}

// ---------------------------------------------------------------------------------------
// Hysteresis

struct HysteresisResult {
    std::vector<SweepRow> up;    ///< ascending power
    std::vector<SweepRow> down;  ///< descending power
    std::optional<double> P1;    ///< up-scan jump power [W]
    std::optional<double> P2;    ///< down-scan jump power [W]
    FollowMode mode = FollowMode::static_outer;
};

/// Index of the first row whose selected intensity changes by more than `factor` times the
/// larger change to either grid neighbour. Rows without a selection are skipped.
inline std::optional<std::size_t> first_jump(const std::vector<SweepRow>& rows, double factor = 3.0) {
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < rows.size(); ++k)
        if (rows[k].selected) idx.push_back(k);
    if (idx.size() < 2) return std::nullopt;
    auto I = [&](std::size_t j) { return rows[idx[j]].branches[*rows[idx[j]].selected].I; };
    std::vector<double> change(idx.size(), 0.0);
    for (std::size_t j = 1; j < idx.size(); ++j) change[j] = std::abs(I(j) - I(j - 1));
    for (std::size_t j = 1; j < idx.size(); ++j) {
        double neighbour = 0.0;
        if (j >= 2) neighbour = std::max(neighbour, change[j - 1]);
        if (j + 1 < idx.size()) neighbour = std::max(neighbour, change[j + 1]);
        if (change[j] > factor * neighbour) return idx[j];
    }
    return std::nullopt;
}

/// Up and down power scans at fixed Delta_A with branch following and jump detection.
inline HysteresisResult hysteresis_scan(const SystemConfig& cfg, double Delta_A, const std::vector<double>& P,
                                        FollowMode mode = FollowMode::static_outer, unsigned workers = 0) {
    detail::require_ascending(P, "P_in");
    if (!(P.front() > 0.0)) throw ConfigError("P_in", "powers must be > 0");
    const SystemConfig base = with_detuning(cfg, Delta_A);
    validate(base);
    const FeedbackTerm fb = feedback_term(base, derive(base));

    HysteresisResult r;
    r.mode = mode;
    r.up = parallel_map<SweepRow>(
        P.size(), [&](std::size_t k) { return evaluate_point(P[k], with_power(base, P[k]), fb); }, workers);
    r.down.assign(r.up.rbegin(), r.up.rend());
    follow_branches(r.up, mode, true);
    follow_branches(r.down, mode, false);
    if (const auto j = first_jump(r.up)) r.P1 = r.up[*j].x;
    if (const auto j = first_jump(r.down)) r.P2 = r.down[*j].x;
    return r;
}

// ---------------------------------------------------------------------------------------
// Cooling scan

enum class BranchPolicy { lower, upper, follow };
enum class FeedbackMode { off, on, both };
enum class DetuningAxis {
    drive,      ///< grid values are Delta_A; the branch's Delta_eff follows self-consistently
    effective,  ///< grid values are Delta_eff; each maps to one steady state and its Delta_A
};

inline const char* to_string(BranchPolicy p) {
    switch (p) {
        case BranchPolicy::lower: return "lower";
        case BranchPolicy::upper: return "upper";
        case BranchPolicy::follow: return "follow";
    }
    return "unknown";
}

inline const char* to_string(DetuningAxis a) { return a == DetuningAxis::effective ? "effective" : "drive"; }

struct CoolingRow {
    double x = 0.0;          ///< grid value on the chosen axis
    double Delta_A = 0.0;
    bool feedback = false;
    std::size_t branch_count = 0;
    std::optional<std::size_t> branch_index;
    SteadyStateBranch branch;
    Stability verdict = Stability::unclassified;
    std::optional<CoolingReport> report;
    double omega_m = 0.0;
    double gamma_m = 0.0;
    std::string error;

    /// '|'-separated flags, empty when nothing noteworthy happened.
    std::string flags() const {
        std::string f;
        auto add = [&](const std::string& s) { f += (f.empty() ? "" : "|") + s; };
        if (!error.empty()) add("error");
        if (!branch_index && error.empty()) add("no_stable_branch");
        if (report && report->unstable_spring) add("unstable_spring");
        if (report && report->heating) add("heating");
        if (branch_index && !branch.static_stable) add("statically_unstable");
        if (branch_index && verdict != Stability::stable) add(std::string("dynamically_") + to_string(verdict));
        return f;
    }

    double omega_eff_over_omega_m() const { return report ? report->omega_eff / omega_m : std::nan(""); }
    double gamma_OM_over_gamma_m() const { return report ? report->gamma_OM / gamma_m : std::nan(""); }
};

struct CoolingScanOptions {
    BranchPolicy policy = BranchPolicy::lower;
    FeedbackMode feedback = FeedbackMode::both;
    DetuningAxis axis = DetuningAxis::drive;
    FollowMode selection = FollowMode::static_outer;
    unsigned workers = 0;
};

/// Cooling figures at one point of the effective-detuning axis (exactly one steady state).
inline CoolingRow cooling_at_effective(const SystemConfig& cfg, const DerivedParams& d, const FeedbackTerm& fb,
                                       double Delta_eff) {
    CoolingRow row;
    row.x = Delta_eff;
    row.feedback = cfg.feedback_enabled;
    row.omega_m = cfg.omega_m;
    row.gamma_m = d.gamma_m;
    try {
        auto [Delta_A, b] = branch_at_effective_detuning(cfg, d, fb, Delta_eff);
        row.Delta_A = Delta_A;
        const SystemConfig at = with_detuning(cfg, Delta_A);
        row.verdict = classify(b, at, d).verdict;
        row.branch = b;
        row.branch_count = 1;
        row.branch_index = 0;
        row.report = cooling_report(b, at, d, fb, 0);
    } catch (const NumericalError& e) {
        row.error = e.what();
    }
    return row;
}

/// gamma_OM / gamma_m at one effective detuning; -inf when the point fails.
inline double gamma_ratio_at_effective(const SystemConfig& cfg, double Delta_eff) {
    const DerivedParams d = derive(cfg);
    const FeedbackTerm fb = feedback_term(cfg, d);
    const CoolingRow row = cooling_at_effective(cfg, d, fb, Delta_eff);
    return row.report ? row.gamma_OM_over_gamma_m() : -std::numeric_limits<double>::infinity();
}

namespace detail {

inline std::vector<CoolingRow> cooling_drive_axis(const SystemConfig& cfg, const std::vector<double>& grid,
                                                  const CoolingScanOptions& opt) {
    const DerivedParams d0 = derive(cfg);
    const FeedbackTerm fb = feedback_term(cfg, d0);
    std::vector<SweepRow> rows = parallel_map<SweepRow>(
        grid.size(), [&](std::size_t k) { return evaluate_point(grid[k], with_detuning(cfg, grid[k]), fb); },
        opt.workers);
    if (opt.policy == BranchPolicy::follow) {
        follow_branches(rows, opt.selection, true);
    } else {
        for (auto& r : rows) {
            r.selected = extreme_branch(r, opt.selection, opt.policy == BranchPolicy::lower);
            r.no_stable_branch = !r.selected;
        }
    }
    std::vector<CoolingRow> out(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        CoolingRow& c = out[k];
        c.x = grid[k];
        c.Delta_A = grid[k];
        c.feedback = cfg.feedback_enabled;
        c.omega_m = cfg.omega_m;
        c.gamma_m = d0.gamma_m;
        c.branch_count = rows[k].branches.size();
        c.error = rows[k].error;
        if (!rows[k].selected) continue;
        const std::size_t i = *rows[k].selected;
        c.branch_index = i;
        c.branch = rows[k].branches[i];
        c.verdict = rows[k].branches[i].stable;
        try {
            c.report = cooling_report(c.branch, with_detuning(cfg, grid[k]), d0, fb, i);
        } catch (const NumericalError& e) {
            c.error = e.what();
        }
    }
    return out;
}

inline std::vector<CoolingRow> cooling_effective_axis(const SystemConfig& cfg, const std::vector<double>& grid,
                                                      unsigned workers) {
    const DerivedParams d = derive(cfg);
    const FeedbackTerm fb = feedback_term(cfg, d);
    return parallel_map<CoolingRow>(
        grid.size(), [&](std::size_t k) { return cooling_at_effective(cfg, d, fb, grid[k]); }, workers);
}

}  // namespace detail

/// Cooling figures along a detuning grid, for feedback off, on, or both (off rows first).
inline std::vector<CoolingRow> cooling_scan(const SystemConfig& cfg, const std::vector<double>& grid,
                                            const CoolingScanOptions& opt = {}) {
    detail::require_ascending(grid, "Delta_A");
    validate(cfg);
    std::vector<bool> runs;
    if (opt.feedback != FeedbackMode::on) runs.push_back(false);
    if (opt.feedback != FeedbackMode::off) runs.push_back(true);
    std::vector<CoolingRow> out;
    for (bool fb_on : runs) {
        const SystemConfig c = with_feedback(cfg, fb_on);
        auto part = opt.axis == DetuningAxis::effective ? detail::cooling_effective_axis(c, grid, opt.workers)
                                                        : detail::cooling_drive_axis(c, grid, opt);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

/// Golden-section search for a maximum of a unimodal function on [lo, hi].
inline std::pair<double, double> golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                                                    double rel_tol = 1e-13, int max_iter = 400) {
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double x1 = b - r * (b - a), x2 = a + r * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < max_iter && (b - a) > rel_tol * std::max(std::abs(a), std::abs(b)); ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        }
    }
    return f1 > f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

struct PeakResult {
    double x = 0.0;
    double value = -std::numeric_limits<double>::infinity();
    double grid_value = -std::numeric_limits<double>::infinity();
};

/// Largest gamma_OM / gamma_m over the grid on the effective axis, refined between the
/// neighbours of the best grid point.
inline PeakResult peak_gamma_ratio(const SystemConfig& cfg, const std::vector<double>& grid, unsigned workers = 0) {
    detail::require_ascending(grid, "Delta_A");
    const auto rows = detail::cooling_effective_axis(cfg, grid, workers);
    PeakResult p;
    std::size_t best = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const double v = rows[k].report ? rows[k].gamma_OM_over_gamma_m() : -std::numeric_limits<double>::infinity();
        if (v > p.grid_value) {
            p.grid_value = v;
            best = k;
        }
    }
    p.x = grid[best];
    p.value = p.grid_value;
    if (grid.size() < 2) return p;
    const double lo = grid[best == 0 ? 0 : best - 1];
    const double hi = grid[std::min(best + 1, grid.size() - 1)];
    const auto [x, v] = golden_section_max([&](double De) { return gamma_ratio_at_effective(cfg, De); }, lo, hi);
    if (v > p.value) {
        p.x = x;
        p.value = v;
    }
    return p;
}

// ---------------------------------------------------------------------------------------
// CSV output

/// Shortest round-trip-safe text: 17 significant digits. Empty for NaN placeholders.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + '"';
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline std::string to_csv(const CsvTable& t) {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t k = 0; k < cells.size(); ++k) {
            if (k) out += ',';
            out += csv_field(cells[k]);
        }
        out += "\r\n";
    };
    line(t.header);
    for (const auto& r : t.rows) line(r);
    return out;
}

inline void write_csv(const CsvTable& t, const std::filesystem::path& path) {
    if (t.rows.empty()) throw ConfigError("rows", "nothing to write");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << to_csv(t);
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

/// delta_A, delta_A_over_omega_m, branch_index, branch_count, I, chi_Q_S, stable, margin.
/// One line per (point, branch); a point without branches gets one line with empty branch cells.
inline CsvTable detuning_table(const std::vector<SweepRow>& rows, const SystemConfig& cfg) {
    const double chi = derive(cfg).chi;
    CsvTable t{{"delta_A", "delta_A_over_omega_m", "branch_index", "branch_count", "I", "chi_Q_S", "stable", "margin"}, {}};
    for (const auto& r : rows) {
        const std::string x = format_double(r.x), xn = format_double(r.x / cfg.omega_m);
        const std::string n = std::to_string(r.branches.size());
        if (r.branches.empty()) t.rows.push_back({x, xn, "", n, "", "", "", ""});
        for (std::size_t k = 0; k < r.branches.size(); ++k)
            t.rows.push_back({x, xn, std::to_string(k), n, format_double(r.branches[k].I),
                              format_double(chi * r.branches[k].Q_S), to_string(r.branches[k].stable),
                              format_double(r.verdicts[k].eigen.margin)});
    }
    return t;
}

inline CsvTable hysteresis_table(const HysteresisResult& h, const SystemConfig& cfg) {
    const double chi = derive(cfg).chi;
    CsvTable t{{"direction", "P_in", "branch_index", "branch_count", "I", "chi_Q_S", "stable", "static_stable",
                "margin", "selected"},
               {}};
    auto emit = [&](const std::vector<SweepRow>& rows, const char* dir) {
        for (const auto& r : rows) {
            const std::string p = format_double(r.x), n = std::to_string(r.branches.size());
            if (r.branches.empty()) t.rows.push_back({dir, p, "", n, "", "", "", "", "", ""});
            for (std::size_t k = 0; k < r.branches.size(); ++k) {
                const auto& b = r.branches[k];
                t.rows.push_back({dir, p, std::to_string(k), n, format_double(b.I), format_double(chi * b.Q_S),
                                  to_string(b.stable), b.static_stable ? "true" : "false",
                                  format_double(r.verdicts[k].eigen.margin),
                                  r.selected == k ? "true" : "false"});
            }
        }
    };
    emit(h.up, "up");
    emit(h.down, "down");
    return t;
}

/// The documented cooling columns followed by delta_eff_over_omega_m.
inline CsvTable cooling_table(const std::vector<CoolingRow>& rows) {
    CsvTable t{{"delta_A_over_omega_m", "feedback", "branch_index", "omega_eff_over_omega_m", "gamma_OM_over_gamma_m",
                "K_OM", "gamma_stokes", "gamma_antistokes", "n_bath", "n_min", "flags", "delta_eff_over_omega_m"},
               {}};
    for (const auto& r : rows) {
        std::vector<std::string> line{format_double(r.Delta_A / r.omega_m), r.feedback ? "on" : "off",
                                      r.branch_index ? std::to_string(*r.branch_index) : ""};
        if (r.report) {
            const auto& c = *r.report;
            for (double v : {r.omega_eff_over_omega_m(), r.gamma_OM_over_gamma_m(), c.K_OM, c.gamma_Stokes,
                             c.gamma_antiStokes, c.n_bath, c.n_min})
                line.push_back(format_double(v));
        } else {
            line.insert(line.end(), 7, "");
        }
        line.push_back(r.flags());
        line.push_back(r.branch_index ? format_double(r.branch.Delta_eff / r.omega_m) : "");
        t.rows.push_back(std::move(line));
    }
    return t;
}

}  // namespace optomech
