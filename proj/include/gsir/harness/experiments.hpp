#pragma once

// Experiment orchestration: seeded replications over n-grids, epsilon
// schedules and delta sweeps, with CSV emission.
//
// Every task (n, replication) draws its randomness from
// derive_seed(base_seed, n, replication) only. Tasks may run on several
// threads; results are written into slots indexed by (n, replication), so
// the emitted rows never depend on scheduling.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gsir/datagen.hpp"
#include "gsir/gsir.hpp"
#include "gsir/harness/config.hpp"
#include "gsir/harness/io.hpp"
#include "gsir/metrics.hpp"
#include "gsir/random.hpp"
#include "gsir/rates.hpp"
#include "gsir/spectral_sim.hpp"

namespace gsir::harness {

inline constexpr double kSlopeTolerance = 0.08;
inline constexpr double kMinRSquared = 0.95;

/// Runs fn(i) for i in [0, count) on up to `threads` workers. The first
/// exception thrown by any task is rethrown on the calling thread.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(threads, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = count;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

/// Seed of the held-out evaluation design for a kernel-recovery replication.
constexpr std::uint64_t test_design_seed(std::uint64_t replication_seed) noexcept {
    return splitmix64(replication_seed ^ 0x7465737464657369ULL);
}

inline double schedule_epsilon(double constant, double n, double delta) { return constant * std::pow(n, -delta); }

// ---------------------------------------------------------------- sim_rate

struct SimRow {
    Index n = 0;
    int rep = 0;
    double delta = 0.0;
    double epsilon = 0.0;
    std::uint64_t seed = 0;
    sim::ErrorRecord record;
};

/// Median errors at one (delta, n) cell.
struct SimCell {
    double delta = 0.0;
    Index n = 0;
    double epsilon = 0.0;
    double median_r1 = 0.0;
    double median_r2 = 0.0;
    double median_m = 0.0;
    double median_span_gsir1 = 0.0;
    double median_span_gsir2 = 0.0;
    double median_lead_phi = 0.0;  // |phi_hat_1 - s phi_1|
    double median_lead_eta = 0.0;  // |eta_hat_1 - s' eta_1|
    bool all_bounds_ok = true;
};

struct SimSlopes {
    double delta = 0.0;
    rates::SlopeFit r1, r2, m, span_gsir1, span_gsir2, lead_phi, lead_eta;
};

struct RateReport {
    Mode mode = Mode::sim_rate;
    int d = 0;
    std::vector<SimRow> rows;
    std::vector<SimCell> cells;
    std::vector<SimSlopes> slopes;  // one per delta, when the grid has >= 3 sizes
    rates::RateTheory theory;
    double tail_fraction = 0.0;
    bool pass = false;  // R1 slope within kSlopeTolerance of -exponent_opt at delta_opt, r^2 >= kMinRSquared
};

inline std::vector<double> effective_deltas(const ExperimentConfig& c, const rates::RateTheory& theory) {
    return c.optimal_delta() ? std::vector<double>{theory.delta_opt} : c.deltas;
}

inline sim::SpectralModel model_for(const ExperimentConfig& c) {
    return sim::build_model(c.J, c.Jy, c.alpha, c.beta, splitmix64(c.base_seed), c.s_kind, c.alpha_u);
}

/// One replication at sample size n, evaluated at every delta with the same sample.
inline std::vector<SimRow> sim_task(const ExperimentConfig& c, const sim::SpectralModel& model, Index n, int rep,
                                    const std::vector<double>& deltas) {
    const std::uint64_t seed = derive_seed(c.base_seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep));
    const sim::SpectralSample sample = sim::simulate_sample(model, n, seed, c.residual_kind);
    const sim::EmpiricalOperators ops = sim::empirical_operators(sample);
    std::vector<SimRow> rows;
    for (double delta : deltas) {
        SimRow row;
        row.n = n;
        row.rep = rep;
        row.delta = delta;
        row.epsilon = schedule_epsilon(c.epsilon_constant, static_cast<double>(n), delta);
        row.seed = seed;
        row.record = sim::error_report(model, sim::estimate_regression_ops(ops, row.epsilon));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline RateReport run_sim_rate(const ExperimentConfig& c, int threads = 1) {
    if (c.mode != Mode::sim_rate) throw ConfigError("run_sim_rate needs mode sim_rate");
    RateReport report;
    report.mode = Mode::sim_rate;
    report.theory = rates::optimal_rate_theory(c.alpha, c.beta);
    const auto deltas = effective_deltas(c, report.theory);
    for (double d : deltas)
        if (!(d > 0.0 && d < 1.0)) throw ConfigError("field 'delta' values must lie in (0, 1)");
    const sim::SpectralModel model = model_for(c);
    report.tail_fraction = model.tail_fraction();
    report.d = static_cast<int>(sim::detail::numerical_rank(model.R));

    const std::size_t reps = static_cast<std::size_t>(c.replications);
    const std::size_t tasks = c.n_grid.size() * reps;
    std::vector<std::vector<SimRow>> slots(tasks);
    parallel_for(tasks, threads, [&](std::size_t t) {
        slots[t] = sim_task(c, model, c.n_grid[t / reps], static_cast<int>(t % reps), deltas);
    });

    // Rows ordered by (delta, n, rep).
    for (std::size_t k = 0; k < deltas.size(); ++k)
        for (const auto& slot : slots) report.rows.push_back(slot[k]);

    for (std::size_t k = 0; k < deltas.size(); ++k) {
        std::vector<double> ns, r1, r2, m, s1, s2, lphi, leta;
        for (std::size_t gi = 0; gi < c.n_grid.size(); ++gi) {
            SimCell cell;
            cell.delta = deltas[k];
            cell.n = c.n_grid[gi];
            cell.epsilon = schedule_epsilon(c.epsilon_constant, static_cast<double>(cell.n), cell.delta);
            std::vector<double> e1, e2, em, es1, es2, ephi, eeta;
            for (std::size_t r = 0; r < reps; ++r) {
                const auto& rec = slots[gi * reps + r][k].record;
                e1.push_back(rec.err_r1);
                e2.push_back(rec.err_r2);
                em.push_back(rec.err_m);
                es1.push_back(rec.gsir1_span_error);
                es2.push_back(rec.gsir2_span_error);
                if (!rec.eigvec_errors.empty()) ephi.push_back(rec.eigvec_errors.front());
                if (!rec.eta_errors.empty()) eeta.push_back(rec.eta_errors.front());
                for (const auto& ok : rec.bound_ok)
                    if (ok && !*ok) cell.all_bounds_ok = false;
            }
            cell.median_r1 = rates::median(e1);
            cell.median_r2 = rates::median(e2);
            cell.median_m = rates::median(em);
            cell.median_span_gsir1 = rates::median(es1);
            cell.median_span_gsir2 = rates::median(es2);
            if (!ephi.empty()) cell.median_lead_phi = rates::median(ephi);
            if (!eeta.empty()) cell.median_lead_eta = rates::median(eeta);
            report.cells.push_back(cell);
            ns.push_back(static_cast<double>(cell.n));
            r1.push_back(cell.median_r1);
            r2.push_back(cell.median_r2);
            m.push_back(cell.median_m);
            s1.push_back(cell.median_span_gsir1);
            s2.push_back(cell.median_span_gsir2);
            lphi.push_back(cell.median_lead_phi);
            leta.push_back(cell.median_lead_eta);
        }
        if (ns.size() >= 3) {
            auto fit_or_empty = [&](const std::vector<double>& e) {
                return std::all_of(e.begin(), e.end(), [](double v) { return v > 0.0; })
                           ? rates::fit_loglog_slope(ns, e)
                           : rates::SlopeFit{};
            };
            SimSlopes s;
            s.delta = deltas[k];
            s.r1 = fit_or_empty(r1);
            s.r2 = fit_or_empty(r2);
            s.m = fit_or_empty(m);
            s.span_gsir1 = fit_or_empty(s1);
            s.span_gsir2 = fit_or_empty(s2);
            s.lead_phi = fit_or_empty(lphi);
            s.lead_eta = fit_or_empty(leta);
            report.slopes.push_back(s);
        }
    }

    for (const auto& s : report.slopes) {
        if (std::abs(s.delta - report.theory.delta_opt) < 1e-12)
            report.pass = std::abs(s.r1.slope + report.theory.exponent_opt) <= kSlopeTolerance &&
                          s.r1.r_squared >= kMinRSquared;
    }
    return report;
}

inline std::string sim_rate_header(int d) {
    std::ostringstream out;
    out << "n,rep,epsilon,err_r1,err_r2,err_m";
    for (int j = 1; j <= d; ++j) out << ",proj_err_" << j;
    for (int j = 1; j <= d; ++j) out << ",bound_ok_" << j;
    return out.str();
}

inline std::string sim_rate_csv_row(const SimRow& row, int d) {
    std::ostringstream out;
    const auto& r = row.record;
    out << row.n << ',' << row.rep << ',' << format_double(row.epsilon) << ',' << format_double(r.err_r1) << ','
        << format_double(r.err_r2) << ',' << format_double(r.err_m);
    for (int j = 0; j < d; ++j)
        out << ',' << (j < static_cast<int>(r.proj_errors.size()) ? format_double(r.proj_errors[j]) : "NA");
    for (int j = 0; j < d; ++j) {
        const bool known = j < static_cast<int>(r.bound_ok.size()) && r.bound_ok[j].has_value();
        out << ',' << (known ? (*r.bound_ok[j] ? "1" : "0") : "NA");
    }
    return out.str();
}

inline std::string sim_rate_csv(const RateReport& report) {
    std::ostringstream out;
    out << sim_rate_header(report.d) << '\n';
    for (const auto& row : report.rows) out << sim_rate_csv_row(row, report.d) << '\n';
    return out.str();
}

// --------------------------------------------------------- kernel_recovery

struct KernelRow {
    Index n = 0;
    int rep = 0;
    GsirVariant variant = GsirVariant::gsir1;
    std::uint64_t seed = 0;
    double epsilon = 0.0;
    double subspace_dist = 0.0;
    double max_cancor = 0.0;
    VectorXd eigenvalues;
};

struct KernelCell {
    Index n = 0;
    GsirVariant variant = GsirVariant::gsir1;
    double median_cancor = 0.0;
    double median_subspace_dist = 0.0;
};

struct RecoveryReport {
    int d = 1;
    std::vector<KernelRow> rows;
    std::vector<KernelCell> cells;
};

inline double kernel_epsilon(const ExperimentConfig& c, Index n) {
    if (c.epsilon) return *c.epsilon;
    return schedule_epsilon(c.epsilon_constant, static_cast<double>(n), c.deltas.front());
}

/// One replication: fit every configured variant on a fresh training sample
/// and score predictor evaluations on a held-out design against the
/// generating functions.
inline std::vector<KernelRow> kernel_task(const ExperimentConfig& c, Index n, int rep) {
    const std::uint64_t seed = derive_seed(c.base_seed, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep));
    const datagen::Dataset train = datagen::generate(c.model, n, seed);
    const datagen::Dataset test = datagen::generate(c.model, c.test_size, test_design_seed(seed));
    const KernelSpec kx = c.kernel_x.resolve(train.X);
    const KernelSpec ky = c.kernel_y.resolve(train.Y);
    const GsirProblem problem(train.X, train.Y, kx, ky);
    const double eps = kernel_epsilon(c, n);
    std::vector<KernelRow> rows;
    for (GsirVariant v : c.variants) {
        const GsirFit fit = problem.solve(v, eps, c.d);
        const MatrixXd pred = evaluate_predictors(fit, test.X);
        KernelRow row;
        row.n = n;
        row.rep = rep;
        row.variant = v;
        row.seed = seed;
        row.epsilon = eps;
        row.subspace_dist = metrics::subspace_distance(pred, test.F_true);
        row.max_cancor = metrics::max_canonical_correlation(pred, test.F_true);
        row.eigenvalues = fit.eigenvalues;
        rows.push_back(std::move(row));
    }
    return rows;
}

inline RecoveryReport run_kernel_recovery(const ExperimentConfig& c, int threads = 1) {
    if (c.mode != Mode::kernel_recovery) throw ConfigError("run_kernel_recovery needs mode kernel_recovery");
    for (Index n : c.n_grid)
        if (c.d > n - 1) throw ConfigError("field 'd' must be <= n-1 for every n in 'n_grid'");
    RecoveryReport report;
    report.d = c.d;
    const std::size_t reps = static_cast<std::size_t>(c.replications);
    const std::size_t tasks = c.n_grid.size() * reps;
    std::vector<std::vector<KernelRow>> slots(tasks);
    parallel_for(tasks, threads,
                 [&](std::size_t t) { slots[t] = kernel_task(c, c.n_grid[t / reps], static_cast<int>(t % reps)); });
    for (const auto& slot : slots)
        for (const auto& row : slot) report.rows.push_back(row);

    for (std::size_t gi = 0; gi < c.n_grid.size(); ++gi) {
        for (std::size_t vi = 0; vi < c.variants.size(); ++vi) {
            std::vector<double> cc, sd;
            for (std::size_t r = 0; r < reps; ++r) {
                const auto& row = slots[gi * reps + r][vi];
                cc.push_back(row.max_cancor);
                sd.push_back(row.subspace_dist);
            }
            report.cells.push_back({c.n_grid[gi], c.variants[vi], rates::median(cc), rates::median(sd)});
        }
    }
    return report;
}

inline std::string kernel_recovery_csv(const RecoveryReport& report) {
    std::ostringstream out;
    out << "n,rep,variant,subspace_dist,max_cancor";
    for (int j = 1; j <= report.d; ++j) out << ",eig_" << j;
    out << '\n';
    for (const auto& row : report.rows) {
        out << row.n << ',' << row.rep << ',' << to_string(row.variant) << ',' << format_double(row.subspace_dist)
            << ',' << format_double(row.max_cancor);
        for (Index j = 0; j < row.eigenvalues.size(); ++j) out << ',' << format_double(row.eigenvalues(j));
        out << '\n';
    }
    return out.str();
}

// ------------------------------------------------------------ theory_table

struct TheoryRow {
    rates::RateTheory theory;
    double n = 0.0;
    double epsilon = 0.0;
    rates::BoundTerms rn;
    rates::BoundTerms rn_prime;
};

/// Bound terms are evaluated at the configured n with epsilon = c n^{-delta_opt}.
inline std::vector<TheoryRow> run_theory_table(const ExperimentConfig& c) {
    if (c.mode != Mode::theory_table) throw ConfigError("run_theory_table needs mode theory_table");
    std::vector<TheoryRow> rows;
    for (const auto& [alpha, beta] : c.grid) {
        if (!(alpha > 1.0)) throw ConfigError("field 'grid': alpha must be > 1");
        TheoryRow row;
        row.theory = rates::optimal_rate_theory(alpha, beta);
        row.n = c.theory_n;
        row.epsilon = schedule_epsilon(c.epsilon_constant, c.theory_n, row.theory.delta_opt);
        if (!(row.epsilon < 1.0)) throw ConfigError("theory epsilon must be < 1; lower 'epsilon_constant' or raise 'n'");
        row.rn = rates::rate_bound_terms(row.n, row.epsilon, alpha, beta, rates::BoundVariant::gsir1);
        row.rn_prime = rates::rate_bound_terms(row.n, row.epsilon, alpha, beta, rates::BoundVariant::gsir2);
        rows.push_back(row);
    }
    return rows;
}

inline std::string theory_csv(const std::vector<TheoryRow>& rows) {
    std::ostringstream out;
    out << "alpha,beta,branch,delta_opt,exponent_opt,rn_sum,rnprime_sum\n";
    for (const auto& r : rows) {
        out << format_double(r.theory.alpha) << ',' << format_double(r.theory.beta) << ','
            << rates::to_string(r.theory.branch) << ',' << format_double(r.theory.delta_opt) << ','
            << format_double(r.theory.exponent_opt) << ',' << format_double(r.rn.sum) << ','
            << format_double(r.rn_prime.sum) << '\n';
    }
    return out.str();
}

// ----------------------------------------------------------------- summary

inline std::string sim_rate_summary(const RateReport& report) {
    std::ostringstream out;
    out << "theory: alpha=" << report.theory.alpha << " beta=" << report.theory.beta
        << " branch=" << rates::to_string(report.theory.branch) << " delta_opt=" << report.theory.delta_opt
        << " exponent_opt=" << report.theory.exponent_opt << "\n";
    out << "truncation tail fraction: " << report.tail_fraction << "\n";
    for (const auto& cell : report.cells)
        out << "delta=" << cell.delta << " n=" << cell.n << " eps=" << cell.epsilon << " median err_r1=" << cell.median_r1
            << " err_r2=" << cell.median_r2 << " err_m=" << cell.median_m << " bounds_ok=" << cell.all_bounds_ok << "\n";
    for (const auto& s : report.slopes)
        out << "delta=" << s.delta << " slope(err_r1)=" << s.r1.slope << " r2=" << s.r1.r_squared
            << " slope(err_m)=" << s.m.slope << " slope(span GSIR-I)=" << s.span_gsir1.slope
            << " slope(span GSIR-II)=" << s.span_gsir2.slope << "\n";
    if (report.cells.size() > 1 && report.slopes.size() != 1) {
        // Empirical optimum over delta at each n.
        std::map<Index, std::pair<double, double>> best;
        for (const auto& cell : report.cells) {
            auto it = best.find(cell.n);
            if (it == best.end() || cell.median_r1 < it->second.second) best[cell.n] = {cell.delta, cell.median_r1};
        }
        for (const auto& [n, b] : best) out << "n=" << n << " empirical best delta=" << b.first << "\n";
    }
    out << "status: " << (report.pass ? "PASS" : "FAIL / not applicable") << "\n";
    return out.str();
}

inline std::string kernel_recovery_summary(const RecoveryReport& report) {
    std::ostringstream out;
    for (const auto& cell : report.cells)
        out << "n=" << cell.n << " " << to_string(cell.variant) << " median max_cancor=" << cell.median_cancor
            << " median subspace_dist=" << cell.median_subspace_dist << "\n";
    return out.str();
}

}  // namespace gsir::harness
