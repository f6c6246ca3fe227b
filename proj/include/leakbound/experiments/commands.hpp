#pragma once

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "../attack.hpp"
#include "../bounds.hpp"
#include "../mi_estimation.hpp"
#include "../oracle.hpp"
#include "config.hpp"
#include "report_io.hpp"

namespace leakbound::experiments {

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_io = 3 };

struct RunContext
{
    std::size_t threads = 0;
    std::ostream* log = &std::cerr;
};

namespace detail {

inline std::filesystem::path prepare_output(const ExperimentConfig& cfg)
{
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec)
        throw IoError("cannot create output directory '" + cfg.output_dir + "': " + ec.message());
    return cfg.output_dir;
}

inline void stamp(CsvTable& table, const ExperimentConfig& cfg, std::size_t n_draws, std::string_view command)
{
    table.add_comment("seed", std::to_string(cfg.seed));
    table.add_comment("n_draws", std::to_string(n_draws));
    table.add_comment("config_hash", fnv1a_hex(cfg.canonical));
    table.add_comment("command", std::string(command));
}

inline std::string sigma_label(double sigma2) { return "sigma2=" + format_number(sigma2); }

inline std::string optional_count(const std::optional<std::size_t>& q) { return q ? std::to_string(*q) : "NA"; }

inline std::vector<double> as_doubles(const QGrid& grid)
{
    return {grid.points().begin(), grid.points().end()};
}

inline MiCurves estimate(const ExperimentConfig& cfg, const LeakageConfig& leakage, const QGrid& grid,
                         const RunContext& ctx)
{
    EstimatorOptions options;
    options.threads = ctx.threads;
    MiCurves curves = estimate_mi_curves(leakage, grid, cfg.n_draws, SeededRng(cfg.seed), options);
    const std::size_t clamped = curves.xyt.negative_count() + curves.uyt.negative_count();
    if (clamped > 0)
        *ctx.log << "warning: " << clamped << " negative MI estimate(s) clamped to 0 at sigma2="
                 << format_number(leakage.sigma2()) << "\n";
    return curves;
}

inline QGrid attack_grid(const QGrid& grid)
{
    std::vector<std::size_t> pts;
    for (std::size_t q : grid.points())
        if (q >= 1)
            pts.push_back(q);
    if (pts.empty())
        throw ConfigError("q_grid needs at least one point >= 1 for attacks");
    return QGrid(std::move(pts));
}

inline AttackResult run_attack(const ExperimentConfig& cfg, const LeakageConfig& leakage, const RunContext& ctx)
{
    return success_rate_curve(AttackConfig{leakage, attack_grid(cfg.q_grid), cfg.n_attacks, cfg.seed, {},
                                           ctx.threads});
}

}  // namespace detail

/// MI curves for every noise level: mi_curves.csv and mi_curves.svg.
inline void cmd_mi(const ExperimentConfig& cfg, const RunContext& ctx = {})
{
    const auto dir = detail::prepare_output(cfg);
    CsvTable table({"kind", "sigma2", "q", "mi_bits", "std_err"});
    detail::stamp(table, cfg, cfg.n_draws, "mi");
    LinePlot plot(cfg.masked ? "Masked leakage: MI vs traces" : "Unprotected leakage: MI vs traces",
                  "number of traces q", "mutual information (bits)");
    const auto xs = detail::as_doubles(cfg.q_grid);
    for (double sigma2 : cfg.sigma2_list) {
        const LeakageConfig leakage = cfg.leakage(sigma2);
        const MiCurves curves = detail::estimate(cfg, leakage, cfg.q_grid, ctx);
        for (const MiCurve* curve : {&curves.xyt, &curves.uyt}) {
            for (std::size_t g = 0; g < cfg.q_grid.size(); ++g)
                table.add_row({std::string(to_string(curve->kind)), format_number(sigma2),
                               std::to_string(cfg.q_grid[g]), format_number(curve->reported(g)),
                               format_number(curve->std_errors[g])});
            plot.add({std::string(to_string(curve->kind)) + " " + detail::sigma_label(sigma2), xs,
                      curve->reported_values(), curve->kind == MiKind::uyt});
        }
        if (cfg.masked) {
            const double snr = snr_of(leakage);
            std::vector<double> line;
            for (std::size_t q : cfg.q_grid.points()) {
                line.push_back(capacity_bound(q, snr));
                table.add_row({"capacity", format_number(sigma2), std::to_string(q), format_number(line.back()), "0"});
            }
            plot.add({"capacity " + detail::sigma_label(sigma2), xs, line, true});
        }
    }
    table.save(dir / "mi_curves.csv");
    plot.save(dir / "mi_curves.svg");
}

/// Success-rate ceilings and q_min predictions: bounds.csv, qmin.csv, bounds.svg.
/// The empirical ML column is filled when n_attacks > 0.
inline void cmd_bound(const ExperimentConfig& cfg, const RunContext& ctx = {})
{
    const auto dir = detail::prepare_output(cfg);
    const QGrid grid = cfg.q_grid.with_point(1);
    const FanoContext fano(cfg.ell);
    CsvTable bounds({"sigma2", "q", "ps_ceiling_uyt", "ps_ceiling_xyt", "capacity_bits"});
    CsvTable qmin({"sigma2", "q_min_uyt", "q_min_xyt", "q_min_linear", "q_min_empirical"});
    detail::stamp(bounds, cfg, cfg.n_draws, "bound");
    detail::stamp(qmin, cfg, cfg.n_draws, "bound");
    LinePlot plot("Success-rate ceilings (target " + format_number(cfg.target_ps) + ")", "number of traces q",
                  "success rate");
    const auto xs = detail::as_doubles(grid);
    for (double sigma2 : cfg.sigma2_list) {
        const LeakageConfig leakage = cfg.leakage(sigma2);
        const MiCurves curves = detail::estimate(cfg, leakage, grid, ctx);
        const BoundReport report = make_bound_report(leakage, curves, cfg.target_ps);
        for (std::size_t g = 0; g < grid.size(); ++g)
            bounds.add_row({format_number(sigma2), std::to_string(grid[g]), format_number(report.ps_upper_uyt[g]),
                            format_number(report.ps_upper_xyt[g]), format_number(report.capacity_line[g])});
        plot.add({"bound I(U;Y|T) " + detail::sigma_label(sigma2), xs, report.ps_upper_uyt, false});
        std::string empirical = "NA";
        if (cfg.n_attacks > 0) {
            const AttackResult attack = detail::run_attack(cfg, leakage, ctx);
            empirical = detail::optional_count(first_crossing(attack.grid, attack.success_rate, cfg.target_ps));
            plot.add({"ML attack " + detail::sigma_label(sigma2), detail::as_doubles(attack.grid),
                      attack.success_rate, true});
        }
        qmin.add_row({format_number(sigma2), detail::optional_count(report.q_min_uyt),
                      detail::optional_count(report.q_min_xyt), detail::optional_count(report.q_min_linear),
                      empirical});
    }
    bounds.save(dir / "bounds.csv");
    qmin.save(dir / "qmin.csv");
    plot.save(dir / "bounds.svg");
}

/// Empirical ML success rates: attack_sr.csv and attack_sr.svg. When a
/// bounds.csv for the same noise levels sits in the output directory, its
/// ceilings are drawn alongside.
inline void cmd_attack(const ExperimentConfig& cfg, const RunContext& ctx = {})
{
    if (cfg.n_attacks < 1)
        throw ConfigError("n_attacks must be >= 1 for the attack command");
    const auto dir = detail::prepare_output(cfg);
    CsvTable table({"sigma2", "q", "success_rate", "ci_low", "ci_high", "ties"});
    detail::stamp(table, cfg, cfg.n_attacks, "attack");
    table.add_comment("n_attacks", std::to_string(cfg.n_attacks));
    LinePlot plot("ML attack success rate", "number of traces q", "success rate");

    std::optional<ParsedCsv> bounds;
    if (std::filesystem::exists(dir / "bounds.csv"))
        bounds = read_csv(dir / "bounds.csv");

    for (double sigma2 : cfg.sigma2_list) {
        const AttackResult result = detail::run_attack(cfg, cfg.leakage(sigma2), ctx);
        for (std::size_t g = 0; g < result.grid.size(); ++g)
            table.add_row({format_number(sigma2), std::to_string(result.grid[g]),
                           format_number(result.success_rate[g]), format_number(result.wilson_ci[g].low),
                           format_number(result.wilson_ci[g].high), std::to_string(result.ties)});
        plot.add({"ML " + detail::sigma_label(sigma2), detail::as_doubles(result.grid), result.success_rate, false});
        if (bounds) {
            const std::size_t cs = bounds->column("sigma2"), cq = bounds->column("q"),
                              cu = bounds->column("ps_ceiling_uyt");
            LinePlot::Series ceiling{"Fano ceiling " + detail::sigma_label(sigma2), {}, {}, true};
            for (const auto& row : bounds->rows)
                if (row[cs] == format_number(sigma2)) {
                    ceiling.x.push_back(std::stod(row[cq]));
                    ceiling.y.push_back(std::stod(row[cu]));
                }
            if (!ceiling.x.empty())
                plot.add(std::move(ceiling));
        }
    }
    table.save(dir / "attack_sr.csv");
    plot.save(dir / "attack_sr.svg");
}

/// MI estimate versus Monte-Carlo size: convergence.csv and convergence.svg.
inline void cmd_converge(const ExperimentConfig& cfg, const RunContext& ctx = {})
{
    if (cfg.n_draws_list.empty())
        throw ConfigError("converge needs n_draws_list");
    if (cfg.sigma2_list.size() != 1)
        throw ConfigError("converge takes exactly one sigma2 value");
    const auto dir = detail::prepare_output(cfg);
    const MiKind kind = cfg.mi_kind.value_or(MiKind::xyt);
    EstimatorOptions options;
    options.threads = ctx.threads;
    const auto points = convergence_sweep(cfg.leakage(cfg.sigma2_list.front()), cfg.q_grid, cfg.n_draws_list,
                                          SeededRng(cfg.seed), kind, options);
    std::string draws;
    for (std::size_t n : cfg.n_draws_list)
        draws += (draws.empty() ? "" : ";") + std::to_string(n);
    CsvTable table({"n_draws", "q", "mi_bits", "std_err"});
    table.add_comment("seed", std::to_string(cfg.seed));
    table.add_comment("n_draws", draws);
    table.add_comment("config_hash", fnv1a_hex(cfg.canonical));
    table.add_comment("command", "converge");
    table.add_comment("kind", std::string(to_string(kind)));
    LinePlot plot("Convergence of " + std::string(to_string(kind)) + ", " + detail::sigma_label(cfg.sigma2_list[0]),
                  "number of traces q", "mutual information (bits)");
    for (std::size_t n : cfg.n_draws_list) {
        LinePlot::Series s{"N_C=" + std::to_string(n), {}, {}, false};
        for (const auto& p : points) {
            if (p.n_draws != n)
                continue;
            table.add_row({std::to_string(p.n_draws), std::to_string(p.q), format_number(p.mi_bits),
                           format_number(p.std_error)});
            s.x.push_back(static_cast<double>(p.q));
            s.y.push_back(p.mi_bits);
        }
        plot.add(std::move(s));
    }
    table.save(dir / "convergence.csv");
    plot.save(dir / "convergence.svg");
}

/// Exact (quadrature) versus Monte-Carlo MI for tiny parameters: oracle.csv.
inline void cmd_oracle(const ExperimentConfig& cfg, const RunContext& ctx = {})
{
    if (cfg.ell > 3)
        throw ConfigError("oracle is limited to ell <= 3");
    for (std::size_t q : cfg.q_grid.points())
        if (q > 2)
            throw ConfigError("oracle is limited to q <= 2");
    const auto dir = detail::prepare_output(cfg);
    const MiKind kind = cfg.mi_kind.value_or(cfg.masked ? MiKind::uyt : MiKind::xyt);
    CsvTable table({"ell", "q", "sigma2", "mi_exact", "mi_mc", "std_err", "z_score"});
    detail::stamp(table, cfg, cfg.n_draws, "oracle");
    table.add_comment("kind", std::string(to_string(kind)));
    for (double sigma2 : cfg.sigma2_list) {
        const LeakageConfig leakage = cfg.leakage(sigma2);
        const MiCurves curves = detail::estimate(cfg, leakage, cfg.q_grid, ctx);
        const MiCurve& curve = kind == MiKind::xyt ? curves.xyt : curves.uyt;
        for (std::size_t g = 0; g < cfg.q_grid.size(); ++g) {
            const ExactMi exact = mi_exact_small(leakage, cfg.q_grid[g]);
            const double truth = kind == MiKind::xyt ? exact.i_xyt : exact.i_uyt;
            const double se = curve.std_errors[g];
            const double z = se > 0.0 ? (curve.values[g] - truth) / se : 0.0;
            table.add_row({std::to_string(cfg.ell), std::to_string(cfg.q_grid[g]), format_number(sigma2),
                           format_number(truth), format_number(curve.values[g]), format_number(se),
                           format_number(z)});
        }
    }
    table.save(dir / "oracle.csv");
}

/// Dispatches a command and maps failures to exit codes.
inline int run_command(std::string_view command, const std::string& config_path, Profile profile,
                       const RunContext& ctx = {})
{
    try {
        const ExperimentConfig cfg = load_config(config_path, profile);
        if (command == "mi")
            cmd_mi(cfg, ctx);
        else if (command == "bound")
            cmd_bound(cfg, ctx);
        else if (command == "attack")
            cmd_attack(cfg, ctx);
        else if (command == "converge")
            cmd_converge(cfg, ctx);
        else if (command == "oracle")
            cmd_oracle(cfg, ctx);
        else
            throw ConfigError("unknown command '" + std::string(command) + "'");
        return exit_ok;
    } catch (const ConfigError& e) {
        *ctx.log << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const IoError& e) {
        *ctx.log << "i/o error: " << e.what() << "\n";
        return exit_io;
    } catch (const std::invalid_argument& e) {
        *ctx.log << "config error: " << e.what() << "\n";
        return exit_config;
    }
}

}  // namespace leakbound::experiments
