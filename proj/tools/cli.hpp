#pragma once

#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "opocomb/opocomb.hpp"

// Command-line front end: eval, simulate, filter, fit, export-plot.
namespace opocomb::cli
{

enum Status : int
{
    ok = 0,
    usage = 2,
    io_failure = 3,
    parse_failure = 4,
    unit_failure = 5,
    invalid = 6,
    no_periodicity = 7,
    internal = 10,
};

struct Grid
{
    double t0 = 0.0, t1 = 0.0, step = 0.0; // ps
};

inline Grid parse_grid(const std::string &text)
{
    const auto parts = io::detail::split(text, ':');
    if (parts.size() != 3)
        throw InvalidInput("--grid expects t0:t1:step_ps");
    Grid g{io::detail::parse_double(parts[0], 0, "grid start"), io::detail::parse_double(parts[1], 0, "grid end"),
           io::detail::parse_double(parts[2], 0, "grid step")};
    if (!(g.step > 0.0) || !(g.t0 <= g.t1))
        throw InvalidInput("--grid needs t0 <= t1 and step > 0");
    if ((g.t1 - g.t0) / g.step > 5e7)
        throw InvalidInput("--grid has too many points");
    return g;
}

inline std::vector<double> grid_points(const Grid &g)
{
    std::vector<double> t;
    const auto n = static_cast<std::size_t>(std::floor((g.t1 - g.t0) / g.step + 1e-9)) + 1;
    for (std::size_t i = 0; i < n; ++i)
        t.push_back(g.t0 + static_cast<double>(i) * g.step);
    return t;
}

// Nominal cavity for the filter command when none is supplied: 7.8 MHz
// bandwidth, 625 MHz free spectral range, 401 modes.
inline CavityParams nominal_cavity()
{
    CavityParams c;
    c.bandwidth = units::mhz_to_rad_per_s(7.8);
    c.gamma1 = c.bandwidth;
    c.gamma2 = 0.0;
    c.epsilon = 0.01 * c.bandwidth;
    c.fsr = units::mhz_to_rad_per_s(625.0);
    c.n_modes = 200;
    c.finesse_ratio = 1.0;
    return c;
}

inline void emit(const std::string &path, const std::string &text, std::ostream &out)
{
    if (path.empty() || path == "-")
        out << text;
    else
        io::write_text(path, text);
}

inline io::ParamsDocument load_params(const std::string &path)
{
    return path.empty() ? io::ParamsDocument{} : io::read_params(path);
}

inline std::vector<std::string> split_list(const std::string &s)
{
    std::vector<std::string> out;
    if (!s.empty())
        for (auto &item : io::detail::split(s, ','))
            out.push_back(item);
    return out;
}

inline int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
{
    CLI::App app{"opocomb: multimode biphoton comb correlation toolkit"};
    app.require_subcommand(1);

    // eval
    std::string eval_params, eval_grid, eval_model = "auto", eval_out;
    auto *eval = app.add_subcommand("eval", "evaluate the correlation model on a time grid");
    eval->add_option("--params", eval_params, "params document")->required();
    eval->add_option("--grid", eval_grid, "t0:t1:step_ps")->required();
    eval->add_option("--model", eval_model, "comb | analytic | auto");
    eval->add_option("--out", eval_out, "output curve table (default stdout)");

    // simulate
    std::string sim_params, sim_out, sim_model = "auto", sim_window, sim_mask;
    std::optional<std::uint64_t> sim_pairs, sim_seed;
    std::optional<double> sim_background, sim_dead, sim_jitter, sim_bin;
    std::optional<unsigned> sim_threads;
    auto *sim = app.add_subcommand("simulate", "Monte Carlo coincidence histogram");
    sim->add_option("--params", sim_params, "params document (model and simulation sections)");
    sim->add_option("--model", sim_model, "comb | cavity | auto");
    sim->add_option("--pairs", sim_pairs, "true pairs to generate");
    sim->add_option("--background", sim_background, "accidentals per true pair");
    sim->add_option("--seed", sim_seed, "u64 RNG seed");
    sim->add_option("--window", sim_window, "t_min:t_max in ps");
    sim->add_option("--dead", sim_dead, "leading dead region in ps");
    sim->add_option("--jitter", sim_jitter, "per-channel jitter FWHM in ps");
    sim->add_option("--bin", sim_bin, "bin width in ps");
    sim->add_option("--threads", sim_threads, "worker threads (0 = all cores)");
    sim->add_option("--out", sim_out, "output histogram (default stdout)");

    // filter
    std::string filt_params, filt_grid = "0:5000:1", filt_out, filt_weights;
    double filt_tau_d = 220.0;
    auto *filt = app.add_subcommand("filter", "etalon mode weights and filtered correlation");
    filt->add_option("--params", filt_params, "params document (etalon, cavity)");
    filt->add_option("--grid", filt_grid, "t0:t1:step_ps");
    filt->add_option("--tau-d", filt_tau_d, "detector resolving time in ps for the smoothed curve");
    filt->add_option("--out", filt_out, "filtered curve table (default stdout)");
    filt->add_option("--weights-out", filt_weights, "mode weight table");

    // fit
    std::string fit_hist, fit_params, fit_mask, fit_loss = "poisson_weighted", fit_out, fit_resid, fit_freeze;
    int fit_max_iter = 200;
    double fit_tol = 1e-9;
    auto *fitc = app.add_subcommand("fit", "fit the comb model to a histogram");
    fitc->add_option("--hist", fit_hist, "histogram file")->required();
    fitc->add_option("--params", fit_params, "optional params document with a comb_fit starting point");
    fitc->add_option("--mask", fit_mask, "extra excluded ranges t0:t1,... in ps");
    fitc->add_option("--loss", fit_loss, "poisson_weighted | least_squares");
    fitc->add_option("--freeze", fit_freeze, "comma list of c1,c2,bandwidth,tau0,tau_opo,tau_d");
    fitc->add_option("--max-iter", fit_max_iter, "iteration limit");
    fitc->add_option("--tol", fit_tol, "relative objective decrease for convergence");
    fitc->add_option("--out", fit_out, "result params document (default stdout)");
    fitc->add_option("--residuals", fit_resid, "residual table");

    // export-plot
    std::string exp_hist, exp_params, exp_out;
    auto *expo = app.add_subcommand("export-plot", "histogram and model overlay table");
    expo->add_option("--hist", exp_hist, "histogram file")->required();
    expo->add_option("--params", exp_params, "params document with comb_fit")->required();
    expo->add_option("--out", exp_out, "overlay table (default stdout)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &)
    {
        out << app.help();
        return ok;
    }
    catch (const CLI::ParseError &e)
    {
        err << "opocomb: error kind=usage status=" << usage << " message=\"" << e.what() << "\"\n";
        return usage;
    }

    auto fail = [&](const std::string &kind, int status, const std::string &msg) {
        std::string clean = msg;
        for (auto &c : clean)
            if (c == '\n' || c == '"')
                c = '\'';
        err << "opocomb: error kind=" << kind << " status=" << status << " message=\"" << clean << "\"\n";
        return status;
    };

    try
    {
        if (*eval)
        {
            const auto doc = io::read_params(eval_params);
            std::string model = eval_model;
            if (model == "auto")
                model = doc.comb_fit ? "comb" : "analytic";
            const auto times = grid_points(parse_grid(eval_grid));
            io::Column t{"time_ps", times}, idx{"index", {}, true}, v{"value", {}};
            for (std::size_t i = 0; i < times.size(); ++i)
            {
                idx.values.push_back(static_cast<double>(i));
                const double tau = units::ps_to_s(times[i]);
                if (model == "comb")
                {
                    if (!doc.comb_fit)
                        throw InvalidInput("eval: params document has no comb_fit section");
                    v.values.push_back(gamma2_comb_fit(*doc.comb_fit, tau));
                }
                else if (model == "analytic")
                {
                    if (!doc.cavity)
                        throw InvalidInput("eval: params document has no cavity section");
                    v.values.push_back(gamma2_analytic(*doc.cavity, tau));
                }
                else
                    throw InvalidInput("eval: --model must be comb, analytic or auto");
            }
            std::ostringstream os;
            io::write_table(os, "curve", {{"quantity", model == "comb" ? "gamma2_comb_fit" : "gamma2_analytic"}},
                            {idx, t, v});
            emit(eval_out, os.str(), out);
        }
        else if (*sim)
        {
            const auto doc = load_params(sim_params);
            SimConfig cfg;
            if (doc.simulation)
                cfg = *doc.simulation;
            else
            {
                cfg.t_min = 0.0;
                cfg.t_max = 100000.0;
                cfg.dead_before = 45000.0;
                cfg.pair_count = 200000;
                cfg.duration_s = 70.0;
            }
            if (sim_pairs)
                cfg.pair_count = *sim_pairs;
            if (sim_background)
                cfg.background_ratio = *sim_background;
            if (sim_seed)
                cfg.seed = *sim_seed;
            if (sim_dead)
                cfg.dead_before = *sim_dead;
            if (sim_jitter)
                cfg.jitter_fwhm = *sim_jitter;
            if (sim_bin)
                cfg.bin_width = *sim_bin;
            if (sim_threads)
                cfg.threads = *sim_threads;
            if (!sim_window.empty())
            {
                const auto w = io::parse_ranges(sim_window);
                if (w.size() != 1)
                    throw InvalidInput("--window expects t_min:t_max");
                cfg.t_min = w[0].lo;
                cfg.t_max = w[0].hi;
            }

            std::string model = sim_model;
            if (model == "auto")
                model = doc.comb_fit || !doc.cavity ? "comb" : "cavity";
            CorrelationModel m;
            if (model == "comb")
                m = doc.comb_fit ? *doc.comb_fit : nominal_comb_params();
            else if (model == "cavity")
            {
                if (!doc.cavity)
                    throw InvalidInput("simulate: --model cavity needs a cavity section");
                m = *doc.cavity;
                if (!sim_jitter && !doc.simulation)
                    cfg.jitter_fwhm = 220.0;
            }
            else
                throw InvalidInput("simulate: --model must be comb, cavity or auto");

            std::ostringstream os;
            io::write_histogram(simulate(m, cfg), os);
            emit(sim_out, os.str(), out);
        }
        else if (*filt)
        {
            const auto doc = load_params(filt_params);
            const EtalonSpec etalon = doc.etalon ? *doc.etalon : nominal_etalon();
            const CavityParams cav = doc.cavity ? *doc.cavity : nominal_cavity();
            validate(cav);
            if (!(filt_tau_d > 0.0))
                throw InvalidInput("filter: --tau-d must be positive");
            const double fsr_hz = cav.fsr / units::two_pi;
            const ModeWeights w = mode_weights(etalon, fsr_hz, cav.n_modes);

            if (!filt_weights.empty())
            {
                io::Column m{"m", {}, true}, off{"offset_mhz", {}}, wt{"weight", {}};
                for (int k = -cav.n_modes; k <= cav.n_modes; ++k)
                {
                    m.values.push_back(k);
                    off.values.push_back(units::hz_to_mhz(k * fsr_hz));
                    wt.values.push_back(w.at(k));
                }
                std::ostringstream os;
                io::write_table(os, "mode_weights",
                                {{"preserved_fraction", io::format_double(preserved_fraction(w))}}, {m, off, wt});
                io::write_text(filt_weights, os.str());
            }

            const SmoothedFilteredComb smoothed(w, cav.bandwidth, cav.fsr, units::ps_to_s(filt_tau_d));
            const double etalon_period = 1.0 / etalon.fsr;
            const auto times = grid_points(parse_grid(filt_grid));
            io::Column idx{"index", {}, true}, t{"time_ps", times}, raw{"filtered", {}}, sm{"smoothed", {}};
            for (std::size_t i = 0; i < times.size(); ++i)
            {
                const double tau = units::ps_to_s(times[i]);
                idx.values.push_back(static_cast<double>(i));
                raw.values.push_back(filtered_comb(w, cav.bandwidth, cav.fsr, tau));
                sm.values.push_back(smoothed(tau));
            }
            std::ostringstream os;
            io::write_table(os, "filtered_curve",
                            {{"preserved_fraction", io::format_double(preserved_fraction(w))},
                             {"tau_d_ps", io::format_double(filt_tau_d)},
                             {"contrast_at_etalon_period", io::format_double(comb_contrast(smoothed, etalon_period))},
                             {"contrast_at_round_trip",
                              io::format_double(comb_contrast(smoothed, cav.round_trip_time()))}},
                            {idx, t, raw, sm});
            emit(filt_out, os.str(), out);
        }
        else if (*fitc)
        {
            const Histogram h = io::read_histogram(fit_hist);
            const auto doc = load_params(fit_params);
            FitOptions opts;
            opts.mask = io::parse_ranges(fit_mask);
            opts.loss = io::parse_loss(fit_loss);
            opts.max_iter = fit_max_iter;
            opts.tol = fit_tol;
            for (const auto &name : split_list(fit_freeze))
            {
                bool found = false;
                for (int j = 0; j < comb_param_count; ++j)
                {
                    const std::string key(io::comb_keys[j]);
                    if (key == name || key.rfind(name + "_", 0) == 0)
                    {
                        opts.frozen[j] = true;
                        found = true;
                    }
                }
                if (!found)
                    throw InvalidInput("--freeze: unknown parameter '" + name + "'");
            }
            std::optional<CombFitParams> guess;
            if (doc.comb_fit)
            {
                guess = doc.comb_fit;
                opts.n_sum = doc.comb_fit->n_sum;
            }
            const FitResult r = fit(h, opts, guess);

            io::ParamsDocument res;
            res.comb_fit = r.params;
            res.fit_result = io::FitSummary{r.objective, r.initial_objective, r.iterations, r.converged, r.loss,
                                            r.stderr_estimates};
            emit(fit_out, io::format_params(res), out);

            if (!fit_resid.empty())
            {
                const auto vis = visible_bins(h, opts.mask);
                io::Column idx{"bin_index", {}, true}, t{"time_ps", {}}, c{"count", {}, true}, m{"model", {}},
                    rr{"residual", {}};
                for (std::size_t i = 0; i < h.size(); ++i)
                {
                    if (!vis[i])
                        continue;
                    const double mv = gamma2_comb_fit(r.params, h.bin_center_s(i));
                    const double w = opts.loss == Loss::poisson_weighted ? std::max(mv, 1.0) : 1.0;
                    idx.values.push_back(static_cast<double>(i));
                    t.values.push_back(h.bin_center(i));
                    c.values.push_back(static_cast<double>(h.counts[i]));
                    m.values.push_back(mv);
                    rr.values.push_back((static_cast<double>(h.counts[i]) - mv) / std::sqrt(w));
                }
                std::ostringstream os;
                io::write_table(os, "residuals", {{"loss", io::loss_name(opts.loss)}}, {idx, t, c, m, rr});
                io::write_text(fit_resid, os.str());
            }
        }
        else if (*expo)
        {
            const Histogram h = io::read_histogram(exp_hist);
            const auto doc = io::read_params(exp_params);
            if (!doc.comb_fit)
                throw InvalidInput("export-plot: params document has no comb_fit section");
            const auto vis = visible_bins(h);
            io::Column t{"time_ps", {}}, c{"count", {}, true}, m{"model", {}};
            for (std::size_t i = 0; i < h.size(); ++i)
            {
                if (!vis[i])
                    continue;
                t.values.push_back(h.bin_center(i));
                c.values.push_back(static_cast<double>(h.counts[i]));
                m.values.push_back(gamma2_comb_fit(*doc.comb_fit, h.bin_center_s(i)));
            }
            std::ostringstream os;
            io::write_table(os, "overlay", {}, {t, c, m});
            emit(exp_out, os.str(), out);
        }
    }
    catch (const IoError &e)
    {
        return fail(e.kind(), io_failure, e.what());
    }
    catch (const ParseError &e)
    {
        return fail(e.kind(), parse_failure, e.what());
    }
    catch (const UnitError &e)
    {
        return fail(e.kind(), unit_failure, e.what());
    }
    catch (const PeriodicityError &e)
    {
        const auto &d = e.diagnostics();
        return fail(e.kind(), no_periodicity,
                    std::string(e.what()) + " (best_lag_ps=" + io::format_double(d.best_lag_ps) +
                        " prominence=" + io::format_double(d.prominence) + " span_ps=" +
                        io::format_double(d.span_ps) + " visible_bins=" + std::to_string(d.visible_bins) + ")");
    }
    catch (const InvalidInput &e)
    {
        return fail(e.kind(), invalid, e.what());
    }
    catch (const std::exception &e)
    {
        return fail("internal", internal, e.what());
    }
    return ok;
}

} // namespace opocomb::cli
