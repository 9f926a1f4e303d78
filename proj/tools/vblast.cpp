#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "vblast/analytic.hpp"
#include "vblast/coeff_table.hpp"
#include "vblast/monte_carlo.hpp"
#include "vblast/report.hpp"

using namespace vblast;

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitFormulaIntegrity = 3;

OrderingStrategy parse_ordering(const std::string& s) {
    if (s == "optimal") return OrderingStrategy::Optimal;
    if (s == "suboptimal") return OrderingStrategy::Suboptimal;
    if (s == "none") return OrderingStrategy::None;
    throw ConfigError("ordering: must be optimal|suboptimal|none");
}

ReceiverKind parse_receiver(const std::string& s) {
    if (s == "zf-sic") return ReceiverKind::ZfSic;
    if (s == "linear-zf") return ReceiverKind::LinearZf;
    if (s == "linear-mmse") return ReceiverKind::LinearMmse;
    if (s == "dblast") return ReceiverKind::DblastCycled;
    throw ConfigError("receiver: must be zf-sic|linear-zf|linear-mmse|dblast");
}

int report_exit(const OutputBundle& bundle, const std::filesystem::path& out_dir) {
    std::cout << "wrote " << bundle.files.size() << " file(s) + manifest to "
              << out_dir.string() << "\n";
    if (bundle.exit_code == kExitFormulaIntegrity)
        std::cerr << "warning: formula-integrity discrepancies recorded in the "
                     "manifest; quadrature values shipped\n";
    return bundle.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ordered V-BLAST outage/error-rate analysis: closed forms, "
                 "bounds, and Monte-Carlo validation over i.i.d. Rayleigh fading"};
    app.require_subcommand(1);

    uint64_t seed = 1;
    uint64_t trials = 0;  // 0 = per-command default
    int threads = 1;
    std::string out_dir = "out";
    app.add_option("--seed", seed, "RNG seed (per-trial streams derive from it)");
    app.add_option("--trials", trials, "channel trial budget override");
    app.add_option("--threads", threads, "worker threads");
    app.add_option("--out-dir", out_dir, "output directory");

    // simulate-outage
    auto* sim_out = app.add_subcommand("simulate-outage",
                                       "per-step outage probabilities via Monte-Carlo");
    std::string so_config;
    int so_n = 3, so_m = 3, so_points = 13;
    std::string so_ordering = "optimal";
    double so_start_db = -25.0, so_stop_db = 5.0;
    sim_out->add_option("--config", so_config, "config file (flags override it)");
    sim_out->add_option("--n", so_n, "receive antennas");
    sim_out->add_option("--m", so_m, "transmit antennas");
    sim_out->add_option("--ordering", so_ordering, "optimal|suboptimal|none");
    sim_out->add_option("--x-start-db", so_start_db, "normalized-SNR grid start (dB)");
    sim_out->add_option("--x-stop-db", so_stop_db, "normalized-SNR grid stop (dB)");
    sim_out->add_option("--points", so_points, "grid points");

    // simulate-error
    auto* sim_err = app.add_subcommand("simulate-error",
                                       "BLER/TBER via Monte-Carlo");
    std::string se_config;
    int se_n = 3, se_m = 3, se_noise = 100;
    std::string se_receiver = "zf-sic", se_ordering = "optimal", se_mod = "bpsk";
    std::string se_estimator = "symbol-level";
    std::vector<double> se_snr_db;
    sim_err->add_option("--config", se_config, "config file (flags override it)");
    sim_err->add_option("--n", se_n, "receive antennas");
    sim_err->add_option("--m", se_m, "transmit antennas");
    sim_err->add_option("--receiver", se_receiver, "zf-sic|linear-zf|linear-mmse|dblast");
    sim_err->add_option("--ordering", se_ordering, "optimal|suboptimal|none");
    sim_err->add_option("--mod", se_mod, "bpsk|bfsk");
    sim_err->add_option("--estimator", se_estimator, "symbol-level|semi-analytic");
    sim_err->add_option("--noise-trials", se_noise, "noise draws per channel");
    sim_err->add_option("--snr-db", se_snr_db, "gamma0 grid in dB")->expected(-1);

    // analytic
    auto* analytic = app.add_subcommand("analytic", "closed-form curve bundle");
    int an_n = 3, an_m = 3, an_points = 13;
    double an_start_db = -25.0, an_stop_db = 5.0;
    std::vector<double> an_snr_db;
    analytic->add_option("--n", an_n, "receive antennas");
    analytic->add_option("--m", an_m, "transmit antennas");
    analytic->add_option("--x-start-db", an_start_db, "outage grid start (dB)");
    analytic->add_option("--x-stop-db", an_stop_db, "outage grid stop (dB)");
    analytic->add_option("--points", an_points, "outage grid points");
    analytic->add_option("--snr-db", an_snr_db,
                         "also emit BLER/TBER approximations on this gamma0 grid (dB)")
        ->expected(-1);

    // figure
    auto* figure = app.add_subcommand("figure", "reproduce a paper-figure bundle");
    std::string fig_id;
    bool fig_full = false;
    int fig_noise = 0;
    figure->add_option("id", fig_id, "fig2|fig3|fig4|fig5|fig6")->required();
    figure->add_flag("--full-budgets", fig_full, "paper-scale trial budgets");
    figure->add_option("--noise-trials", fig_noise, "noise draws per channel override");

    // compare
    auto* compare = app.add_subcommand("compare", "horizontal dB offsets between curves");
    std::string cmp_a, cmp_b;
    std::vector<double> cmp_levels = {1e-1, 1e-2, 1e-3};
    compare->add_option("curve_a", cmp_a, "CSV file")->required();
    compare->add_option("curve_b", cmp_b, "CSV file")->required();
    compare->add_option("--levels", cmp_levels, "probability levels")->expected(-1);

    // coeff-table
    auto* coeff = app.add_subcommand("coeff-table", "closed-form bound coefficients");
    int ct_n = 3, ct_m = 3;
    coeff->add_option("n", ct_n, "receive antennas")->required();
    coeff->add_option("m", ct_m, "transmit antennas")->required();

    // run / run-manifest
    auto* run = app.add_subcommand("run", "run a config-file experiment");
    std::string run_config;
    run->add_option("config", run_config, "config file")->required();

    auto* rerun = app.add_subcommand("run-manifest", "replay a recorded manifest");
    std::string rerun_manifest;
    rerun->add_option("manifest", rerun_manifest, "manifest.json from a previous run")
        ->required();

    CLI11_PARSE(app, argc, argv);

    try {
        const std::filesystem::path out = out_dir;
        RunOverrides over;
        if (trials > 0) over.trials = trials;
        if (app.count("--seed")) over.seed = seed;
        over.threads = threads;

        if (sim_out->parsed()) {
            CustomRunSpec spec;
            if (!so_config.empty()) {
                spec = parse_config_file(so_config);
            } else {
                spec.kind = "outage";
                spec.config.dims = SystemDims{so_n, so_m};
                spec.config.ordering = parse_ordering(so_ordering);
                spec.config.x_grid = log_grid(db_to_linear(so_start_db),
                                              db_to_linear(so_stop_db), so_points);
                spec.config.channel_trials = 100000;
                spec.config.seed = seed;
                spec.config.threads = threads;
            }
            if (sim_out->count("--n")) spec.config.dims.n_rx = so_n;
            if (sim_out->count("--m")) spec.config.dims.m_tx = so_m;
            if (sim_out->count("--ordering"))
                spec.config.ordering = parse_ordering(so_ordering);
            // write a config snapshot next to outputs so the manifest can replay
            std::filesystem::create_directories(out);
            const auto snap = out / "resolved_config.ini";
            {
                std::ofstream os(snap);
                os << "[dims]\nn = " << spec.config.dims.n_rx
                   << "\nm = " << spec.config.dims.m_tx << "\n[run]\nkind = outage\n"
                   << "ordering = "
                   << (spec.config.ordering == OrderingStrategy::Optimal ? "optimal"
                       : spec.config.ordering == OrderingStrategy::Suboptimal
                           ? "suboptimal"
                           : "none")
                   << "\n[grid]\nx_start_db = " << so_start_db
                   << "\nx_stop_db = " << so_stop_db << "\npoints = " << so_points
                   << "\n[mc]\nchannel_trials = " << spec.config.channel_trials
                   << "\nseed = " << spec.config.seed << "\n";
            }
            return report_exit(run_custom(snap, over, out), out);
        }
        if (sim_err->parsed()) {
            std::filesystem::create_directories(out);
            const auto snap = out / "resolved_config.ini";
            if (!se_config.empty()) {
                std::filesystem::copy_file(se_config, snap,
                                           std::filesystem::copy_options::overwrite_existing);
            } else {
                std::ofstream os(snap);
                os << "[dims]\nn = " << se_n << "\nm = " << se_m
                   << "\n[run]\nkind = error\nreceiver = " << se_receiver
                   << "\nordering = " << se_ordering << "\nmodulation = " << se_mod
                   << "\nestimator = " << se_estimator << "\n[grid]\nsnr_db = ";
                if (se_snr_db.empty()) {
                    os << "0,2.5,5,7.5,10,12.5,15,17.5,20,22.5,25";
                } else {
                    for (size_t i = 0; i < se_snr_db.size(); ++i)
                        os << (i ? "," : "") << se_snr_db[i];
                }
                os << "\n[mc]\nchannel_trials = 100000\nnoise_trials_per_channel = "
                   << se_noise << "\nseed = " << seed << "\n";
            }
            return report_exit(run_custom(snap, over, out), out);
        }
        if (analytic->parsed()) {
            // analytic-only bundle reuses the custom runner with trials = 0
            std::filesystem::create_directories(out);
            const auto snap = out / "resolved_config.ini";
            {
                std::ofstream os(snap);
                os << "[dims]\nn = " << an_n << "\nm = " << an_m << "\n[run]\nkind = ";
                if (!an_snr_db.empty()) {
                    os << "error\n[grid]\nsnr_db = ";
                    for (size_t i = 0; i < an_snr_db.size(); ++i)
                        os << (i ? "," : "") << an_snr_db[i];
                    os << "\n";
                } else {
                    os << "outage\n[grid]\nx_start_db = " << an_start_db
                       << "\nx_stop_db = " << an_stop_db << "\npoints = " << an_points
                       << "\n";
                }
                os << "[mc]\nchannel_trials = 1\n";
            }
            RunOverrides an_over = over;
            an_over.trials = 0;  // no MC files in an analytic bundle
            return report_exit(run_custom(snap, an_over, out), out);
        }
        if (figure->parsed()) {
            over.full_budgets = fig_full;
            if (fig_noise > 0) over.noise_trials = fig_noise;
            return report_exit(run_figure(fig_id, over, out), out);
        }
        if (compare->parsed()) {
            const auto rows = compare_curve_files(cmp_a, cmp_b, cmp_levels);
            std::printf("level,offset_db\n");
            for (const auto& r : rows) {
                if (r.offset_db)
                    std::printf("%.3g,%.4f\n", r.level, *r.offset_db);
                else
                    std::printf("%.3g,outside_overlap\n", r.level);
            }
            return 0;
        }
        if (coeff->parsed()) {
            const SystemDims dims{ct_n, ct_m};
            const CoefficientTable& t = coefficient_table(dims);
            std::printf("# coefficient table for n=%d, m=%d\n", ct_n, ct_m);
            for (size_t l = 0; l < t.alpha.size(); ++l)
                std::printf("alpha[%zu] = %.17g\n", l, t.alpha[l]);
            for (size_t p = 0; p < t.b.size(); ++p)
                std::printf("b[%zu] = %.17g\n", p, t.b[p]);
            for (size_t p = 0; p < t.d.size(); ++p)
                std::printf("d[%zu] = %.17g\n", p, t.d[p]);
            for (const auto& [key, v] : t.a)
                std::printf("a[p=%d, l=%d] = %.17g\n", key.first, key.second, v);
            for (size_t l = 0; l < t.poly.size(); ++l) {
                std::printf("P_%zu(x), coefficient of e^(-%zu x):", l, l);
                for (const auto& c : t.poly[l])
                    std::printf(" %.17Lg", c);
                std::printf("\n");
            }
            std::printf("certification: %s (%s)\n", t.certified ? "ok" : "FAILED",
                        t.certification_note.c_str());
            return t.certified ? 0 : kExitFormulaIntegrity;
        }
        if (run->parsed()) return report_exit(run_custom(run_config, over, out), out);
        if (rerun->parsed())
            return report_exit(run_from_manifest(rerun_manifest, out), out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
