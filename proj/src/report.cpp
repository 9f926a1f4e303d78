#include "vblast/report.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "json.hpp"

#include "vblast/analytic.hpp"
#include "vblast/coeff_table.hpp"

namespace vblast {
namespace {

using nlohmann::json;

std::string fmt_prob(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

std::string fmt_db(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

std::string fmt_abscissa(double v, const std::string& unit) {
    return unit == "gamma0_db" ? fmt_db(v) : fmt_prob(v);
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

CsvCurve to_csv_curve(const AnalyticCurve& c) {
    CsvCurve out;
    out.abscissa = c.grid;
    out.abscissa_unit = c.abscissa_unit;
    out.value = c.value;
    out.ci_low.assign(c.grid.size(), std::nullopt);
    out.ci_high.assign(c.grid.size(), std::nullopt);
    out.trials.assign(c.grid.size(), std::nullopt);
    out.label = c.label;
    return out;
}

CsvCurve to_csv_curve(const EstimatedCurve& c) {
    CsvCurve out;
    out.abscissa = c.grid;
    out.abscissa_unit = c.abscissa_unit;
    out.value = c.value;
    for (size_t i = 0; i < c.grid.size(); ++i) {
        out.ci_low.emplace_back(c.ci_low[i]);
        out.ci_high.emplace_back(c.ci_high[i]);
        out.trials.emplace_back(c.trials_used[i]);
    }
    out.label = c.label;
    return out;
}

void write_curve_csv(const std::filesystem::path& path, const CsvCurve& curve) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << "abscissa,abscissa_unit,value,ci_low,ci_high,trials,label\n";
    for (size_t i = 0; i < curve.abscissa.size(); ++i) {
        os << fmt_abscissa(curve.abscissa[i], curve.abscissa_unit) << ','
           << curve.abscissa_unit << ',' << fmt_prob(curve.value[i]) << ',';
        if (curve.ci_low[i]) os << fmt_prob(*curve.ci_low[i]);
        os << ',';
        if (curve.ci_high[i]) os << fmt_prob(*curve.ci_high[i]);
        os << ',';
        if (curve.trials[i]) os << *curve.trials[i];
        os << ',' << curve.label << '\n';
    }
}

CsvCurve read_curve_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line))
        throw std::runtime_error(path.string() + ": empty file");
    CsvCurve out;
    while (std::getline(is, line)) {
        if (trim(line).empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 7)
            throw std::runtime_error(path.string() + ": bad CSV row: " + line);
        out.abscissa.push_back(std::stod(f[0]));
        out.abscissa_unit = f[1];
        out.value.push_back(std::stod(f[2]));
        out.ci_low.push_back(f[3].empty() ? std::nullopt
                                          : std::optional<double>(std::stod(f[3])));
        out.ci_high.push_back(f[4].empty() ? std::nullopt
                                           : std::optional<double>(std::stod(f[4])));
        out.trials.push_back(f[5].empty()
                                 ? std::nullopt
                                 : std::optional<uint64_t>(std::stoull(f[5])));
        out.label = f[6];
    }
    return out;
}

std::vector<CompareRow> compare_curve_files(const std::filesystem::path& a,
                                            const std::filesystem::path& b,
                                            const std::vector<double>& levels) {
    const CsvCurve ca = read_curve_csv(a);
    const CsvCurve cb = read_curve_csv(b);
    std::vector<CompareRow> rows;
    for (double level : levels) {
        const auto da = crossing_db(ca.abscissa, ca.value, ca.abscissa_unit, level);
        const auto db = crossing_db(cb.abscissa, cb.value, cb.abscissa_unit, level);
        rows.push_back({level, (da && db) ? std::optional<double>(*da - *db)
                                          : std::nullopt});
    }
    if (std::all_of(rows.begin(), rows.end(),
                    [](const CompareRow& r) { return !r.offset_db.has_value(); }))
        throw std::runtime_error("compare: curves have no overlapping level range");
    return rows;
}

// ---------------------------------------------------------------------------
// config files
// ---------------------------------------------------------------------------

namespace {

struct FlatConfig {
    std::map<std::string, std::string> kv;  // "section.key" -> value

    const std::string* find(const std::string& path) const {
        auto it = kv.find(path);
        return it == kv.end() ? nullptr : &it->second;
    }
};

FlatConfig read_flat_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config file not found: " + path.string());
    FlatConfig cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[' && t.back() == ']') {
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": expected key = value");
        const std::string key = trim(t.substr(0, eq));
        const std::string val = trim(t.substr(eq + 1));
        const std::string full = section.empty() ? key : section + "." + key;
        if (cfg.kv.count(full))
            throw ConfigError("config: duplicate key " + full);
        cfg.kv[full] = val;
    }
    return cfg;
}

uint64_t parse_u64(const std::string& v, const std::string& path) {
    try {
        size_t pos = 0;
        const uint64_t out = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return out;
    } catch (...) {
        throw ConfigError(path + ": expected unsigned integer, got '" + v + "'");
    }
}

double parse_f64(const std::string& v, const std::string& path) {
    try {
        size_t pos = 0;
        const double out = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("");
        return out;
    } catch (...) {
        throw ConfigError(path + ": expected number, got '" + v + "'");
    }
}

}  // namespace

CustomRunSpec parse_config_file(const std::filesystem::path& path) {
    const FlatConfig cfg = read_flat_config(path);
    CustomRunSpec spec;
    ExperimentConfig& c = spec.config;

    static const std::vector<std::string> known = {
        "dims.n", "dims.m", "run.kind", "run.ordering", "run.receiver",
        "run.modulation", "run.estimator", "grid.x_start_db", "grid.x_stop_db",
        "grid.points", "grid.snr_db", "mc.channel_trials",
        "mc.noise_trials_per_channel", "mc.seed", "mc.threads", "mc.ci_rel_target",
        "output.label_prefix", "output.with_analytic"};
    for (const auto& [k, v] : cfg.kv)
        if (std::find(known.begin(), known.end(), k) == known.end())
            throw ConfigError("config: unknown key " + k);

    const std::string* v = cfg.find("dims.n");
    if (!v) throw ConfigError("dims.n: required");
    c.dims.n_rx = static_cast<int>(parse_u64(*v, "dims.n"));
    v = cfg.find("dims.m");
    if (!v) throw ConfigError("dims.m: required");
    c.dims.m_tx = static_cast<int>(parse_u64(*v, "dims.m"));

    spec.kind = "outage";
    if ((v = cfg.find("run.kind"))) {
        if (*v != "outage" && *v != "error")
            throw ConfigError("run.kind: must be 'outage' or 'error'");
        spec.kind = *v;
    }
    if ((v = cfg.find("run.ordering"))) {
        if (*v == "optimal") c.ordering = OrderingStrategy::Optimal;
        else if (*v == "suboptimal") c.ordering = OrderingStrategy::Suboptimal;
        else if (*v == "none") c.ordering = OrderingStrategy::None;
        else throw ConfigError("run.ordering: must be optimal|suboptimal|none");
    }
    if ((v = cfg.find("run.receiver"))) {
        if (*v == "zf-sic") c.receiver = ReceiverKind::ZfSic;
        else if (*v == "linear-zf") c.receiver = ReceiverKind::LinearZf;
        else if (*v == "linear-mmse") c.receiver = ReceiverKind::LinearMmse;
        else if (*v == "dblast") c.receiver = ReceiverKind::DblastCycled;
        else throw ConfigError("run.receiver: must be zf-sic|linear-zf|linear-mmse|dblast");
    }
    if ((v = cfg.find("run.modulation"))) {
        if (*v == "bpsk") c.mod = Modulation::BpskCoherent;
        else if (*v == "bfsk") c.mod = Modulation::BfskNoncoherentOrthogonal;
        else throw ConfigError("run.modulation: must be bpsk|bfsk");
    }
    if ((v = cfg.find("run.estimator"))) {
        if (*v == "symbol-level") c.estimator = EstimatorKind::SymbolLevel;
        else if (*v == "semi-analytic") c.estimator = EstimatorKind::SemiAnalytic;
        else throw ConfigError("run.estimator: must be symbol-level|semi-analytic");
    }

    double x_start_db = -25.0, x_stop_db = 5.0;
    int points = 13;
    if ((v = cfg.find("grid.x_start_db"))) x_start_db = parse_f64(*v, "grid.x_start_db");
    if ((v = cfg.find("grid.x_stop_db"))) x_stop_db = parse_f64(*v, "grid.x_stop_db");
    if ((v = cfg.find("grid.points"))) points = static_cast<int>(parse_u64(*v, "grid.points"));
    if (spec.kind == "outage") {
        if (!(x_stop_db > x_start_db) || points < 2)
            throw ConfigError("grid: need x_start_db < x_stop_db and points >= 2");
        c.x_grid = log_grid(db_to_linear(x_start_db), db_to_linear(x_stop_db), points);
    } else {
        if ((v = cfg.find("grid.snr_db"))) {
            for (const auto& tok : split(*v, ',')) {
                const std::string tt = trim(tok);
                if (!tt.empty()) c.snr_grid_db.push_back(parse_f64(tt, "grid.snr_db"));
            }
        } else {
            c.snr_grid_db = linear_grid(0.0, 25.0, 11);
        }
    }

    c.channel_trials = 100000;
    if ((v = cfg.find("mc.channel_trials")))
        c.channel_trials = parse_u64(*v, "mc.channel_trials");
    if ((v = cfg.find("mc.noise_trials_per_channel")))
        c.noise_trials_per_channel =
            static_cast<int>(parse_u64(*v, "mc.noise_trials_per_channel"));
    if ((v = cfg.find("mc.seed"))) c.seed = parse_u64(*v, "mc.seed");
    if ((v = cfg.find("mc.threads"))) c.threads = static_cast<int>(parse_u64(*v, "mc.threads"));
    if ((v = cfg.find("mc.ci_rel_target"))) c.ci_rel_target = parse_f64(*v, "mc.ci_rel_target");
    if ((v = cfg.find("output.label_prefix"))) spec.label_prefix = *v;
    if ((v = cfg.find("output.with_analytic"))) spec.with_analytic = *v == "true";

    try {
        c.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return spec;
}

// ---------------------------------------------------------------------------
// bundles
// ---------------------------------------------------------------------------

namespace {

class BundleWriter {
  public:
    BundleWriter(std::filesystem::path out_dir, json command)
        : out_dir_(std::move(out_dir)), started_(std::chrono::steady_clock::now()) {
        std::filesystem::create_directories(out_dir_);
        manifest_["command"] = std::move(command);
        manifest_["formula_versions"] = {
            {"b1_closedform", "exponential-polynomial table v1 (d_p uses 1/p!)"},
            {"quadrature", "adaptive gauss-kronrod 7-15"},
        };
        clear_formula_integrity_events();
    }

    void add(const CsvCurve& curve, const std::string& filename) {
        write_curve_csv(out_dir_ / filename, curve);
        files_.push_back(filename);
    }

    void add_table(const json& rows, const std::string& filename) {
        std::ofstream os(out_dir_ / filename);
        os << rows.dump(2) << '\n';
        files_.push_back(filename);
    }

    OutputBundle finish() {
        OutputBundle out;
        out.files = files_;
        manifest_["outputs"] = files_;
        const auto events = formula_integrity_events();
        manifest_["discrepancy_log"] = events;
        const auto wall =
            std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - started_)
                .count();
        manifest_["wall_clock_ms"] = wall;
        out.exit_code = events.empty() ? 0 : 3;
        std::ofstream os(out_dir_ / "manifest.json");
        os << manifest_.dump(2) << '\n';
        out.manifest_file = "manifest.json";
        return out;
    }

    json& manifest() { return manifest_; }

  private:
    std::filesystem::path out_dir_;
    std::vector<std::string> files_;
    json manifest_;
    std::chrono::steady_clock::time_point started_;
};

AnalyticCurve sample_curve(const std::vector<double>& grid, const std::string& unit,
                           std::string label, const std::function<double(double)>& f) {
    AnalyticCurve c;
    c.grid = grid;
    c.abscissa_unit = unit;
    c.label = std::move(label);
    c.value.reserve(grid.size());
    for (double g : grid) c.value.push_back(f(g));
    return c;
}

ExperimentConfig outage_config(SystemDims dims, OrderingStrategy ordering,
                               std::vector<double> x_grid, uint64_t trials,
                               uint64_t seed, int threads) {
    ExperimentConfig c;
    c.dims = dims;
    c.ordering = ordering;
    c.x_grid = std::move(x_grid);
    c.channel_trials = trials;
    c.seed = seed;
    c.threads = threads;
    return c;
}

OutputBundle run_custom_spec(const CustomRunSpec& spec, const RunOverrides& over,
                             const std::filesystem::path& out_dir, json command);

}  // namespace

OutputBundle run_custom(const std::filesystem::path& config_file,
                        const RunOverrides& overrides,
                        const std::filesystem::path& out_dir) {
    const CustomRunSpec spec = parse_config_file(config_file);
    json command = {{"kind", "custom"},
                    {"config_file", std::filesystem::absolute(config_file).string()}};
    return run_custom_spec(spec, overrides, out_dir, std::move(command));
}

namespace {

OutputBundle run_custom_spec(const CustomRunSpec& spec, const RunOverrides& over,
                             const std::filesystem::path& out_dir, json command) {
    ExperimentConfig cfg = spec.config;
    if (over.trials) cfg.channel_trials = *over.trials;
    if (over.noise_trials) cfg.noise_trials_per_channel = *over.noise_trials;
    if (over.seed) cfg.seed = *over.seed;
    if (over.threads) cfg.threads = *over.threads;
    cfg.validate();

    command["resolved"] = {
        {"n", cfg.dims.n_rx},
        {"m", cfg.dims.m_tx},
        {"kind", spec.kind},
        {"seed", cfg.seed},
        {"channel_trials", cfg.channel_trials},
        {"noise_trials_per_channel", cfg.noise_trials_per_channel},
        {"threads", cfg.threads},
    };
    BundleWriter bundle(out_dir, command);
    bundle.manifest()["seed"] = cfg.seed;

    const std::string prefix =
        spec.label_prefix.empty()
            ? (std::to_string(cfg.dims.n_rx) + "x" + std::to_string(cfg.dims.m_tx))
            : spec.label_prefix;

    if (spec.kind == "outage") {
        if (cfg.channel_trials > 0) {
            const auto curves = estimate_step_outage(cfg);
            for (size_t s = 0; s < curves.size(); ++s)
                bundle.add(to_csv_curve(curves[s]),
                           prefix + "_mc_step" + std::to_string(s + 1) + ".csv");
        }
        if (spec.with_analytic && cfg.dims.m_tx >= 2) {
            const SystemDims dims = cfg.dims;
            bundle.add(to_csv_curve(sample_curve(
                           cfg.x_grid, "x", "b1_closedform",
                           [&](double x) { return f1_bound_closedform(dims, x); })),
                       prefix + "_b1_closedform.csv");
            bundle.add(to_csv_curve(sample_curve(
                           cfg.x_grid, "x", "f1_unordered",
                           [&](double x) { return f1_unordered(dims, x); })),
                       prefix + "_f1_unordered.csv");
            bundle.add(to_csv_curve(sample_curve(
                           cfg.x_grid, "x", "f1_lower_exchangeable",
                           [&](double x) { return f1_lower_exchangeable(dims, x); })),
                       prefix + "_f1_lower.csv");
            bundle.add(to_csv_curve(sample_curve(
                           cfg.x_grid, "x", "f1_approx_eq9",
                           [&](double x) { return f1_approx_highsnr(dims, x); })),
                       prefix + "_f1_approx_eq9.csv");
        }
    } else {
        if (cfg.channel_trials > 0) {
            const ErrorRateCurves curves = estimate_error_rates(cfg);
            bundle.add(to_csv_curve(curves.bler), prefix + "_mc_bler.csv");
            if (!curves.tber.grid.empty())
                bundle.add(to_csv_curve(curves.tber), prefix + "_mc_tber.csv");
            for (size_t s = 0; s < curves.per_step_ber.size(); ++s)
                bundle.add(to_csv_curve(curves.per_step_ber[s]),
                           prefix + "_mc_step" + std::to_string(s + 1) + "_ber.csv");
        }
        if (spec.with_analytic) {
            const SystemDims dims = cfg.dims;
            const Modulation mod = cfg.mod;
            for (auto [variant, name] :
                 {std::pair{BlerVariant::Eq11, "bler_eq11"},
                  std::pair{BlerVariant::Eq12, "bler_eq12"},
                  std::pair{BlerVariant::Eq13, "bler_eq13"}}) {
                bundle.add(
                    to_csv_curve(sample_curve(cfg.snr_grid_db, "gamma0_db", name,
                                              [&, variant = variant](double db) {
                                                  return bler_approx(
                                                      dims, db_to_linear(db), mod,
                                                      variant);
                                              })),
                    prefix + "_" + name + ".csv");
            }
            bundle.add(to_csv_curve(sample_curve(
                           cfg.snr_grid_db, "gamma0_db", "tber_eq16",
                           [&](double db) {
                               return tber_approx(dims, db_to_linear(db), mod).value;
                           })),
                       prefix + "_tber_eq16.csv");
        }
    }
    return bundle.finish();
}

}  // namespace

// ---------------------------------------------------------------------------
// figures
// ---------------------------------------------------------------------------

namespace {

struct FigureBudget {
    uint64_t outage_trials;
    uint64_t channels;
    int noise_trials;
};

FigureBudget figure_budget(bool full) {
    // Paper protocol: 5e6 outage trials (Figs. 2-4); 1e6 channels x 100 noise
    // draws (Figs. 5-6). Desk-scale defaults are 10x smaller.
    if (full) return {5'000'000, 1'000'000, 100};
    return {500'000, 100'000, 100};
}

json offsets_to_json(const std::string& a, const std::string& b,
                     const std::vector<OffsetRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows) {
        json row = {{"curve_a", a}, {"curve_b", b}, {"level", r.level}};
        if (r.offset_db)
            row["offset_db"] = *r.offset_db;
        else
            row["offset_db"] = nullptr;
        arr.push_back(row);
    }
    return arr;
}

AnalyticCurve estimated_as_analytic(const EstimatedCurve& c) {
    return AnalyticCurve{c.grid, c.value, c.label, c.abscissa_unit};
}

}  // namespace

OutputBundle run_figure(const std::string& figure_id, const RunOverrides& over,
                        const std::filesystem::path& out_dir) {
    const uint64_t seed = over.seed.value_or(20240901);
    const int threads = over.threads.value_or(1);
    FigureBudget budget = figure_budget(over.full_budgets);
    if (over.trials) {
        budget.outage_trials = *over.trials;
        budget.channels = *over.trials;
    }
    if (over.noise_trials) budget.noise_trials = *over.noise_trials;

    json command = {{"kind", "figure"},
                    {"figure_id", figure_id},
                    {"seed", seed},
                    {"threads", threads},
                    {"outage_trials", budget.outage_trials},
                    {"channels", budget.channels},
                    {"noise_trials", budget.noise_trials}};
    BundleWriter bundle(out_dir, command);
    bundle.manifest()["seed"] = seed;

    const std::vector<double> levels = {1e-1, 1e-2, 1e-3};
    json comparisons = json::array();

    const auto add_outage_figure = [&](const SystemDims& dims,
                                       const std::vector<double>& x_grid,
                                       const std::string& tag) {
        std::vector<EstimatedCurve> mc;
        if (budget.outage_trials > 0) {
            const ExperimentConfig cfg = outage_config(
                dims, OrderingStrategy::Optimal, x_grid, budget.outage_trials, seed, threads);
            mc = estimate_step_outage(cfg);
            for (size_t s = 0; s < mc.size(); ++s)
                bundle.add(to_csv_curve(mc[s]),
                           tag + "_mc_step" + std::to_string(s + 1) + ".csv");
        }
        const auto b1 = sample_curve(x_grid, "x", "b1_closedform", [&](double x) {
            return f1_bound_closedform(dims, x);
        });
        bundle.add(to_csv_curve(b1), tag + "_b1_closedform.csv");
        if (!mc.empty())
            comparisons.push_back(offsets_to_json(
                mc[0].label, b1.label,
                curve_offsets_db(estimated_as_analytic(mc[0]), b1, levels)));
        return mc;
    };

    if (figure_id == "fig2") {
        const SystemDims dims{3, 3};
        const auto x_grid = log_grid(db_to_linear(-25.0), db_to_linear(5.0), 13);
        const auto mc = add_outage_figure(dims, x_grid, "fig2_3x3");
        const auto f2 = sample_curve(x_grid, "x", "f2_3x2_form", [](double x) {
            return step_outage_3x3(2, x).value;
        });
        const auto mrc2 = sample_curve(x_grid, "x", "mrc2_outage",
                                       [](double x) { return mrc_outage(2, x); });
        const auto f3 = sample_curve(x_grid, "x", "f3_form", [](double x) {
            return step_outage_3x3(3, x).value;
        });
        bundle.add(to_csv_curve(f2), "fig2_f2_form.csv");
        bundle.add(to_csv_curve(mrc2), "fig2_mrc2.csv");
        bundle.add(to_csv_curve(f3), "fig2_f3_form.csv");
        if (!mc.empty()) {
            comparisons.push_back(offsets_to_json(
                mc[1].label, mrc2.label,
                curve_offsets_db(estimated_as_analytic(mc[1]), mrc2, levels)));
            comparisons.push_back(offsets_to_json(
                mc[2].label, f3.label,
                curve_offsets_db(estimated_as_analytic(mc[2]), f3, levels)));
        }
    } else if (figure_id == "fig3") {
        const SystemDims dims{4, 4};
        const auto x_grid = log_grid(db_to_linear(-25.0), db_to_linear(5.0), 13);
        const auto mc = add_outage_figure(dims, x_grid, "fig3_4x4");
        const auto b1_43 = sample_curve(x_grid, "x", "b1_4x3_step2_estimate",
                                        [](double x) {
                                            return f1_bound_closedform(SystemDims{4, 3}, x);
                                        });
        const auto b1_42 = sample_curve(x_grid, "x", "b1_4x2_step3_estimate",
                                        [](double x) {
                                            return f1_bound_closedform(SystemDims{4, 2}, x);
                                        });
        const auto mrc3 = sample_curve(x_grid, "x", "mrc3_outage",
                                       [](double x) { return mrc_outage(3, x); });
        bundle.add(to_csv_curve(b1_43), "fig3_b1_4x3.csv");
        bundle.add(to_csv_curve(b1_42), "fig3_b1_4x2.csv");
        bundle.add(to_csv_curve(mrc3), "fig3_mrc3.csv");
        if (!mc.empty())
            comparisons.push_back(offsets_to_json(
                mc[2].label, mrc3.label,
                curve_offsets_db(estimated_as_analytic(mc[2]), mrc3, levels)));
    } else if (figure_id == "fig4") {
        const auto x_grid = log_grid(db_to_linear(-30.0), db_to_linear(5.0), 15);
        for (int m : {2, 3, 4, 5}) {
            const SystemDims dims{m, m};
            const std::string tag = "fig4_" + std::to_string(m) + "x" + std::to_string(m);
            const auto eq7 = sample_curve(x_grid, "x", "bound_eq7", [&](double x) {
                return f1_bound_asymptote(dims, x);
            });
            const auto eq9 = sample_curve(x_grid, "x", "approx_eq9", [&](double x) {
                return f1_approx_highsnr(dims, x);
            });
            bundle.add(to_csv_curve(eq7), tag + "_eq7.csv");
            bundle.add(to_csv_curve(eq9), tag + "_eq9.csv");
            if (budget.outage_trials > 0) {
                auto rep = estimate_ordering_gain(dims, x_grid, budget.outage_trials,
                                                  seed, threads, {1e-2});
                bundle.add(to_csv_curve(rep.f1_optimal), tag + "_mc_f1.csv");
                comparisons.push_back(offsets_to_json(
                    rep.f1_optimal.label, eq9.label,
                    curve_offsets_db(estimated_as_analytic(rep.f1_optimal), eq9,
                                     levels)));
            }
        }
    } else if (figure_id == "fig5") {
        const auto snr = linear_grid(0.0, 25.0, 11);
        for (SystemDims dims : {SystemDims{3, 3}, SystemDims{4, 3}}) {
            const std::string tag = "fig5_" + std::to_string(dims.n_rx) + "x" +
                                    std::to_string(dims.m_tx);
            for (auto [variant, name] :
                 {std::pair{BlerVariant::Eq11, "bler_eq11"},
                  std::pair{BlerVariant::Eq12, "bler_eq12"},
                  std::pair{BlerVariant::Eq13, "bler_eq13"}}) {
                bundle.add(to_csv_curve(sample_curve(
                               snr, "gamma0_db", name,
                               [&, variant = variant](double db) {
                                   return bler_approx(dims, db_to_linear(db),
                                                      Modulation::BpskCoherent, variant);
                               })),
                           tag + "_" + name + ".csv");
            }
            if (budget.channels > 0) {
                ExperimentConfig cfg;
                cfg.dims = dims;
                cfg.snr_grid_db = snr;
                cfg.channel_trials = budget.channels;
                cfg.noise_trials_per_channel = budget.noise_trials;
                cfg.seed = seed;
                cfg.threads = threads;
                const auto curves = estimate_error_rates(cfg);
                bundle.add(to_csv_curve(curves.bler), tag + "_mc_bler.csv");
                bundle.add(to_csv_curve(curves.per_step_ber[0]), tag + "_mc_step1_ber.csv");
            }
        }
    } else if (figure_id == "fig6") {
        const auto snr = linear_grid(0.0, 30.0, 13);
        for (int m : {2, 3, 4, 5, 10}) {
            const SystemDims dims{m, m};
            const std::string tag = "fig6_" + std::to_string(m) + "x" + std::to_string(m);
            bundle.add(to_csv_curve(sample_curve(
                           snr, "gamma0_db", "bler_eq11",
                           [&](double db) {
                               return bler_approx(dims, db_to_linear(db),
                                                  Modulation::BpskCoherent,
                                                  BlerVariant::Eq11);
                           })),
                       tag + "_bler_eq11.csv");
            bundle.add(to_csv_curve(sample_curve(
                           snr, "gamma0_db", "bler_eq12",
                           [&](double db) {
                               return bler_approx(dims, db_to_linear(db),
                                                  Modulation::BpskCoherent,
                                                  BlerVariant::Eq12);
                           })),
                       tag + "_bler_eq12.csv");
            if (budget.channels > 0) {
                ExperimentConfig cfg;
                cfg.dims = dims;
                cfg.snr_grid_db = snr;
                cfg.channel_trials = budget.channels;
                cfg.noise_trials_per_channel = budget.noise_trials;
                cfg.seed = seed;
                cfg.threads = threads;
                const auto curves = estimate_error_rates(cfg);
                bundle.add(to_csv_curve(curves.bler), tag + "_mc_bler.csv");
            }
        }
    } else {
        throw ConfigError("figure: unknown id '" + figure_id +
                          "' (expected fig2..fig6)");
    }

    bundle.add_table(comparisons, figure_id + "_comparisons.json");
    return bundle.finish();
}

OutputBundle run_from_manifest(const std::filesystem::path& manifest_file,
                               const std::filesystem::path& out_dir) {
    std::ifstream is(manifest_file);
    if (!is) throw ConfigError("manifest not found: " + manifest_file.string());
    json manifest;
    is >> manifest;
    if (!manifest.contains("command"))
        throw ConfigError("manifest: missing command record");
    const json& cmd = manifest["command"];
    const std::string kind = cmd.value("kind", "");
    RunOverrides over;
    if (kind == "figure") {
        over.seed = cmd.value("seed", uint64_t{20240901});
        over.trials = cmd.value("outage_trials", uint64_t{0});
        over.noise_trials = cmd.value("noise_trials", 100);
        over.threads = cmd.value("threads", 1);
        return run_figure(cmd.value("figure_id", ""), over, out_dir);
    }
    if (kind == "custom") {
        const json& res = cmd.value("resolved", json::object());
        over.seed = res.value("seed", uint64_t{1});
        over.trials = res.value("channel_trials", uint64_t{1});
        over.noise_trials = res.value("noise_trials_per_channel", 100);
        over.threads = res.value("threads", 1);
        return run_custom(cmd.value("config_file", ""), over, out_dir);
    }
    throw ConfigError("manifest: unknown command kind '" + kind + "'");
}

}  // namespace vblast
