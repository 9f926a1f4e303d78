#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vblast/curves.hpp"
#include "vblast/monte_carlo.hpp"

namespace vblast {

/// Unified row-oriented curve for CSV emission. CI/trials fields are empty
/// for analytic curves.
struct CsvCurve {
    std::vector<double> abscissa;
    std::string abscissa_unit;  // "x" or "gamma0_db"
    std::vector<double> value;
    std::vector<std::optional<double>> ci_low;
    std::vector<std::optional<double>> ci_high;
    std::vector<std::optional<uint64_t>> trials;
    std::string label;
};

CsvCurve to_csv_curve(const AnalyticCurve& c);
CsvCurve to_csv_curve(const EstimatedCurve& c);

/// CSV contract: header `abscissa,abscissa_unit,value,ci_low,ci_high,trials,label`;
/// probabilities with 10 significant digits, dB with 4 decimals.
void write_curve_csv(const std::filesystem::path& path, const CsvCurve& curve);
CsvCurve read_curve_csv(const std::filesystem::path& path);

/// Offset table between two curve files at given probability levels
/// (levels outside the overlap are flagged, not errors).
struct CompareRow {
    double level;
    std::optional<double> offset_db;
};
std::vector<CompareRow> compare_curve_files(const std::filesystem::path& a,
                                            const std::filesystem::path& b,
                                            const std::vector<double>& levels);

struct RunOverrides {
    std::optional<uint64_t> trials;
    std::optional<int> noise_trials;
    std::optional<uint64_t> seed;
    std::optional<int> threads;
    bool full_budgets = false;
};

struct OutputBundle {
    std::vector<std::string> files;   // relative to out_dir
    std::string manifest_file;
    int exit_code = 0;                // 0 ok, 2 config error, 3 formula-integrity
};

/// Reproduces one of the paper-figure bundles (fig2..fig6): analytic curves,
/// MC curves (trials > 0), and a comparison table of horizontal dB offsets.
OutputBundle run_figure(const std::string& figure_id, const RunOverrides& overrides,
                        const std::filesystem::path& out_dir);

/// Runs an experiment described by a flat sectioned key=value config file.
OutputBundle run_custom(const std::filesystem::path& config_file,
                        const RunOverrides& overrides,
                        const std::filesystem::path& out_dir);

/// Re-runs the command recorded in a manifest into out_dir; CSV bodies must
/// reproduce byte-identically.
OutputBundle run_from_manifest(const std::filesystem::path& manifest_file,
                               const std::filesystem::path& out_dir);

/// Parsed form of the sectioned key=value config format. Unknown keys are
/// rejected with their section-qualified path.
struct CustomRunSpec {
    ExperimentConfig config;
    std::string kind;          // "outage" | "error"
    std::string label_prefix;
    bool with_analytic = true;
};
CustomRunSpec parse_config_file(const std::filesystem::path& path);

}  // namespace vblast
