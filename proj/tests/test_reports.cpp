#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "vblast/report.hpp"

using namespace vblast;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("vblast_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_file(const fs::path& p, const std::string& body) {
    std::ofstream os(p);
    os << body;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    return std::string(std::istreambuf_iterator<char>(is), {});
}

}  // namespace

TEST_CASE("curve CSV round trip and format contract") {
    const fs::path dir = temp_dir("csv");
    CsvCurve c;
    c.abscissa = {0.01, 0.1, 1.0};
    c.abscissa_unit = "x";
    c.value = {0.0012345678901, 0.123456789012, 0.9};
    c.ci_low = {std::nullopt, 0.11, 0.88};
    c.ci_high = {std::nullopt, 0.13, 0.92};
    c.trials = {std::nullopt, uint64_t{1000}, uint64_t{1000}};
    c.label = "demo";
    write_curve_csv(dir / "c.csv", c);

    const std::string body = slurp(dir / "c.csv");
    CHECK(body.rfind("abscissa,abscissa_unit,value,ci_low,ci_high,trials,label\n", 0) == 0);
    CHECK(body.find("0.001234567890") != std::string::npos);  // 10 significant digits
    CHECK(body.find(",,") != std::string::npos);              // empty CI cell

    const CsvCurve back = read_curve_csv(dir / "c.csv");
    REQUIRE(back.abscissa.size() == 3);
    CHECK(back.label == "demo");
    CHECK(back.value[1] == doctest::Approx(0.123456789).epsilon(1e-9));
    CHECK(!back.ci_low[0].has_value());
    CHECK(back.trials[2].has_value());
}

TEST_CASE("compare: identical curves give 0 dB, factor-2 shift gives 3.01 dB") {
    const fs::path dir = temp_dir("cmp");
    CsvCurve a;
    a.abscissa_unit = "x";
    a.label = "a";
    for (int i = 0; i <= 20; ++i) {
        const double x = std::pow(10.0, -3.0 + i * 0.2);
        a.abscissa.push_back(x);
        a.value.push_back(std::min(1.0, x));  // F ~ x
        a.ci_low.push_back(std::nullopt);
        a.ci_high.push_back(std::nullopt);
        a.trials.push_back(std::nullopt);
    }
    CsvCurve b = a;
    b.label = "b";
    for (auto& x : b.abscissa) x *= 2.0;  // shifted right by factor 2
    write_curve_csv(dir / "a.csv", a);
    write_curve_csv(dir / "b.csv", b);

    const auto self_rows = compare_curve_files(dir / "a.csv", dir / "a.csv", {1e-2, 1e-1});
    for (const auto& r : self_rows) {
        REQUIRE(r.offset_db.has_value());
        CHECK(*r.offset_db == doctest::Approx(0.0).epsilon(1e-9));
    }
    const auto rows = compare_curve_files(dir / "b.csv", dir / "a.csv", {1e-2, 1e-1, 0.9});
    REQUIRE(rows.size() == 3);
    CHECK(*rows[0].offset_db == doctest::Approx(3.0103).epsilon(1e-3));
    CHECK(*rows[1].offset_db == doctest::Approx(3.0103).epsilon(1e-3));
    CHECK(!rows[2].offset_db.has_value());  // 0.9 outside curve a's overlap? flagged if so

    // fully disjoint ranges are an error
    CsvCurve lowb = a;
    for (auto& v : lowb.value) v *= 1e-6;
    write_curve_csv(dir / "low.csv", lowb);
    CHECK_THROWS(compare_curve_files(dir / "a.csv", dir / "low.csv", {0.5}));
}

TEST_CASE("config parsing: defaults, validation paths, unknown keys") {
    const fs::path dir = temp_dir("cfg");
    write_file(dir / "min.ini", "[dims]\nn = 3\nm = 2\n");
    const CustomRunSpec spec = parse_config_file(dir / "min.ini");
    CHECK(spec.kind == "outage");
    CHECK(spec.config.dims.n_rx == 3);
    CHECK(spec.config.channel_trials == 100000);  // default applied
    CHECK(!spec.config.x_grid.empty());

    write_file(dir / "bad_dims.ini", "[dims]\nn = 2\nm = 3\n");
    CHECK_THROWS_WITH_AS(parse_config_file(dir / "bad_dims.ini"),
                         doctest::Contains("dims"), ConfigError);

    write_file(dir / "unknown.ini", "[dims]\nn = 3\nm = 2\n[mc]\nbogus = 1\n");
    CHECK_THROWS_WITH_AS(parse_config_file(dir / "unknown.ini"),
                         doctest::Contains("mc.bogus"), ConfigError);

    write_file(dir / "badval.ini", "[dims]\nn = three\nm = 2\n");
    CHECK_THROWS_WITH_AS(parse_config_file(dir / "badval.ini"),
                         doctest::Contains("dims.n"), ConfigError);
}

TEST_CASE("run_custom: determinism and analytic-only bundles") {
    const fs::path dir = temp_dir("runs");
    write_file(dir / "exp.ini",
               "[dims]\nn = 3\nm = 3\n[run]\nkind = outage\nordering = optimal\n"
               "[grid]\nx_start_db = -15\nx_stop_db = 0\npoints = 5\n"
               "[mc]\nchannel_trials = 5000\nseed = 44\n");
    RunOverrides over;
    const auto b1 = run_custom(dir / "exp.ini", over, dir / "out1");
    const auto b2 = run_custom(dir / "exp.ini", over, dir / "out2");
    CHECK(b1.exit_code == 0);
    REQUIRE(b1.files == b2.files);
    for (const auto& f : b1.files)
        CHECK(slurp(dir / "out1" / f) == slurp(dir / "out2" / f));  // byte-identical bodies

    // trials = 0 override: analytic-only bundle, no MC files
    RunOverrides none;
    none.trials = 0;
    const auto b3 = run_custom(dir / "exp.ini", none, dir / "out3");
    for (const auto& f : b3.files) CHECK(f.find("mc_") == std::string::npos);
    CHECK(!b3.files.empty());
}

TEST_CASE("manifest replay reproduces identical CSV bodies") {
    const fs::path dir = temp_dir("replay");
    write_file(dir / "exp.ini",
               "[dims]\nn = 2\nm = 2\n[run]\nkind = error\n"
               "[grid]\nsnr_db = 5,10\n"
               "[mc]\nchannel_trials = 1500\nnoise_trials_per_channel = 20\nseed = 9\n");
    RunOverrides over;
    const auto b1 = run_custom(dir / "exp.ini", over, dir / "out1");
    const auto b2 = run_from_manifest(dir / "out1" / "manifest.json", dir / "out2");
    REQUIRE(b1.files == b2.files);
    for (const auto& f : b1.files)
        CHECK(slurp(dir / "out1" / f) == slurp(dir / "out2" / f));
}

TEST_CASE("figure bundles: fig4 content contract on a tiny budget") {
    const fs::path dir = temp_dir("fig4");
    RunOverrides over;
    over.trials = 4000;
    over.seed = 5;
    const auto bundle = run_figure("fig4", over, dir);
    CHECK(bundle.exit_code == 0);
    // per size: eq7 curve, eq9 curve, MC estimate
    for (const std::string tag : {"2x2", "3x3", "4x4", "5x5"}) {
        CHECK(std::count_if(bundle.files.begin(), bundle.files.end(),
                            [&](const std::string& f) {
                                return f.find(tag) != std::string::npos;
                            }) == 3);
    }
    CHECK(std::find(bundle.files.begin(), bundle.files.end(),
                    std::string("fig4_comparisons.json")) != bundle.files.end());
    // emitted probability columns are in [0,1] and grids strictly increasing
    for (const auto& f : bundle.files) {
        if (f.find(".csv") == std::string::npos) continue;
        const CsvCurve c = read_curve_csv(dir / f);
        for (size_t i = 0; i < c.value.size(); ++i) {
            CHECK(c.value[i] >= 0.0);
            CHECK(c.value[i] <= 1.0);
            if (i) CHECK(c.abscissa[i] > c.abscissa[i - 1]);
        }
        // MC curves always carry CIs
        if (f.find("mc_") != std::string::npos)
            for (size_t i = 0; i < c.value.size(); ++i) {
                CHECK(c.ci_low[i].has_value());
                CHECK(c.ci_high[i].has_value());
            }
    }
    CHECK_THROWS_AS(run_figure("fig9", over, dir), ConfigError);
}

TEST_CASE("fig6 analytic-only covers m in {2,3,4,5,10}") {
    const fs::path dir = temp_dir("fig6");
    RunOverrides over;
    over.trials = 0;  // analytic only
    const auto bundle = run_figure("fig6", over, dir);
    for (const std::string tag : {"2x2", "3x3", "4x4", "5x5", "10x10"}) {
        CHECK(std::any_of(bundle.files.begin(), bundle.files.end(),
                          [&](const std::string& f) {
                              return f.find("fig6_" + tag) != std::string::npos;
                          }));
    }
}
