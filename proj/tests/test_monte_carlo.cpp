#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "vblast/analytic.hpp"
#include "vblast/monte_carlo.hpp"
#include "vblast/rng.hpp"

using namespace vblast;

namespace {

ExperimentConfig outage_cfg(int n, int m, std::vector<double> grid, uint64_t trials,
                            uint64_t seed) {
    ExperimentConfig c;
    c.dims = SystemDims{n, m};
    c.x_grid = std::move(grid);
    c.channel_trials = trials;
    c.seed = seed;
    return c;
}

bool ci_overlap(const EstimatedCurve& a, const EstimatedCurve& b, size_t i) {
    return a.ci_low[i] <= b.ci_high[i] && b.ci_low[i] <= a.ci_high[i];
}

}  // namespace

TEST_CASE("determinism: estimates are bit-identical across thread counts") {
    ExperimentConfig c = outage_cfg(3, 3, {0.05, 0.2, 1.0}, 20000, 77);
    c.ordering = OrderingStrategy::Optimal;
    const auto one = estimate_step_outage(c);
    c.threads = 3;
    const auto three = estimate_step_outage(c);
    REQUIRE(one.size() == three.size());
    for (size_t s = 0; s < one.size(); ++s)
        for (size_t i = 0; i < one[s].value.size(); ++i) {
            CHECK(one[s].value[i] == three[s].value[i]);  // exact equality
            CHECK(one[s].ci_low[i] == three[s].ci_low[i]);
        }

    ExperimentConfig e = c;
    e.x_grid.clear();
    e.snr_grid_db = {5.0, 15.0};
    e.channel_trials = 2000;
    e.noise_trials_per_channel = 20;
    e.threads = 1;
    const auto r1 = estimate_error_rates(e);
    e.threads = 4;
    const auto r4 = estimate_error_rates(e);
    for (size_t i = 0; i < r1.bler.value.size(); ++i) {
        CHECK(r1.bler.value[i] == r4.bler.value[i]);
        CHECK(r1.tber.value[i] == r4.tber.value[i]);
    }
}

TEST_CASE("unordered per-step outage follows F_MRC^(n-m+i)") {
    ExperimentConfig c = outage_cfg(4, 4, {0.1, 0.5, 1.5, 4.0}, 30000, 2024);
    c.ordering = OrderingStrategy::None;
    const auto curves = estimate_step_outage(c);
    REQUIRE(curves.size() == 4);
    for (int step = 0; step < 4; ++step) {
        for (size_t i = 0; i < c.x_grid.size(); ++i) {
            const double expect = oracles::gammp(step + 1, c.x_grid[i]);  // n-m+i
            CHECK(curves[step].ci_low[i] <= expect);
            CHECK(expect <= curves[step].ci_high[i]);
        }
    }
}

TEST_CASE("ordered step outage stays inside the analytic sandwich (small run)") {
    ExperimentConfig c = outage_cfg(3, 3, {0.1, 0.4, 1.2}, 30000, 5);
    const auto curves = estimate_step_outage(c);
    const SystemDims dims{3, 3};
    for (size_t i = 0; i < c.x_grid.size(); ++i) {
        const double upper = f1_bound_closedform(dims, c.x_grid[i]);
        const double lower = f1_lower_exchangeable(dims, c.x_grid[i]);
        CHECK(curves[0].ci_low[i] <= upper);
        CHECK(curves[0].ci_high[i] >= lower);
    }
}

TEST_CASE("semi-analytic and symbol-level BLER agree within CIs") {
    ExperimentConfig c;
    c.dims = SystemDims{3, 3};
    c.snr_grid_db = {5.0, 10.0, 15.0};
    c.channel_trials = 4000;
    c.noise_trials_per_channel = 100;
    c.seed = 31;
    const auto sym = estimate_error_rates(c);
    c.estimator = EstimatorKind::SemiAnalytic;
    const auto semi = estimate_error_rates(c);
    for (size_t i = 0; i < c.snr_grid_db.size(); ++i)
        CHECK(ci_overlap(sym.bler, semi.bler, i));
    CHECK(semi.tber.grid.empty());  // refused: propagation unmodeled
}

TEST_CASE("TBER bounds: BLER/m <= TBER <= BLER at every grid point") {
    ExperimentConfig c;
    c.dims = SystemDims{3, 3};
    c.snr_grid_db = {0.0, 7.5, 15.0};
    c.channel_trials = 3000;
    c.noise_trials_per_channel = 50;
    c.seed = 17;
    const auto r = estimate_error_rates(c);
    for (size_t i = 0; i < c.snr_grid_db.size(); ++i) {
        CHECK(r.tber.value[i] <= r.bler.value[i] + 1e-12);
        CHECK(r.tber.value[i] >= r.bler.value[i] / 3 - 1e-12);
    }
}

TEST_CASE("m = 1 degenerate system reduces to MRC average BER") {
    ExperimentConfig c;
    c.dims = SystemDims{3, 1};
    c.snr_grid_db = {0.0, 5.0};
    c.channel_trials = 8000;
    c.noise_trials_per_channel = 50;
    c.seed = 23;
    const auto r = estimate_error_rates(c);
    for (size_t i = 0; i < c.snr_grid_db.size(); ++i) {
        const double expect =
            mrc_avg_ber(3, db_to_linear(c.snr_grid_db[i]), Modulation::BpskCoherent);
        CHECK(r.bler.ci_low[i] <= expect);
        CHECK(expect <= r.bler.ci_high[i]);
    }
}

TEST_CASE("Wilson interval covers a known Bernoulli p in >= 93% of repetitions") {
    const double p = 0.07;
    const int reps = 1000, draws = 400;
    int covered = 0;
    for (int r = 0; r < reps; ++r) {
        RandomStream rng(4242, r);
        uint64_t hits = 0;
        for (int i = 0; i < draws; ++i) hits += rng.next_uniform() <= p;
        const auto ci = wilson_interval(hits, draws);
        covered += (ci.low <= p && p <= ci.high);
    }
    CHECK(covered >= 930);
}

TEST_CASE("ordering gain report on a short run: offsets have the right ordering") {
    const auto grid = log_grid(1e-3, 3.0, 17);
    const auto rep = estimate_ordering_gain(SystemDims{3, 3}, grid, 60000, 99, 1, {3e-2});
    REQUIRE(!rep.offsets.empty());
    const auto& off = rep.offsets[0];
    CHECK(off.optimal_vs_unordered_db > 0.0);
    CHECK(off.suboptimal_vs_unordered_db > 0.0);
    CHECK(off.optimal_vs_suboptimal_db >= -0.2);
    CHECK(off.optimal_vs_unordered_db ==
          doctest::Approx(off.suboptimal_vs_unordered_db + off.optimal_vs_suboptimal_db)
              .epsilon(1e-9));
    // optimal curve sits below unordered everywhere (better outage)
    for (size_t i = 0; i < grid.size(); ++i)
        CHECK(rep.f1_optimal.value[i] <= rep.f1_unordered.value[i] + 1e-12);
}

TEST_CASE("CI-target early stop uses fewer trials") {
    ExperimentConfig c = outage_cfg(2, 2, {0.5, 1.0}, 400000, 7);
    c.ci_rel_target = 0.05;  // loose target, reached quickly
    const auto curves = estimate_step_outage(c);
    CHECK(curves[0].trials_used[0] < 400000);
    // fixed budget otherwise
    c.ci_rel_target = 0.0;
    const auto full = estimate_step_outage(c);
    CHECK(full[0].trials_used[0] == 400000);
}

TEST_CASE("config validation names the offending field") {
    ExperimentConfig c;
    c.dims = SystemDims{2, 3};  // n < m
    c.x_grid = {0.1};
    CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("dims"), ConfigError);

    ExperimentConfig e;
    e.dims = SystemDims{3, 3};
    e.snr_grid_db = {10.0, 5.0};  // not increasing
    CHECK_THROWS_WITH_AS(e.validate(), doctest::Contains("snr_grid_db"), ConfigError);

    ExperimentConfig f;
    f.dims = SystemDims{3, 3};
    f.snr_grid_db = {5.0};
    f.receiver = ReceiverKind::LinearMmse;
    f.estimator = EstimatorKind::SemiAnalytic;
    CHECK_THROWS_AS(f.validate(), ConfigError);

    ExperimentConfig g;
    g.dims = SystemDims{3, 3};
    g.snr_grid_db = {5.0};
    g.mod = Modulation::BfskNoncoherentOrthogonal;
    CHECK_THROWS_WITH_AS(g.validate(), doctest::Contains("semi-analytic"), ConfigError);
    g.estimator = EstimatorKind::SemiAnalytic;
    CHECK_NOTHROW(g.validate());
}

TEST_CASE("BFSK semi-analytic BLER matches the closed-form eq11 trend") {
    ExperimentConfig c;
    c.dims = SystemDims{2, 2};
    c.snr_grid_db = {10.0};
    c.channel_trials = 50000;
    c.estimator = EstimatorKind::SemiAnalytic;
    c.mod = Modulation::BfskNoncoherentOrthogonal;
    c.seed = 3;
    const auto r = estimate_error_rates(c);
    // first-step dominance puts the estimate near eq13 at 10 dB
    const double eq13 = bler_approx(SystemDims{2, 2}, db_to_linear(10.0),
                                    Modulation::BfskNoncoherentOrthogonal,
                                    BlerVariant::Eq13);
    CHECK(r.bler.value[0] == doctest::Approx(eq13).epsilon(0.25));
}

TEST_CASE("dblast aggregate error statistics match plain V-BLAST (small run)") {
    ExperimentConfig c;
    c.dims = SystemDims{3, 3};
    c.snr_grid_db = {5.0, 10.0};
    c.channel_trials = 4000;
    c.noise_trials_per_channel = 50;
    c.seed = 12;
    const auto plain = estimate_error_rates(c);
    c.receiver = ReceiverKind::DblastCycled;
    c.seed = 13;  // independent stream; equivalence is distributional
    const auto cycled = estimate_error_rates(c);
    for (size_t i = 0; i < c.snr_grid_db.size(); ++i) {
        CHECK(ci_overlap(plain.bler, cycled.bler, i));
        CHECK(ci_overlap(plain.tber, cycled.tber, i));
    }
}
