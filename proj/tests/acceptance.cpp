// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. The four continuum preset runs are computed once and shared by
// criteria 5 and 6.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include "qwalk/continuum.hpp"
#include "qwalk/entanglement.hpp"
#include "qwalk/io.hpp"
#include "qwalk/oracle.hpp"
#include "qwalk/ring.hpp"

using namespace qwalk;
using std::numbers::pi;

namespace {

int failures = 0;

double now_seconds() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point t0 = clock::now();
    return std::chrono::duration<double>(clock::now() - t0).count();
}

void report(int id, const std::string& label, bool pass, const std::string& detail,
            double seconds) {
    std::printf("[%s] criterion %d: %s (%s) [%.1fs]\n", pass ? "PASS" : "FAIL", id,
                label.c_str(), detail.c_str(), seconds);
    std::fflush(stdout);
    if (!pass) ++failures;
}

void run_criterion(int id, const std::string& label,
                   const std::function<std::pair<bool, std::string>()>& body) {
    const double start = now_seconds();
    bool pass = false;
    std::string detail;
    try {
        std::tie(pass, detail) = body();
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    report(id, label, pass, detail, now_seconds() - start);
}

std::vector<double> grid_512() {
    std::vector<double> g(512);
    for (int i = 0; i < 512; ++i) g[i] = i * (2.0 * pi) / 511.0;
    return g;
}

Partition half_ring(int n) {
    std::set<int> alice;
    for (int s = 1; s <= n / 2; ++s) alice.insert(s);
    return Partition(n, alice);
}

double pipeline_ep(int n, Statistics stats, std::pair<int, int> initial,
                   const std::set<int>& alice, double gt) {
    const RingConfig cfg{n, 1.0, stats};
    return entanglement_of_particles(evolve(cfg, initial, gt), Partition(n, alice));
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2e", v);
    return buf;
}

// ---------------------------------------------------------------------------
// criteria 1-4, 7 (lattice side)
// ---------------------------------------------------------------------------

std::pair<bool, std::string> criterion1() {
    using oracle::ClosedFormCase;
    double worst = 0.0;
    for (double gt : grid_512()) {
        const struct {
            ClosedFormCase cf;
            Statistics stats;
            std::pair<int, int> initial;
            std::set<int> alice;
        } cases[] = {
            {ClosedFormCase::F12_A12, Statistics::Fermion, {1, 2}, {1, 2}},
            {ClosedFormCase::F13_A12, Statistics::Fermion, {1, 3}, {1, 2}},
            {ClosedFormCase::F23_A12, Statistics::Fermion, {2, 3}, {1, 2}},
            {ClosedFormCase::F13_A13_Fermion, Statistics::Fermion, {1, 3}, {1, 3}},
            {ClosedFormCase::F13_A13_Boson, Statistics::Boson, {1, 3}, {1, 3}},
            {ClosedFormCase::BosonDoubleOcc, Statistics::Boson, {2, 2}, {1, 2}},
        };
        for (const auto& c : cases) {
            const double numeric = pipeline_ep(4, c.stats, c.initial, c.alice, gt);
            worst = std::max(worst, std::abs(numeric - oracle::closed_form_ep(c.cf, gt)));
        }
    }
    return {worst < 1e-9, "max |numeric - closed form| = " + fmt(worst)};
}

std::pair<bool, std::string> criterion2() {
    double worst = 0.0;
    for (double gt : grid_512()) {
        for (const auto& initial : {std::pair{1, 2}, std::pair{1, 3}, std::pair{2, 3}}) {
            const double f = pipeline_ep(4, Statistics::Fermion, initial, {1, 2}, gt);
            const double b = pipeline_ep(4, Statistics::Boson, initial, {1, 2}, gt);
            worst = std::max(worst, std::abs(f - b));
        }
    }
    return {worst < 1e-10, "max fermion/boson gap = " + fmt(worst)};
}

std::pair<bool, std::string> criterion3() {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> time(0.0, 8.0);
    double worst_amp = 0.0;

    for (int n : {4, 6, 8}) {
        for (Statistics stats : {Statistics::Fermion, Statistics::Boson}) {
            const RingConfig cfg{n, 1.0, stats};
            const PairBasis basis(n, stats);
            for (int rep = 0; rep < 16; ++rep) {
                const double gt = time(rng);
                const Eigen::MatrixXcd dense =
                    oracle::dense_two_particle_propagator(cfg, gt);
                const Eigen::MatrixXcd u = single_particle_propagator(cfg, gt);
                for (int col = 0; col < basis.size(); ++col) {
                    auto [j, r] = basis.pair(col);
                    for (int row = 0; row < basis.size(); ++row) {
                        auto [k, s] = basis.pair(row);
                        const cdouble mu = stats == Statistics::Fermion
                                               ? pair_amplitude_fermion(u, k, s, j, r)
                                               : pair_amplitude_boson(u, k, s, j, r);
                        worst_amp = std::max(worst_amp, std::abs(mu - dense(row, col)));
                    }
                }
            }
        }
    }
    if (worst_amp >= 1e-10)
        return {false, "pair amplitudes vs oracle: " + fmt(worst_amp)};

    // Eq.-13 density matrix vs first-quantized partial trace. Fermionic draws
    // use interval partitions (where the constructions provably coincide);
    // bosonic draws use arbitrary subsets.
    double worst_rho = 0.0;
    int done = 0;
    std::uniform_int_distribution<int> pick_n(0, 2);
    const int sizes[] = {4, 6, 8};
    while (done < 20) {
        const int n = sizes[pick_n(rng)];
        const Statistics stats = (rng() & 1) ? Statistics::Fermion : Statistics::Boson;
        const RingConfig cfg{n, 1.0, stats};
        std::uniform_int_distribution<int> site(1, n);
        int j = site(rng), r = site(rng);
        if (stats == Statistics::Fermion && j == r) r = j % n + 1;
        std::set<int> alice;
        if (stats == Statistics::Fermion) {
            std::uniform_int_distribution<int> lo(1, n - 1);
            const int a = lo(rng);
            std::uniform_int_distribution<int> len(1, n - a);
            int b = a + len(rng) - 1;
            if (a == 1 && b == n) b = n - 1;
            for (int s = a; s <= b; ++s) alice.insert(s);
        } else {
            for (int s = 1; s <= n; ++s)
                if (rng() & 1) alice.insert(s);
            if (alice.empty() || static_cast<int>(alice.size()) == n) continue;
        }
        const PairState state =
            evolve(cfg, {std::min(j, r), std::max(j, r)}, time(rng));
        const Partition part(n, alice);
        const auto engine = reduced_density_matrix(state, part);
        const auto dense = oracle::partial_trace(state, part);
        if (engine.has_value() != dense.has_value())
            return {false, "sector-empty disagreement between engine and oracle"};
        if (!engine) continue;
        worst_rho =
            std::max(worst_rho, (engine->mat - dense->mat).cwiseAbs().maxCoeff());
        ++done;
    }
    return {worst_amp < 1e-10 && worst_rho < 1e-10,
            "amplitudes " + fmt(worst_amp) + ", rho_A " + fmt(worst_rho)};
}

std::pair<bool, std::string> criterion4() {
    const int sizes[] = {50, 70, 100};
    double tau_f[3] = {0, 0, 0}, tau_b[3] = {0, 0, 0};
    std::ostringstream detail;

    for (int i = 0; i < 3; ++i) {
        const int n = sizes[i];
        const Partition part = half_ring(n);
        const std::pair<int, int> initial{n / 2, n / 2 + 1};
        std::vector<double> grid;
        for (double gt = 0.0; gt <= 0.45 * n + 10.0; gt += 0.25) grid.push_back(gt);

        const RingConfig ferm{n, 1.0, Statistics::Fermion};
        const RingConfig bos{n, 1.0, Statistics::Boson};
        const auto sf = ep_time_series(ferm, initial, part, grid);
        const auto sb = ep_time_series(bos, initial, part, grid);

        // (a) no correlation at t = 0
        if (!(sf[0].ep < 1e-12 && sb[0].ep < 1e-12))
            return {false, "E_P(0) nonzero at N=" + std::to_string(n)};
        // (b) bosons never fall below fermions
        for (std::size_t t = 0; t < grid.size(); ++t)
            if (sb[t].ep < sf[t].ep - 1e-9)
                return {false, "boson E_P < fermion E_P at N=" + std::to_string(n) +
                                   ", gt=" + fmt(grid[t])};
        // (c) saturation-interval estimates
        const SaturationEstimate ef = estimate_saturation(sf, n);
        const SaturationEstimate eb = estimate_saturation(sb, n);
        if (!ef.found || !eb.found)
            return {false, "saturation estimator failed at N=" + std::to_string(n)};
        tau_f[i] = ef.gamma_tau;
        tau_b[i] = eb.gamma_tau;

        // (d) antibunching / bunching fingerprints at gt = 5
        const Eigen::MatrixXd gf = correlation_map(evolve(ferm, initial, 5.0));
        if (gf.diagonal().cwiseAbs().maxCoeff() != 0.0)
            return {false, "fermion Gamma diagonal nonzero at N=" + std::to_string(n)};
        const Eigen::MatrixXd gb = correlation_map(evolve(bos, initial, 5.0));
        if (!(gb.diagonal().sum() > 0.05))
            return {false, "boson bunching weight " + fmt(gb.diagonal().sum()) +
                               " <= 0.05 at N=" + std::to_string(n)};
    }

    const double r100_50_f = tau_f[2] / tau_f[0], r100_70_f = tau_f[2] / tau_f[1];
    const double r100_50_b = tau_b[2] / tau_b[0], r100_70_b = tau_b[2] / tau_b[1];
    detail << "gamma_tau fermion {" << tau_f[0] << ", " << tau_f[1] << ", " << tau_f[2]
           << "}, ratios " << fmt(r100_50_f) << "/" << fmt(r100_70_f) << "; boson ratios "
           << fmt(r100_50_b) << "/" << fmt(r100_70_b);
    const bool ok = r100_50_f > 1.7 && r100_50_f < 2.3 && r100_70_f > 1.2 &&
                    r100_70_f < 1.7 && r100_50_b > 1.7 && r100_50_b < 2.3 &&
                    r100_70_b > 1.2 && r100_70_b < 1.7;
    return {ok, detail.str()};
}

std::pair<bool, std::string> criterion7() {
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "qwalk_acceptance_fig1";
    std::ostringstream devnull;
    std::string csv[2];
    for (int pass = 0; pass < 2; ++pass) {
        const fs::path dir = base / (pass == 0 ? "a" : "b");
        fs::remove_all(dir);
        if (io::run_preset("fig1", devnull, dir.string()) != 0)
            return {false, "preset fig1 failed: " + devnull.str()};
        std::ifstream in(dir / "fig1.csv", std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        csv[pass] = buf.str();
    }
    fs::remove_all(base);
    if (csv[0].empty()) return {false, "empty fig1.csv"};
    return {csv[0] == csv[1],
            "two runs, " + std::to_string(csv[0].size()) + " bytes each"};
}

// ---------------------------------------------------------------------------
// criteria 5-6 (continuum side, shared preset runs)
// ---------------------------------------------------------------------------

struct ContinuumRun {
    std::vector<double> t_fs, ep, p1;
    double max_norm_drift = 0.0;
    double max_exchange = 0.0;
    double reversibility = 0.0;
};

ContinuumRun drive_preset(ContinuumScenario scenario, Statistics stats,
                          double output_every_fs) {
    const ContinuumConfig cfg = [&] {
        ContinuumConfig c = continuum_preset(scenario, stats);
        c.statistics = stats;
        return c;
    }();
    ContinuumState state = initial_state(cfg);
    const CrankNicolson solver(cfg);

    ContinuumRun run;
    {   // one step forward, one reversed, against the frozen initial field
        ContinuumState probe = state;
        solver.step(probe);
        solver.step_reversed(probe);
        for (std::size_t i = 0; i < probe.psi.size(); ++i)
            run.reversibility =
                std::max(run.reversibility, std::abs(probe.psi[i] - state.psi[i]));
    }

    auto observe = [&]() {
        run.max_norm_drift = std::max(run.max_norm_drift,
                                      std::abs(field_norm_sq(state, cfg) - 1.0));
        run.max_exchange = std::max(run.max_exchange, exchange_residual(state));
        const EpLinear r = ep_linear(state, cfg);
        run.t_fs.push_back(state.t_fs(cfg));
        run.ep.push_back(r.ep);
        run.p1.push_back(r.p1);
    };

    const long total = std::llround(cfg.t_max_fs / cfg.dt_fs);
    const long every = std::llround(output_every_fs / cfg.dt_fs);
    observe();
    for (long s = 1; s <= total; ++s) {
        solver.step(state);
        if (s % every == 0 || s == total) observe();
    }
    return run;
}

std::pair<bool, std::string> criterion5(const ContinuumRun* runs) {
    double drift = 0.0, exch = 0.0, rev = 0.0;
    for (int i = 0; i < 4; ++i) {
        drift = std::max(drift, runs[i].max_norm_drift);
        exch = std::max(exch, runs[i].max_exchange);
        rev = std::max(rev, runs[i].reversibility);
    }

    // free-Gaussian variance law over 1 ps (single-particle subcase)
    ContinuumConfig cfg;
    cfg.statistics = Statistics::Boson;
    cfg.sigma_nm = 5.0;
    cfg.x0_nm = 0.0;
    cfg.half_length_nm = 100.0;
    cfg.dx_nm = 0.5;
    cfg.dt_fs = 0.5;
    cfg.t_max_fs = 1000.0;
    ContinuumState state = initial_state(cfg);
    const CrankNicolson solver(cfg);
    const long total = std::llround(cfg.t_max_fs / cfg.dt_fs);
    for (long s = 1; s <= total; ++s) solver.step(state);
    const double t_nat = cfg.t_max_fs / kTimeUnitFs;
    const double spread = cfg.dcoef() * t_nat / (cfg.sigma_nm * cfg.sigma_nm);
    const double predicted = cfg.sigma_nm * cfg.sigma_nm * (1.0 + spread * spread);
    const double measured = marginal_moments(state, cfg).variance;
    const double var_err = std::abs(measured - predicted) / predicted;

    const bool ok = drift < 1e-8 && exch < 1e-8 && rev < 1e-9 && var_err < 0.01;
    return {ok, "norm drift " + fmt(drift) + ", exchange " + fmt(exch) +
                    ", reversibility " + fmt(rev) + ", variance err " + fmt(var_err)};
}

std::pair<bool, std::string> criterion6(const ContinuumRun* runs) {
    const ContinuumRun& cf = runs[0];   // comoving fermion
    const ContinuumRun& cb = runs[1];   // comoving boson
    const ContinuumRun& xf = runs[2];   // collision fermion
    const ContinuumRun& xb = runs[3];   // collision boson

    // (a) co-moving: starts at zero, eventually non-decreasing, boson plateau on top
    if (!(cf.ep.front() < 1e-6 && cb.ep.front() < 1e-6))
        return {false, "comoving E_P(0) = " + fmt(cf.ep.front())};
    for (const ContinuumRun* run : {&cf, &cb})
        for (std::size_t i = 1; i < run->ep.size(); ++i)
            if (run->t_fs[i] > 200.0 && run->ep[i] < run->ep[i - 1] - 1e-9)
                return {false, "comoving E_P decreases at t=" + fmt(run->t_fs[i])};
    const double margin = cb.ep.back() - cf.ep.back();
    if (!(margin > 1e-4))
        return {false, "boson plateau does not exceed fermion plateau: margin " +
                           fmt(margin)};

    // (b) collision: one dominant maximum near the ballistic meeting time,
    // then decay to below 5% of the peak
    const ContinuumConfig ballistic = continuum_preset(ContinuumScenario::Collision,
                                                       Statistics::Fermion);
    const double t_meet_fs =
        ballistic.x0_nm / (2.0 * ballistic.dcoef() * std::abs(ballistic.k1())) *
        kTimeUnitFs;
    std::ostringstream detail;
    for (const ContinuumRun* run : {&xf, &xb}) {
        double top = 0.0;
        std::size_t top_at = 0;
        for (std::size_t i = 0; i < run->ep.size(); ++i)
            if (run->ep[i] > top) top = run->ep[i], top_at = i;
        const double t_top = run->t_fs[top_at];
        if (std::abs(t_top - t_meet_fs) > 0.2 * t_meet_fs)
            return {false, "collision peak at " + fmt(t_top) + " fs vs ballistic " +
                               fmt(t_meet_fs)};
        if (!(run->ep.back() < 0.05 * top))
            return {false, "final collision E_P " + fmt(run->ep.back()) +
                               " >= 5% of peak " + fmt(top)};
        // dominance: the half-maximum set is one contiguous window
        bool inside = false, closed = false;
        for (double v : run->ep) {
            if (v > 0.5 * top) {
                if (closed) return {false, "secondary maximum above half peak"};
                inside = true;
            } else if (inside) {
                closed = true;
            }
        }
    }
    detail << "comoving margin " << fmt(margin) << "; collision peak near "
           << fmt(t_meet_fs) << " fs";
    return {true, detail.str()};
}

} // namespace

int main() {
    run_criterion(1, "N=4 closed-form regression", criterion1);
    run_criterion(2, "statistics independence at N=4, A={1,2}", criterion2);
    run_criterion(3, "exact-diagonalization oracle equivalence", criterion3);
    run_criterion(4, "large-N phenomenology and saturation scaling", criterion4);

    std::printf("[....] running the four fig5 preset evolutions (shared by "
                "criteria 5 and 6)\n");
    std::fflush(stdout);
    const double fixture_start = now_seconds();
    ContinuumRun runs[4];
    bool fixture_ok = true;
    std::string fixture_err;
    try {
        runs[0] = drive_preset(ContinuumScenario::Comoving, Statistics::Fermion, 50.0);
        runs[1] = drive_preset(ContinuumScenario::Comoving, Statistics::Boson, 50.0);
        runs[2] = drive_preset(ContinuumScenario::Collision, Statistics::Fermion, 12.5);
        runs[3] = drive_preset(ContinuumScenario::Collision, Statistics::Boson, 12.5);
    } catch (const std::exception& e) {
        fixture_ok = false;
        fixture_err = e.what();
    }
    std::printf("[....] preset evolutions done [%.1fs]\n", now_seconds() - fixture_start);
    std::fflush(stdout);

    if (fixture_ok) {
        run_criterion(5, "continuum solver integrity",
                      [&] { return criterion5(runs); });
        run_criterion(6, "continuum phenomenology",
                      [&] { return criterion6(runs); });
    } else {
        report(5, "continuum solver integrity", false, fixture_err, 0.0);
        report(6, "continuum phenomenology", false, fixture_err, 0.0);
    }

    run_criterion(7, "preset determinism", criterion7);

    if (failures == 0)
        std::printf("all acceptance criteria passed\n");
    else
        std::printf("%d acceptance criteria FAILED\n", failures);
    return failures == 0 ? 0 : 1;
}
