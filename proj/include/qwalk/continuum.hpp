#ifndef QWALK_CONTINUUM_HPP
#define QWALK_CONTINUUM_HPP

#include <vector>

#include "qwalk/types.hpp"

namespace qwalk {

// Two-particle free propagation on a 1D segment [-L, L] with hard walls,
// evolved by a Cayley (Crank-Nicolson) scheme split exactly into the two
// commuting one-particle kinetic terms. Internals use natural units: hbar = 1,
// lengths in nm, energies in meV; the derived time unit hbar/meV is applied at
// the fs I/O boundary.

inline constexpr double kHbarSI = 1.054571817e-34;       // J s
inline constexpr double kMeVSI = 1.602176634e-22;        // J
inline constexpr double kTimeUnitFs = kHbarSI / kMeVSI * 1e15;  // ~658.212 fs

struct ContinuumConfig {
    double mass_kg = 9.1e-31;
    double sigma_nm = 5.0;        // wavepacket std-dev
    double x0_nm = 20.0;          // half-separation: centers at +-x0
    double ek1_mev = 0.0;         // kinetic energy of the packet at +x0,
    double ek2_mev = 0.0;         // at -x0; the sign carries the direction
    Statistics statistics = Statistics::Fermion;
    double half_length_nm = 200.0;
    double dx_nm = 0.25;
    double dt_fs = 0.25;
    double t_max_fs = 2000.0;

    void validate() const;

    int n_points() const;                       // odd; x = 0 lies on the grid
    double x_at(int i) const { return -half_length_nm + i * dx_nm; }
    double dcoef() const;                       // hbar^2/(2m), meV nm^2
    double k1() const;                          // signed wavenumber, 1/nm
    double k2() const;
    double dt_natural() const { return dt_fs / kTimeUnitFs; }
    double group_speed(double k) const;         // nm per natural time unit
};

struct ContinuumState {
    std::vector<cdouble> psi;     // row-major n x n field psi(x1, x2)
    int n = 0;
    Statistics statistics = Statistics::Fermion;
    long steps = 0;               // time = steps * dt

    double t_fs(const ContinuumConfig& cfg) const { return steps * cfg.dt_fs; }
};

/// Minimum-uncertainty wavepacket phi(x) = (2 pi sigma^2)^(-1/4)
/// exp(ikx - (x-x0)^2 / (4 sigma^2)) sampled on the grid. Unit grid norm.
std::vector<cdouble> gaussian_packet(const ContinuumConfig& cfg,
                                     double x0_nm, double k_per_nm,
                                     double sigma_nm);

/// (Anti)symmetrized product of the two packets, grid-normalized to 1.
ContinuumState initial_state(const ContinuumConfig& cfg);

/// Cayley stepper with precomputed tridiagonal factorizations for both time
/// directions. Hard-wall (Dirichlet) boundaries just outside the grid.
class CrankNicolson {
public:
    explicit CrankNicolson(const ContinuumConfig& cfg);

    void step(ContinuumState& state) const;            // t -> t + dt
    void step_reversed(ContinuumState& state) const;   // t -> t - dt

private:
    struct Factors {
        double c = 0.0;                // Cayley coefficient: a = i c
        std::vector<cdouble> upper;    // normalized upper-diagonal c'
        std::vector<cdouble> pivot;    // reciprocal pivots m
    };
    void sweep_rows(std::vector<cdouble>& psi, const Factors& f) const;
    void sweep_cols(std::vector<cdouble>& psi, const Factors& f) const;
    static Factors make_factors(int n, double c);

    int n_;
    Factors forward_, backward_;
};

/// Advances one step with a throwaway solver; drivers that loop should hold a
/// CrankNicolson instance instead.
void step(ContinuumState& state, const ContinuumConfig& cfg);

/// Trapezoid-rule squared norm of the field.
double field_norm_sq(const ContinuumState& state, const ContinuumConfig& cfg);

/// max |psi(x2,x1) -+ psi(x1,x2)| over the grid.
double exchange_residual(const ContinuumState& state);

struct EpLinear {
    double ep = 0.0;
    double p1 = 0.0;
};

/// Linear-entropy entanglement of particles for the cut Alice = {x < 0},
/// Bob = {x > 0}; the x = 0 column carries half weight on each side.
/// Returns ep = 0 when p1 < 1e-12.
EpLinear ep_linear(const ContinuumState& state, const ContinuumConfig& cfg);

/// Mean and variance of the single-particle position marginal (particle 1).
struct Moments {
    double mean = 0.0;
    double variance = 0.0;
};
Moments marginal_moments(const ContinuumState& state, const ContinuumConfig& cfg);

enum class ContinuumScenario { Comoving, Collision };

/// The fig5 experiment parameter sets: sigma = 5 nm, x0 = 20 nm,
/// m = 9.1e-31 kg; co-moving has E_k = 0 over 2 ps, the collision one
/// +-10 meV over 1 ps.
ContinuumConfig continuum_preset(ContinuumScenario scenario, Statistics stats);

} // namespace qwalk

#endif
