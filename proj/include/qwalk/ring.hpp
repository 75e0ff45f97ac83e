#ifndef QWALK_RING_HPP
#define QWALK_RING_HPP

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "qwalk/types.hpp"

namespace qwalk {

// One- and two-particle continuous-time quantum walks on an N-site ring
// (periodic boundary conditions, nearest-neighbour Laplacian Hamiltonian).
// Sites are labelled 1..N with N+1 identified with 1. All times are the
// dimensionless product gamma*t.

struct RingConfig {
    int n_sites = 4;                          // N, even, >= 2
    double gamma = 1.0;                       // intersite hopping rate, 1/time
    Statistics statistics = Statistics::Fermion;

    void validate() const;
};

/// Maps an arbitrary integer site label into the 1..N window.
int wrap_site(int j, int n_sites);

/// Ordered two-particle basis: fermion pairs (j,k) with j<k, size N(N-1)/2;
/// boson pairs (j,k) with j<=k, size N(N+1)/2. Lexicographic order, with a
/// bijective pair <-> flat index map in both directions.
class PairBasis {
public:
    PairBasis(int n_sites, Statistics statistics);

    int n_sites() const { return n_sites_; }
    Statistics statistics() const { return statistics_; }
    int size() const { return static_cast<int>(pairs_.size()); }

    std::pair<int, int> pair(int index) const;
    int index(int j, int k) const;            // requires canonical order
    bool has_pair(int j, int k) const;

private:
    int n_sites_;
    Statistics statistics_;
    std::vector<std::pair<int, int>> pairs_;
    std::vector<int> offsets_;                // flat index of (j, *) block
};

/// Two-particle state on the canonical pair basis, stamped with gamma*t.
struct PairState {
    PairBasis basis;
    Eigen::VectorXcd amplitudes;
    double gt = 0.0;

    double norm_sq() const { return amplitudes.squaredNorm(); }
};

/// Single-particle transition amplitude lambda_{k,j}(gt) on the ring,
/// evaluated from the Bloch-eigenstate sum (hbar = 1). Depends on (k-j) mod N.
cdouble bloch_amplitude(const RingConfig& cfg, double gt, int k, int j);

/// First row of the circulant propagator: lam[d] = lambda_{j+d,j}(gt).
std::vector<cdouble> bloch_row(const RingConfig& cfg, double gt);

/// Full N x N single-particle propagator U(k,j) = lambda_{k,j}(gt).
/// Unitary and circulant.
Eigen::MatrixXcd single_particle_propagator(const RingConfig& cfg, double gt);

/// Two-fermion transition amplitude mu^f_{ks,jr} = l_{kj} l_{sr} - l_{kr} l_{sj}.
/// Pairs must be canonical (k<s, j<r).
cdouble pair_amplitude_fermion(const Eigen::MatrixXcd& propagator,
                               int k, int s, int j, int r);

/// Two-boson transition amplitude (canonical k<=s, j<=r): a sqrt(2) factor
/// appears when exactly one of the pairs is doubly occupied.
cdouble pair_amplitude_boson(const Eigen::MatrixXcd& propagator,
                             int k, int s, int j, int r);

/// Evolves the two-particle state localized on sites (j,r) at gt=0 to time gt.
/// A fermionic initial pair given in reversed order is canonicalized with a
/// global sign flip; boson reordering is sign-free.
PairState evolve(const RingConfig& cfg, std::pair<int, int> initial, double gt);

/// Joint-detection map Gamma_{kj} = |amplitude on canonical pair (k,j)|^2,
/// placed symmetrically. The sum over canonical cells (upper triangle
/// including the diagonal) is 1; the fermion diagonal is identically 0.
Eigen::MatrixXd correlation_map(const PairState& state);

} // namespace qwalk

#endif
