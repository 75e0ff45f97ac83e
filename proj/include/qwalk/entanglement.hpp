#ifndef QWALK_ENTANGLEMENT_HPP
#define QWALK_ENTANGLEMENT_HPP

#include <Eigen/Dense>
#include <optional>
#include <set>
#include <vector>

#include "qwalk/ring.hpp"
#include "qwalk/types.hpp"

namespace qwalk {

// Wiseman-Vaccaro entanglement of particles E_P = P1 * entropy(rho_A) for a
// two-particle state under a bipartition of the N modes. Only the sector with
// one particle on each side contributes; the 0- and 2-particle sectors are
// separable and carry no entanglement.

/// Bipartition of the sites: Alice holds `alice`, Bob the complement.
class Partition {
public:
    Partition(int n_sites, const std::set<int>& alice);

    int n_sites() const { return n_sites_; }
    const std::vector<int>& alice() const { return alice_; }   // sorted
    const std::vector<int>& bob() const { return bob_; }       // sorted
    bool in_alice(int site) const { return mask_[site - 1]; }

    /// Shifts every Alice site by m around the ring.
    Partition rotated(int m) const;

private:
    int n_sites_;
    std::vector<int> alice_, bob_;
    std::vector<bool> mask_;
};

struct SectorWeights {
    double p0 = 0.0, p1 = 0.0, p2 = 0.0;   // Alice holds 0, 1, 2 particles
};

/// Probabilities of Alice finding 0/1/2 particles in her modes.
SectorWeights sector_weights(const PairState& state, const Partition& part);

/// Single-particle density matrix of Alice's subsystem, over her site list.
struct DensityMatrix {
    Eigen::MatrixXcd mat;
    std::vector<int> sites;   // row/column labels, sorted ascending

    int dim() const { return static_cast<int>(mat.rows()); }
};

/// rho_A[k,k'] = sum_{s in B} conj(c_(k,s)) c_(k',s) / p1, built from the
/// canonical-pair amplitudes. Returns nullopt when the one-particle sector is
/// empty (p1 = 0); callers map that case to E_P = 0.
std::optional<DensityMatrix> reduced_density_matrix(const PairState& state,
                                                    const Partition& part);

/// Eigenvalues of a Hermitian PSD density matrix, ascending, with float-noise
/// negatives in [-1e-10, 0) clamped to zero. Anything below -1e-10 throws.
Eigen::VectorXd density_matrix_spectrum(const DensityMatrix& rho);

/// -sum eig*ln(eig) over eigenvalues above 1e-14, in nats.
double von_neumann_entropy(const DensityMatrix& rho);

/// 1 - Tr(rho^2); the cheap mixedness measure used on the continuum side.
double linear_entropy(const DensityMatrix& rho);

enum class EntropyKind { VonNeumann, Linear };

/// E_P = p1 * entropy(rho_A); exactly 0 when p1 = 0.
double entanglement_of_particles(const PairState& state, const Partition& part,
                                 EntropyKind entropy = EntropyKind::VonNeumann);

struct EpSample {
    double gt = 0.0;
    double ep = 0.0;
    double p1 = 0.0;
    double entropy = 0.0;
    double p0 = 0.0, p2 = 0.0;   // the separable sectors, kept for re-validation
};

/// Evaluates the full pipeline on a strictly increasing gt grid.
std::vector<EpSample> ep_time_series(const RingConfig& cfg,
                                     std::pair<int, int> initial,
                                     const Partition& part,
                                     const std::vector<double>& gt_grid,
                                     EntropyKind entropy = EntropyKind::VonNeumann);

/// Saturation-interval estimate: E_P plateaus (small oscillations) until the
/// wavefronts wrap the boundary, then rises sharply. The estimator takes the
/// plateau level as the median of E_P over gt in [5, N/5] and reports the
/// first sustained crossing of 1.5x that level as the plateau end gamma*tau.
struct SaturationEstimate {
    bool found = false;
    double gamma_tau = 0.0;
    double plateau_level = 0.0;
};

SaturationEstimate estimate_saturation(const std::vector<EpSample>& series,
                                       int n_sites);

} // namespace qwalk

#endif
