#ifndef QWALK_ORACLE_HPP
#define QWALK_ORACLE_HPP

#include <Eigen/Dense>
#include <optional>

#include "qwalk/entanglement.hpp"
#include "qwalk/ring.hpp"

namespace qwalk {
namespace oracle {

// Ground-truth generators used by the test suites: closed-form N=4 results
// and a dense exact-diagonalization path that never touches the production
// pair-amplitude formulas. Deliberately brute force; capped at N <= 12.

enum class ClosedFormCase {
    F12_A12,           // |12>, A={1,2}: (1/2) sin^2(2gt) ln2, both statistics
    F13_A12,           // |13>, A={1,2}: two-term log expression in cos(2gt)
    F23_A12,           // |23>, A={1,2}: identically 0
    F13_A13_Fermion,   // |13>, A={1,3}: ln2 sin^2(2gt)
    F13_A13_Boson,     // |13>, A={1,3}: identically 0
    BosonDoubleOcc     // |kk>_b, any partition: identically 0
};

/// Exact evaluation of the quoted N=4 closed form (0*ln0 := 0).
double closed_form_ep(ClosedFormCase c, double gt);

/// Two-particle propagator on the canonical pair basis, built by explicit
/// Laplacian assembly on the N^2 product space, Hermitian eigendecomposition,
/// and projection with the exchange operator P (P^2 = 1). O(N^6); refuses
/// N > 12.
Eigen::MatrixXcd dense_two_particle_propagator(const RingConfig& cfg, double gt);

/// First-quantized partial trace: embeds the pair state into the N^2 product
/// space with explicit (anti)symmetrization, projects onto the
/// one-particle-in-A sector, traces out the other coordinate, renormalizes.
/// Returns nullopt when the sector is empty.
std::optional<DensityMatrix> partial_trace(const PairState& state,
                                           const Partition& part);

} // namespace oracle
} // namespace qwalk

#endif
