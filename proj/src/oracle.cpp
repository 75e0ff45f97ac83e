#include "qwalk/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace qwalk {
namespace oracle {

namespace {

constexpr int kMaxOracleSites = 12;

double xlnx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

/// N x N ring Laplacian stencil: H|j> = 2|j> - |j-1> - |j+1> (gamma = 1,
/// time enters as gt).
Eigen::MatrixXd ring_laplacian(int n) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        h(j, j) += 2.0;
        h((j + n - 1) % n, j) -= 1.0;
        h((j + 1) % n, j) -= 1.0;
    }
    return h;
}

/// Exchange operator P|j,k> = |k,j> on the N^2 product space.
Eigen::MatrixXd exchange_operator(int n) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n * n, n * n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) p(k * n + j, j * n + k) = 1.0;
    return p;
}

/// Columns: the (anti)symmetrized pair-basis vectors, built by applying the
/// projector (1 +- P)/2 to product kets and normalizing. Independent of the
/// pair-amplitude formulas under test.
Eigen::MatrixXd pair_embedding(const PairBasis& basis) {
    const int n = basis.n_sites();
    const Eigen::MatrixXd p = exchange_operator(n);
    const double sign = basis.statistics() == Statistics::Fermion ? -1.0 : 1.0;
    const Eigen::MatrixXd proj =
        0.5 * (Eigen::MatrixXd::Identity(n * n, n * n) + sign * p);
    Eigen::MatrixXd embed(n * n, basis.size());
    for (int i = 0; i < basis.size(); ++i) {
        auto [j, k] = basis.pair(i);
        Eigen::VectorXd ket = Eigen::VectorXd::Zero(n * n);
        ket[(j - 1) * n + (k - 1)] = 1.0;
        Eigen::VectorXd v = proj * ket;
        embed.col(i) = v / v.norm();
    }
    return embed;
}

} // namespace

double closed_form_ep(ClosedFormCase c, double gt) {
    if (!std::isfinite(gt)) throw std::domain_error("closed_form_ep: gt not finite");
    const double ln2 = std::log(2.0);
    switch (c) {
        case ClosedFormCase::F12_A12: {
            const double s = std::sin(2.0 * gt);
            return 0.5 * s * s * ln2;
        }
        case ClosedFormCase::F13_A12: {
            const double u = std::cos(2.0 * gt);
            const double denom = 2.0 * (1.0 + u * u);
            const double minus = (u - 1.0) * (u - 1.0);
            const double plus = (u + 1.0) * (u + 1.0);
            return -0.25 * minus * (minus > 0.0 ? std::log(minus / denom) : 0.0)
                   - 0.25 * plus * (plus > 0.0 ? std::log(plus / denom) : 0.0);
        }
        case ClosedFormCase::F23_A12:
            return 0.0;
        case ClosedFormCase::F13_A13_Fermion: {
            const double s = std::sin(2.0 * gt);
            return ln2 * s * s;
        }
        case ClosedFormCase::F13_A13_Boson:
        case ClosedFormCase::BosonDoubleOcc:
            return 0.0;
    }
    throw std::domain_error("closed_form_ep: unknown case");
}

Eigen::MatrixXcd dense_two_particle_propagator(const RingConfig& cfg, double gt) {
    cfg.validate();
    if (cfg.n_sites > kMaxOracleSites)
        throw std::domain_error("dense_two_particle_propagator: oracle capped at N <= 12");
    const int n = cfg.n_sites;
    const int dim = n * n;

    const Eigen::MatrixXd h0 = ring_laplacian(n);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
    // H = H0 (x) 1 + 1 (x) H0 on the ordered product space |j,k> = e_j (x) e_k
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d)
                    h(a * n + b, c * n + d) = h0(a, c) * eye(b, d) + eye(a, c) * h0(b, d);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    const Eigen::VectorXd w = solver.eigenvalues();
    const Eigen::MatrixXd v = solver.eigenvectors();
    Eigen::VectorXcd phases(dim);
    for (int i = 0; i < dim; ++i) phases[i] = std::exp(cdouble(0.0, -w[i] * gt));
    const Eigen::MatrixXcd u_full =
        v.cast<cdouble>() * phases.asDiagonal() * v.transpose().cast<cdouble>();

    const Eigen::MatrixXd embed = pair_embedding(PairBasis(n, cfg.statistics));
    return embed.transpose().cast<cdouble>() * u_full * embed.cast<cdouble>();
}

std::optional<DensityMatrix> partial_trace(const PairState& state,
                                           const Partition& part) {
    const int n = state.basis.n_sites();
    if (n > kMaxOracleSites)
        throw std::domain_error("oracle::partial_trace: oracle capped at N <= 12");
    if (part.n_sites() != n)
        throw std::invalid_argument("oracle::partial_trace: partition size mismatch");

    // Embed into the product space, then keep only components with exactly one
    // coordinate on Alice's side.
    const Eigen::MatrixXd embed = pair_embedding(state.basis);
    Eigen::VectorXcd psi = embed.cast<cdouble>() * state.amplitudes;
    double p1 = 0.0;
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            const int in_a = (part.in_alice(a + 1) ? 1 : 0) + (part.in_alice(b + 1) ? 1 : 0);
            if (in_a != 1)
                psi[a * n + b] = 0.0;
            else
                p1 += std::norm(psi[a * n + b]);
        }
    }
    if (p1 < 1e-14) return std::nullopt;

    // Single-particle matrix: trace over either coordinate, restricted to A.
    const auto& alice = part.alice();
    const int da = static_cast<int>(alice.size());
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(da, da);
    for (int a = 0; a < da; ++a) {
        for (int b = 0; b < da; ++b) {
            const int x = alice[a] - 1, y = alice[b] - 1;
            // orientation matches <a_x^dag a_y>: conjugate on the first index
            cdouble acc = 0.0;
            for (int s = 0; s < n; ++s)
                acc += std::conj(psi[x * n + s]) * psi[y * n + s]    // particle 2 traced
                       + std::conj(psi[s * n + x]) * psi[s * n + y]; // particle 1 traced
            rho(a, b) = acc;
        }
    }
    rho /= rho.trace().real();
    return DensityMatrix{std::move(rho), alice};
}

} // namespace oracle
} // namespace qwalk
