#include "qwalk/entanglement.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace qwalk {

namespace {

constexpr double kSectorEmpty = 1e-14;    // p1 below this counts as empty
constexpr double kEigClamp = -1e-10;      // float-noise floor for eigenvalues
constexpr double kEntropyCutoff = 1e-14;  // eigenvalues below this skip x*ln(x)

} // namespace

Partition::Partition(int n_sites, const std::set<int>& alice) : n_sites_(n_sites) {
    if (n_sites < 2) throw std::invalid_argument("Partition: n_sites < 2");
    if (alice.empty())
        throw std::invalid_argument("Partition: Alice's mode set is empty");
    if (static_cast<int>(alice.size()) >= n_sites)
        throw std::invalid_argument("Partition: Alice must hold a proper subset of the modes");
    mask_.assign(n_sites, false);
    for (int site : alice) {
        if (site < 1 || site > n_sites) {
            std::ostringstream msg;
            msg << "Partition: site " << site << " outside [1, " << n_sites << "]";
            throw std::invalid_argument(msg.str());
        }
        mask_[site - 1] = true;
    }
    alice_.assign(alice.begin(), alice.end());
    for (int s = 1; s <= n_sites; ++s)
        if (!mask_[s - 1]) bob_.push_back(s);
}

Partition Partition::rotated(int m) const {
    std::set<int> shifted;
    for (int site : alice_) shifted.insert(wrap_site(site + m, n_sites_));
    return Partition(n_sites_, shifted);
}

SectorWeights sector_weights(const PairState& state, const Partition& part) {
    if (part.n_sites() != state.basis.n_sites())
        throw std::invalid_argument("sector_weights: partition size mismatch");
    SectorWeights w;
    for (int i = 0; i < state.basis.size(); ++i) {
        auto [j, k] = state.basis.pair(i);
        const double p = std::norm(state.amplitudes[i]);
        const int in_a = (part.in_alice(j) ? 1 : 0) + (part.in_alice(k) ? 1 : 0);
        if (in_a == 2) w.p2 += p;
        else if (in_a == 1) w.p1 += p;
        else w.p0 += p;
    }
    return w;
}

std::optional<DensityMatrix> reduced_density_matrix(const PairState& state,
                                                    const Partition& part) {
    const SectorWeights w = sector_weights(state, part);
    if (w.p1 < kSectorEmpty) return std::nullopt;

    const auto& alice = part.alice();
    const auto& bob = part.bob();
    const int da = static_cast<int>(alice.size());

    // c_(k,s): the stored amplitude of the canonical pair {k,s}. The canonical
    // basis kets carry the exchange-symmetry convention of the state.
    auto amp = [&](int k, int s) {
        return state.amplitudes[state.basis.index(std::min(k, s), std::max(k, s))];
    };

    Eigen::MatrixXcd rho(da, da);
    for (int a = 0; a < da; ++a) {
        for (int b = a; b < da; ++b) {
            cdouble acc = 0.0;
            for (int s : bob) acc += std::conj(amp(alice[a], s)) * amp(alice[b], s);
            rho(a, b) = acc / w.p1;
            rho(b, a) = std::conj(rho(a, b));
        }
    }

    const double trace_err = std::abs(rho.trace().real() - 1.0) + std::abs(rho.trace().imag());
    if (trace_err > 1e-10)
        throw NumericalError("reduced_density_matrix: trace deviates from 1 by " +
                             std::to_string(trace_err));
    return DensityMatrix{std::move(rho), alice};
}

Eigen::VectorXd density_matrix_spectrum(const DensityMatrix& rho) {
    const double herm_err = (rho.mat - rho.mat.adjoint()).cwiseAbs().maxCoeff();
    if (herm_err > 1e-12)
        throw std::domain_error("density matrix is not Hermitian (max deviation " +
                                std::to_string(herm_err) + ")");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho.mat,
                                                           Eigen::EigenvaluesOnly);
    Eigen::VectorXd eig = solver.eigenvalues();
    for (int i = 0; i < eig.size(); ++i) {
        if (eig[i] < kEigClamp)
            throw NumericalError("density matrix eigenvalue " + std::to_string(eig[i]) +
                                 " below clamp tolerance");
        if (eig[i] < 0.0) eig[i] = 0.0;
    }
    return eig;
}

double von_neumann_entropy(const DensityMatrix& rho) {
    const Eigen::VectorXd eig = density_matrix_spectrum(rho);
    double s = 0.0;
    for (int i = 0; i < eig.size(); ++i)
        if (eig[i] > kEntropyCutoff) s -= eig[i] * std::log(eig[i]);
    return std::max(s, 0.0);   // rank-1 spectra can round to -1e-16
}

double linear_entropy(const DensityMatrix& rho) {
    const Eigen::VectorXd eig = density_matrix_spectrum(rho);
    return std::max(1.0 - eig.squaredNorm(), 0.0);
}

double entanglement_of_particles(const PairState& state, const Partition& part,
                                 EntropyKind entropy) {
    const auto rho = reduced_density_matrix(state, part);
    if (!rho) return 0.0;   // empty one-particle sector: both remaining sectors separable
    const double p1 = sector_weights(state, part).p1;
    const double s = entropy == EntropyKind::VonNeumann ? von_neumann_entropy(*rho)
                                                        : linear_entropy(*rho);
    return p1 * s;
}

std::vector<EpSample> ep_time_series(const RingConfig& cfg,
                                     std::pair<int, int> initial,
                                     const Partition& part,
                                     const std::vector<double>& gt_grid,
                                     EntropyKind entropy) {
    for (std::size_t i = 1; i < gt_grid.size(); ++i)
        if (!(gt_grid[i] > gt_grid[i - 1]))
            throw std::invalid_argument("ep_time_series: gt grid must be strictly increasing");
    std::vector<EpSample> out;
    out.reserve(gt_grid.size());
    for (double gt : gt_grid) {
        const PairState state = evolve(cfg, initial, gt);
        const SectorWeights w = sector_weights(state, part);
        EpSample sample{gt, 0.0, w.p1, 0.0, w.p0, w.p2};
        if (const auto rho = reduced_density_matrix(state, part)) {
            sample.entropy = entropy == EntropyKind::VonNeumann
                                 ? von_neumann_entropy(*rho)
                                 : linear_entropy(*rho);
            sample.ep = w.p1 * sample.entropy;
        }
        out.push_back(sample);
    }
    return out;
}

SaturationEstimate estimate_saturation(const std::vector<EpSample>& series,
                                       int n_sites) {
    // Plateau level: median over gt in [5, N/5], safely after the initial
    // transient and before the boundary wrap (~N/4) for N >= 50.
    const double lo = 5.0, hi = n_sites / 5.0;
    std::vector<double> window;
    for (const auto& s : series)
        if (s.gt >= lo && s.gt <= hi) window.push_back(s.ep);
    SaturationEstimate est;
    if (window.size() < 8) return est;   // grid too coarse or too short
    std::nth_element(window.begin(), window.begin() + window.size() / 2, window.end());
    est.plateau_level = window[window.size() / 2];

    const double threshold = 1.5 * est.plateau_level;
    constexpr int kSustain = 4;          // consecutive samples above threshold
    int run = 0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (series[i].gt <= lo) continue;
        if (series[i].ep > threshold) {
            if (++run == kSustain) {
                est.found = true;
                est.gamma_tau = series[i - (kSustain - 1)].gt;
                return est;
            }
        } else {
            run = 0;
        }
    }
    return est;
}

} // namespace qwalk
