#include "qwalk/ring.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace qwalk {

namespace {

void check_site(int j, int n_sites, const char* what) {
    if (j < 1 || j > n_sites) {
        std::ostringstream msg;
        msg << what << ": site index " << j << " outside [1, " << n_sites << "]";
        throw std::domain_error(msg.str());
    }
}

} // namespace

void RingConfig::validate() const {
    if (n_sites < 2 || n_sites % 2 != 0)
        throw std::invalid_argument("RingConfig: n_sites must be even and >= 2");
    if (!(gamma > 0.0))
        throw std::invalid_argument("RingConfig: gamma must be positive");
}

int wrap_site(int j, int n_sites) {
    int m = (j - 1) % n_sites;
    if (m < 0) m += n_sites;
    return m + 1;
}

PairBasis::PairBasis(int n_sites, Statistics statistics)
    : n_sites_(n_sites), statistics_(statistics) {
    if (n_sites < 2) throw std::invalid_argument("PairBasis: n_sites < 2");
    offsets_.reserve(n_sites + 1);
    pairs_.reserve(statistics == Statistics::Fermion
                       ? n_sites * (n_sites - 1) / 2
                       : n_sites * (n_sites + 1) / 2);
    for (int j = 1; j <= n_sites; ++j) {
        offsets_.push_back(static_cast<int>(pairs_.size()));
        int k0 = statistics == Statistics::Fermion ? j + 1 : j;
        for (int k = k0; k <= n_sites; ++k) pairs_.emplace_back(j, k);
    }
    offsets_.push_back(static_cast<int>(pairs_.size()));
}

std::pair<int, int> PairBasis::pair(int index) const {
    if (index < 0 || index >= size())
        throw std::domain_error("PairBasis: flat index out of range");
    return pairs_[index];
}

bool PairBasis::has_pair(int j, int k) const {
    if (j < 1 || k < 1 || j > n_sites_ || k > n_sites_) return false;
    return statistics_ == Statistics::Fermion ? j < k : j <= k;
}

int PairBasis::index(int j, int k) const {
    if (!has_pair(j, k)) {
        std::ostringstream msg;
        msg << "PairBasis: (" << j << "," << k << ") is not a canonical "
            << to_string(statistics_) << " pair for N=" << n_sites_;
        throw std::domain_error(msg.str());
    }
    return offsets_[j - 1] + (k - (statistics_ == Statistics::Fermion ? j + 1 : j));
}

std::vector<cdouble> bloch_row(const RingConfig& cfg, double gt) {
    cfg.validate();
    const int n = cfg.n_sites;
    const double step = 2.0 * std::numbers::pi / n;
    // phase[m] = exp(2i gt cos(2 pi m / N)), the Bloch eigenvalue factor
    std::vector<cdouble> phase(n);
    for (int m = 1; m <= n; ++m)
        phase[m - 1] = std::exp(cdouble(0.0, 2.0 * gt * std::cos(step * m)));
    const cdouble front = std::exp(cdouble(0.0, -2.0 * gt)) / double(n);
    std::vector<cdouble> lam(n);
    for (int d = 0; d < n; ++d) {
        cdouble acc = 0.0;
        for (int m = 1; m <= n; ++m)
            acc += phase[m - 1] * std::exp(cdouble(0.0, -step * m * d));
        lam[d] = front * acc;
    }
    return lam;
}

cdouble bloch_amplitude(const RingConfig& cfg, double gt, int k, int j) {
    cfg.validate();
    check_site(k, cfg.n_sites, "bloch_amplitude");
    check_site(j, cfg.n_sites, "bloch_amplitude");
    if (gt < 0.0) throw std::domain_error("bloch_amplitude: gt must be >= 0");
    int d = (k - j) % cfg.n_sites;
    if (d < 0) d += cfg.n_sites;
    const double step = 2.0 * std::numbers::pi / cfg.n_sites;
    cdouble acc = 0.0;
    for (int m = 1; m <= cfg.n_sites; ++m)
        acc += std::exp(cdouble(0.0, 2.0 * gt * std::cos(step * m) - step * m * d));
    return std::exp(cdouble(0.0, -2.0 * gt)) / double(cfg.n_sites) * acc;
}

Eigen::MatrixXcd single_particle_propagator(const RingConfig& cfg, double gt) {
    if (gt < 0.0) throw std::domain_error("single_particle_propagator: gt < 0");
    const auto lam = bloch_row(cfg, gt);
    const int n = cfg.n_sites;
    Eigen::MatrixXcd u(n, n);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) u(k, j) = lam[(k - j + n) % n];
    return u;
}

cdouble pair_amplitude_fermion(const Eigen::MatrixXcd& u,
                               int k, int s, int j, int r) {
    const int n = static_cast<int>(u.rows());
    check_site(k, n, "pair_amplitude_fermion");
    check_site(s, n, "pair_amplitude_fermion");
    check_site(j, n, "pair_amplitude_fermion");
    check_site(r, n, "pair_amplitude_fermion");
    if (!(k < s) || !(j < r))
        throw std::domain_error("pair_amplitude_fermion: pairs must be canonical (k<s, j<r)");
    return u(k - 1, j - 1) * u(s - 1, r - 1) - u(k - 1, r - 1) * u(s - 1, j - 1);
}

cdouble pair_amplitude_boson(const Eigen::MatrixXcd& u,
                             int k, int s, int j, int r) {
    const int n = static_cast<int>(u.rows());
    check_site(k, n, "pair_amplitude_boson");
    check_site(s, n, "pair_amplitude_boson");
    check_site(j, n, "pair_amplitude_boson");
    check_site(r, n, "pair_amplitude_boson");
    if (!(k <= s) || !(j <= r))
        throw std::domain_error("pair_amplitude_boson: pairs must be canonical (k<=s, j<=r)");
    const cdouble direct = u(k - 1, j - 1) * u(s - 1, r - 1);
    if (k != s && j != r) return direct + u(k - 1, r - 1) * u(s - 1, j - 1);
    if ((k == s) != (j == r)) return std::numbers::sqrt2 * direct;
    return direct;
}

PairState evolve(const RingConfig& cfg, std::pair<int, int> initial, double gt) {
    cfg.validate();
    if (gt < 0.0) throw std::domain_error("evolve: gt must be >= 0");
    int j = initial.first, r = initial.second;
    check_site(j, cfg.n_sites, "evolve");
    check_site(r, cfg.n_sites, "evolve");
    double sign = 1.0;
    if (j > r) {
        std::swap(j, r);
        if (cfg.statistics == Statistics::Fermion) sign = -1.0;
    }
    if (cfg.statistics == Statistics::Fermion && j == r)
        throw std::domain_error("evolve: fermions cannot share a site (Pauli exclusion)");

    const auto lam = bloch_row(cfg, gt);
    const int n = cfg.n_sites;
    auto L = [&](int k, int from) { return lam[(k - from + 2 * n) % n]; };

    PairBasis basis(n, cfg.statistics);
    Eigen::VectorXcd amps(basis.size());
    for (int i = 0; i < basis.size(); ++i) {
        auto [k, s] = basis.pair(i);
        cdouble mu;
        if (cfg.statistics == Statistics::Fermion) {
            mu = L(k, j) * L(s, r) - L(k, r) * L(s, j);
        } else if (k != s && j != r) {
            mu = L(k, j) * L(s, r) + L(k, r) * L(s, j);
        } else if ((k == s) != (j == r)) {
            mu = std::numbers::sqrt2 * L(k, j) * L(s, r);
        } else {
            mu = L(k, j) * L(s, r);
        }
        amps[i] = sign * mu;
    }

    PairState state{std::move(basis), std::move(amps), gt};
    // Evolution is analytic; drift beyond 1e-9 indicates a bug, not roundoff.
    const double drift = std::abs(state.norm_sq() - 1.0);
    if (drift > 1e-9) {
        std::ostringstream msg;
        msg << "evolve: norm drift " << drift << " at gt=" << gt
            << " (N=" << n << ", " << to_string(cfg.statistics) << ")";
        throw NumericalError(msg.str());
    }
    return state;
}

Eigen::MatrixXd correlation_map(const PairState& state) {
    const int n = state.basis.n_sites();
    Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < state.basis.size(); ++i) {
        auto [j, k] = state.basis.pair(i);
        const double w = std::norm(state.amplitudes[i]);
        gamma(k - 1, j - 1) = w;
        gamma(j - 1, k - 1) = w;
    }
    return gamma;
}

} // namespace qwalk
