#include "qwalk/continuum.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <sstream>

namespace qwalk {

namespace {

double sign_of(double v) { return v < 0.0 ? -1.0 : 1.0; }

/// Trapezoid weights over the full grid.
std::vector<double> trapezoid_weights(int n, double dx) {
    std::vector<double> w(n, dx);
    w.front() = 0.5 * dx;
    w.back() = 0.5 * dx;
    return w;
}

} // namespace

int ContinuumConfig::n_points() const {
    return 2 * static_cast<int>(std::llround(half_length_nm / dx_nm)) + 1;
}

double ContinuumConfig::dcoef() const {
    // hbar^2/(2m) converted J m^2 -> meV nm^2
    return kHbarSI * kHbarSI / (2.0 * mass_kg) / kMeVSI * 1e18;
}

double ContinuumConfig::k1() const {
    return sign_of(ek1_mev) * std::sqrt(std::abs(ek1_mev) / dcoef());
}

double ContinuumConfig::k2() const {
    return sign_of(ek2_mev) * std::sqrt(std::abs(ek2_mev) / dcoef());
}

double ContinuumConfig::group_speed(double k) const { return 2.0 * dcoef() * std::abs(k); }

void ContinuumConfig::validate() const {
    std::ostringstream msg;
    if (!(mass_kg > 0.0)) throw std::invalid_argument("continuum: mass must be positive");
    if (!(sigma_nm > 0.0)) throw std::invalid_argument("continuum: sigma must be positive");
    if (x0_nm < 0.0) throw std::invalid_argument("continuum: x0 must be >= 0");
    if (!(half_length_nm > 0.0) || !(dx_nm > 0.0) || !(dt_fs > 0.0) || !(t_max_fs >= 0.0))
        throw std::invalid_argument("continuum: L, dx, dt must be positive, t_max >= 0");
    const double cells = half_length_nm / dx_nm;
    if (std::abs(cells - std::llround(cells)) > 1e-9 * cells) {
        msg << "continuum: dx=" << dx_nm << " must divide the half-length L=" << half_length_nm
            << " so the x=0 cut lies on the grid";
        throw std::invalid_argument(msg.str());
    }
    if (dx_nm > sigma_nm / 10.0 + 1e-12) {
        msg << "continuum: dx=" << dx_nm << " too coarse for sigma=" << sigma_nm
            << " (need dx <= sigma/10)";
        throw std::invalid_argument(msg.str());
    }
    if (x0_nm + 5.0 * sigma_nm > half_length_nm) {
        msg << "continuum: packet at x0=" << x0_nm << " with sigma=" << sigma_nm
            << " is clipped by the domain [-" << half_length_nm << ", " << half_length_nm << "]";
        throw std::invalid_argument(msg.str());
    }
    // Packets must never approach the hard walls during the run.
    const double vmax = std::max(group_speed(k1()), group_speed(k2()));
    const double travel = vmax * (t_max_fs / kTimeUnitFs);
    if (half_length_nm < x0_nm + 10.0 * sigma_nm + travel) {
        msg << "continuum: domain too small: need L >= x0 + 10 sigma + v*t = "
            << x0_nm + 10.0 * sigma_nm + travel << " nm, have " << half_length_nm;
        throw std::invalid_argument(msg.str());
    }
}

std::vector<cdouble> gaussian_packet(const ContinuumConfig& cfg,
                                     double x0_nm, double k_per_nm,
                                     double sigma_nm) {
    if (std::abs(x0_nm) + 5.0 * sigma_nm > cfg.half_length_nm)
        throw std::invalid_argument("gaussian_packet: grid does not cover x0 +- 5 sigma");
    const int n = cfg.n_points();
    const double norm = std::pow(2.0 * std::numbers::pi * sigma_nm * sigma_nm, -0.25);
    std::vector<cdouble> phi(n);
    for (int i = 0; i < n; ++i) {
        const double x = cfg.x_at(i);
        const double d = x - x0_nm;
        phi[i] = norm * std::exp(cdouble(-d * d / (4.0 * sigma_nm * sigma_nm), k_per_nm * x));
    }
    return phi;
}

ContinuumState initial_state(const ContinuumConfig& cfg) {
    cfg.validate();
    const int n = cfg.n_points();
    const auto f = gaussian_packet(cfg, +cfg.x0_nm, cfg.k1(), cfg.sigma_nm);
    const auto g = gaussian_packet(cfg, -cfg.x0_nm, cfg.k2(), cfg.sigma_nm);
    const double s = cfg.statistics == Statistics::Fermion ? -1.0 : 1.0;

    ContinuumState state;
    state.n = n;
    state.statistics = cfg.statistics;
    state.psi.resize(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            state.psi[static_cast<std::size_t>(i) * n + j] = f[i] * g[j] + s * g[i] * f[j];

    const double nrm = std::sqrt(field_norm_sq(state, cfg));
    if (nrm < 1e-8)
        throw std::invalid_argument("initial_state: (anti)symmetrized state vanishes "
                                    "(identical fermionic packets?)");
    for (auto& v : state.psi) v /= nrm;
    return state;
}

CrankNicolson::Factors CrankNicolson::make_factors(int n, double c) {
    Factors f;
    f.c = c;
    const cdouble a(0.0, c), off = -a, diag = 1.0 + 2.0 * a;
    f.upper.resize(n);
    f.pivot.resize(n);
    f.pivot[0] = 1.0 / diag;
    f.upper[0] = off * f.pivot[0];
    for (int i = 1; i < n; ++i) {
        f.pivot[i] = 1.0 / (diag - off * f.upper[i - 1]);
        f.upper[i] = off * f.pivot[i];
    }
    return f;
}

CrankNicolson::CrankNicolson(const ContinuumConfig& cfg) : n_(cfg.n_points()) {
    cfg.validate();
    // H = -D (d^2/dx1^2 + d^2/dx2^2); each Cayley half reads
    // (1 + i dt/2 H_d) psi' = (1 - i dt/2 H_d) psi with a = i (dt/2) D / dx^2.
    const double c = 0.5 * cfg.dt_natural() * cfg.dcoef() / (cfg.dx_nm * cfg.dx_nm);
    forward_ = make_factors(n_, c);
    backward_ = make_factors(n_, -c);
}

// The sweeps run on raw re/im pairs: std::complex arithmetic in these loops
// compiles to __muldc3 library calls, an order of magnitude too slow for the
// 10^10 point-step preset runs. RHS uses r = q + i c (q_{j-1} + q_{j+1} - 2q).

void CrankNicolson::sweep_rows(std::vector<cdouble>& psi, const Factors& f) const {
    const int n = n_;
    const double c = f.c;
    const double* pv = reinterpret_cast<const double*>(f.pivot.data());
    const double* up = reinterpret_cast<const double*>(f.upper.data());

    // Rows are independent systems; running kBlock of them through the
    // recurrence together hides its serial latency.
    constexpr int kBlock = 4;
    std::vector<double> ybuf(static_cast<std::size_t>(kBlock) * 2 * n);

    const auto solve_block = [&](double* const* q, int rows) {
        double ypr[kBlock], ypi[kBlock];
        double* y[kBlock];
        for (int r = 0; r < rows; ++r) y[r] = ybuf.data() + 2 * static_cast<std::size_t>(r) * n;

        for (int r = 0; r < rows; ++r) {   // j = 0 (hard wall to the left)
            const double ur = q[r][2] - 2.0 * q[r][0], ui = q[r][3] - 2.0 * q[r][1];
            const double rr = q[r][0] - c * ui, ri = q[r][1] + c * ur;
            ypr[r] = rr * pv[0] - ri * pv[1];
            ypi[r] = rr * pv[1] + ri * pv[0];
            y[r][0] = ypr[r];
            y[r][1] = ypi[r];
        }
        for (int j = 1; j < n - 1; ++j) {
            const double pr = pv[2 * j], pi = pv[2 * j + 1];
            for (int r = 0; r < rows; ++r) {
                const double qr = q[r][2 * j], qi = q[r][2 * j + 1];
                const double ur = q[r][2 * j - 2] + q[r][2 * j + 2] - 2.0 * qr;
                const double ui = q[r][2 * j - 1] + q[r][2 * j + 3] - 2.0 * qi;
                const double tr = qr - c * ui - c * ypi[r];   // r - off*y_prev, off = -ic
                const double ti = qi + c * ur + c * ypr[r];
                ypr[r] = tr * pr - ti * pi;
                ypi[r] = tr * pi + ti * pr;
                y[r][2 * j] = ypr[r];
                y[r][2 * j + 1] = ypi[r];
            }
        }
        {   // j = n-1 (hard wall to the right)
            const int j = n - 1;
            const double pr = pv[2 * j], pi = pv[2 * j + 1];
            for (int r = 0; r < rows; ++r) {
                const double qr = q[r][2 * j], qi = q[r][2 * j + 1];
                const double ur = q[r][2 * j - 2] - 2.0 * qr;
                const double ui = q[r][2 * j - 1] - 2.0 * qi;
                const double tr = qr - c * ui - c * ypi[r];
                const double ti = qi + c * ur + c * ypr[r];
                q[r][2 * j] = tr * pr - ti * pi;
                q[r][2 * j + 1] = tr * pi + ti * pr;
            }
        }
        double xr[kBlock], xi[kBlock];
        for (int r = 0; r < rows; ++r) {
            xr[r] = q[r][2 * (n - 1)];
            xi[r] = q[r][2 * (n - 1) + 1];
        }
        for (int j = n - 2; j >= 0; --j) {
            const double cr = up[2 * j], ci = up[2 * j + 1];
            for (int r = 0; r < rows; ++r) {
                const double nr = xr[r], ni = xi[r];
                xr[r] = y[r][2 * j] - (cr * nr - ci * ni);
                xi[r] = y[r][2 * j + 1] - (cr * ni + ci * nr);
                q[r][2 * j] = xr[r];
                q[r][2 * j + 1] = xi[r];
            }
        }
    };

    double* base = reinterpret_cast<double*>(psi.data());
    const std::size_t stride = 2 * static_cast<std::size_t>(n);
    int i = 0;
    for (; i + kBlock <= n; i += kBlock) {
        double* q[kBlock];
        for (int r = 0; r < kBlock; ++r) q[r] = base + (i + r) * stride;
        solve_block(q, kBlock);
    }
    if (i < n) {
        double* q[kBlock] = {};
        for (int r = 0; i + r < n; ++r) q[r] = base + (i + r) * stride;
        solve_block(q, n - i);
    }
}

void CrankNicolson::sweep_cols(std::vector<cdouble>& psi, const Factors& f) const {
    const int n = n_;
    const double c = f.c;
    const std::size_t stride = 2 * static_cast<std::size_t>(n);
    double* base = reinterpret_cast<double*>(psi.data());
    // eliminate down the rows, vectorized across the contiguous column index;
    // each pass stashes the pre-update row for the next row's stencil
    std::vector<double> prev_orig(stride), cur_orig(stride);
    double* prevo = prev_orig.data();
    double* curo = cur_orig.data();
    for (int i = 0; i < n; ++i) {
        double* row = base + i * stride;
        const double* below = i + 1 < n ? row + stride : nullptr;
        const double mr = f.pivot[i].real(), mi = f.pivot[i].imag();
        if (i == 0) {
            for (int j = 0; j < n; ++j) {
                const double qr = row[2 * j], qi = row[2 * j + 1];
                curo[2 * j] = qr;
                curo[2 * j + 1] = qi;
                const double ur = below[2 * j] - 2.0 * qr;
                const double ui = below[2 * j + 1] - 2.0 * qi;
                const double rr = qr - c * ui;
                const double ri = qi + c * ur;
                row[2 * j] = rr * mr - ri * mi;
                row[2 * j + 1] = rr * mi + ri * mr;
            }
        } else {
            const double* yprev = row - stride;
            if (below) {
                for (int j = 0; j < n; ++j) {
                    const double qr = row[2 * j], qi = row[2 * j + 1];
                    curo[2 * j] = qr;
                    curo[2 * j + 1] = qi;
                    const double ur = prevo[2 * j] + below[2 * j] - 2.0 * qr;
                    const double ui = prevo[2 * j + 1] + below[2 * j + 1] - 2.0 * qi;
                    const double tr = qr - c * ui - c * yprev[2 * j + 1];
                    const double ti = qi + c * ur + c * yprev[2 * j];
                    row[2 * j] = tr * mr - ti * mi;
                    row[2 * j + 1] = tr * mi + ti * mr;
                }
            } else {
                for (int j = 0; j < n; ++j) {
                    const double qr = row[2 * j], qi = row[2 * j + 1];
                    const double ur = prevo[2 * j] - 2.0 * qr;
                    const double ui = prevo[2 * j + 1] - 2.0 * qi;
                    const double tr = qr - c * ui - c * yprev[2 * j + 1];
                    const double ti = qi + c * ur + c * yprev[2 * j];
                    row[2 * j] = tr * mr - ti * mi;
                    row[2 * j + 1] = tr * mi + ti * mr;
                }
            }
        }
        std::swap(prevo, curo);
    }
    for (int i = n - 2; i >= 0; --i) {
        double* row = base + i * stride;
        const double* next = row + stride;
        const double ur = f.upper[i].real(), ui = f.upper[i].imag();
        for (int j = 0; j < n; ++j) {
            const double nr = next[2 * j], ni = next[2 * j + 1];
            row[2 * j] -= ur * nr - ui * ni;
            row[2 * j + 1] -= ur * ni + ui * nr;
        }
    }
}

void CrankNicolson::step(ContinuumState& state) const {
    sweep_rows(state.psi, forward_);
    sweep_cols(state.psi, forward_);
    ++state.steps;
}

void CrankNicolson::step_reversed(ContinuumState& state) const {
    sweep_rows(state.psi, backward_);
    sweep_cols(state.psi, backward_);
    --state.steps;
}

void step(ContinuumState& state, const ContinuumConfig& cfg) {
    CrankNicolson(cfg).step(state);
}

double field_norm_sq(const ContinuumState& state, const ContinuumConfig& cfg) {
    const int n = state.n;
    const auto w = trapezoid_weights(n, cfg.dx_nm);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const cdouble* row = state.psi.data() + static_cast<std::size_t>(i) * n;
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += w[j] * std::norm(row[j]);
        total += w[i] * acc;
    }
    return total;
}

double exchange_residual(const ContinuumState& state) {
    const int n = state.n;
    const double s = state.statistics == Statistics::Fermion ? -1.0 : 1.0;
    double worst = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const cdouble a = state.psi[static_cast<std::size_t>(i) * n + j];
            const cdouble b = state.psi[static_cast<std::size_t>(j) * n + i];
            worst = std::max(worst, std::abs(b - s * a));
        }
    return worst;
}

EpLinear ep_linear(const ContinuumState& state, const ContinuumConfig& cfg) {
    const int n = state.n;
    const int mid = n / 2;             // index of x = 0
    const double dx = cfg.dx_nm;

    // Side weights: trapezoid on each half, the x=0 column split half/half.
    Eigen::VectorXd wa(mid + 1), wb(n - mid);
    for (int i = 0; i <= mid; ++i) wa[i] = (i == 0 || i == mid) ? 0.5 * dx : dx;
    for (int j = 0; j < n - mid; ++j) wb[j] = (j == 0 || j == n - mid - 1) ? 0.5 * dx : dx;

    using RowMat = Eigen::Matrix<cdouble, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMat> field(state.psi.data(), n, n);

    // Weighted Alice-x-Bob block: B(i,j) = sqrt(wa_i) psi(x_i, y_j) sqrt(wb_j)
    RowMat block = wa.cwiseSqrt().asDiagonal() *
                   field.block(0, mid, mid + 1, n - mid) *
                   wb.cwiseSqrt().asDiagonal();

    EpLinear out;
    out.p1 = 2.0 * block.squaredNorm();
    if (out.p1 < 1e-12) return out;

    // Tr rho_A^2 = (2/p1)^2 ||B^dag B||_F^2 (Gram structure keeps rho_A PSD).
    const int nb = static_cast<int>(block.cols());
    Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(nb, nb);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(block.adjoint());
    double frob2 = 0.0;
    for (int c = 0; c < nb; ++c) {
        frob2 += std::norm(gram(c, c));
        for (int r = c + 1; r < nb; ++r) frob2 += 2.0 * std::norm(gram(r, c));
    }
    const double tr_rho2 = frob2 * (2.0 / out.p1) * (2.0 / out.p1);
    out.ep = out.p1 * (1.0 - tr_rho2);
    return out;
}

Moments marginal_moments(const ContinuumState& state, const ContinuumConfig& cfg) {
    const int n = state.n;
    const auto w = trapezoid_weights(n, cfg.dx_nm);
    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const cdouble* row = state.psi.data() + static_cast<std::size_t>(i) * n;
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += w[j] * std::norm(row[j]);
        const double x = cfg.x_at(i);
        m0 += w[i] * acc;
        m1 += w[i] * x * acc;
        m2 += w[i] * x * x * acc;
    }
    Moments mom;
    mom.mean = m1 / m0;
    mom.variance = m2 / m0 - mom.mean * mom.mean;
    return mom;
}

ContinuumConfig continuum_preset(ContinuumScenario scenario, Statistics stats) {
    ContinuumConfig cfg;
    cfg.statistics = stats;
    if (scenario == ContinuumScenario::Comoving) {
        cfg.ek1_mev = 0.0;
        cfg.ek2_mev = 0.0;
        cfg.t_max_fs = 2000.0;
    } else {
        cfg.ek1_mev = -10.0;   // packet at +x0 runs left
        cfg.ek2_mev = +10.0;   // packet at -x0 runs right
        cfg.t_max_fs = 1000.0;
    }
    return cfg;
}

} // namespace qwalk
