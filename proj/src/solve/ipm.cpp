#include "solve/ipm.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "solve/standard_form.hpp"

namespace fcas {

namespace {

// ECOS-style algorithmic constants.
constexpr double kDeltaStat = 7e-8;   // static KKT regularization
constexpr double kGammaStep = 0.99;   // step scaling after line search
constexpr int kNitRef = 9;            // max iterative refinement steps
constexpr double kIrErrFact = 6.0;    // min factor of refinement decrease
constexpr double kLinSysAcc = 1e-14;  // refinement target accuracy
constexpr double kSafeguard = 500.0;  // max tolerated pres blow-up factor
constexpr double kStepMin = 1e-6;
constexpr double kStepMax = 0.999;
constexpr double kSigmaMin = 1e-4;
constexpr double kSigmaMax = 1.0;
constexpr double kLsEps = 1e-13;

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

struct IterInfo {
    int iter = 0;
    double pres = 0, dres = 0, gap = 0, relgap = NAN, mu = 0, kapovert = 0;
    double pcost = 0, dcost = 0;
    double pinfres = NAN, dinfres = NAN;
    double step = 0;
};

// Keep-the-best-iterate comparison (safeguard bookkeeping).
bool is_better(const IterInfo& a, const IterInfo& b) {
    if (!std::isnan(a.pinfres) && a.kapovert > 1.0) {
        if (!std::isnan(b.pinfres))
            return a.gap > 0 && b.gap > 0 && a.gap < b.gap && a.pinfres > 0 &&
                   a.pinfres < b.pres && a.mu > 0 && a.mu < b.mu;
        return a.gap > 0 && b.gap > 0 && a.gap < b.gap && a.mu > 0 && a.mu < b.mu;
    }
    return a.gap > 0 && b.gap > 0 && a.gap < b.gap && a.pres > 0 && a.pres < b.pres &&
           a.dres > 0 && a.dres < b.dres && a.kapovert > 0 && a.kapovert < b.kapovert &&
           a.mu > 0 && a.mu < b.mu;
}

}  // namespace

std::string to_string(IpmExit e) {
    switch (e) {
        case IpmExit::Optimal: return "optimal";
        case IpmExit::OptimalInaccurate: return "optimal_inaccurate";
        case IpmExit::PrimalInfeasible: return "primal_infeasible";
        case IpmExit::PrimalInfeasibleInaccurate: return "primal_infeasible_inaccurate";
        case IpmExit::DualInfeasible: return "dual_infeasible";
        case IpmExit::DualInfeasibleInaccurate: return "dual_infeasible_inaccurate";
        case IpmExit::MaxIters: return "max_iters";
        case IpmExit::NumericalTrouble: return "numerical_trouble";
    }
    return "unknown";
}

struct IpmSolver::Impl {
    int n = 0, p = 0, m = 0, n_lp = 0;
    std::vector<int> soc_dims;
    std::vector<int> cone_starts;  // offsets into z/s vectors
    SpMat A, G, At, Gt;            // equilibrated
    Vec c;                         // equilibrated
    Vec e_var, e_eq, e_g;          // equilibration scales

    SpMat K;  // upper triangle of the regularized KKT matrix
    Eigen::SimplicialLDLT<SpMat, Eigen::Upper> ldlt;
    std::vector<int> lp_slots;               // value slots of LP diagonal
    std::vector<std::vector<int>> soc_slots; // per cone, column-major upper block

    // Nesterov-Todd scaling state
    Vec lp_v, lp_sqrt_v;  // s/z and sqrt(s/z) on the LP cone
    struct SocScaling {
        double eta = 1, eta2 = 1, a = 1;
        Vec q;  // w_bar = (a, q), a^2 - |q|^2 = 1
    };
    std::vector<SocScaling> socs;

    // iterate
    Vec x, y, z, s, lambda;
    double tau = 1, kap = 1;

    // residual workspace
    Vec rx, ry, rz;
    double rt = 0, hresx = 0, hresy = 0, hresz = 0;
    double cx = 0, by = 0, hz = 0, nx = 0, ny = 0, nz = 0, ns = 0;
    double resx0 = 1, resy0 = 1, resz0 = 1;

    void build(bool equilibrate);
    int slot_of(int r, int col) const;
    void set_identity_scalings();
    void write_scalings_to_kkt();
    bool update_scalings();
    void scale_mul(const Vec& in, Vec& out) const;      // out = W * in
    void scale2_add(const Vec& in, Vec& out) const;     // out += W^2 * in
    void conic_product(const Vec& u, const Vec& v, Vec& out) const;
    void conic_division(const Vec& u, const Vec& w, Vec& out) const;
    double line_search(const Vec& lam, const Vec& ds, const Vec& dz, double tau_,
                       double dtau, double kap_, double dkap) const;
    void bring_to_cone(const Vec& r, Vec& out) const;
    int solve_kkt(const Vec& rhs, Vec& dx, Vec& dy, Vec& dz) const;
    void compute_residuals(const Vec& b, const Vec& h);
    IterInfo statistics(const IpmOptions& opt) const;
};

int IpmSolver::Impl::slot_of(int r, int col) const {
    const int* outer = K.outerIndexPtr();
    const int* inner = K.innerIndexPtr();
    for (int i = outer[col]; i < outer[col + 1]; ++i)
        if (inner[i] == r) return i;
    throw std::logic_error("KKT slot not found");
}

void IpmSolver::Impl::build(bool equilibrate) {
    m = static_cast<int>(G.rows());
    p = static_cast<int>(A.rows());
    n = static_cast<int>(G.cols());
    cone_starts.clear();
    int off = n_lp;
    for (int d : soc_dims) {
        cone_starts.push_back(off);
        off += d;
    }
    if (off != m) throw std::invalid_argument("cone dimensions do not sum to G rows");

    // Ruiz equilibration on the stacked [A; G], uniform over each SOC block
    // so cone membership is preserved.
    e_var = Vec::Ones(n);
    e_eq = Vec::Ones(p);
    e_g = Vec::Ones(m);
    if (equilibrate) {
        for (int round = 0; round < 3; ++round) {
            Vec rmax_eq = Vec::Zero(p), rmax_g = Vec::Zero(m), cmax = Vec::Zero(n);
            for (int j = 0; j < A.outerSize(); ++j)
                for (SpMat::InnerIterator it(A, j); it; ++it) {
                    double v = std::abs(it.value()) / (e_eq[it.row()] * e_var[j]);
                    rmax_eq[it.row()] = std::max(rmax_eq[it.row()], v);
                    cmax[j] = std::max(cmax[j], v);
                }
            for (int j = 0; j < G.outerSize(); ++j)
                for (SpMat::InnerIterator it(G, j); it; ++it) {
                    double v = std::abs(it.value()) / (e_g[it.row()] * e_var[j]);
                    rmax_g[it.row()] = std::max(rmax_g[it.row()], v);
                    cmax[j] = std::max(cmax[j], v);
                }
            for (size_t k = 0; k < soc_dims.size(); ++k) {
                double mx = 0;
                for (int i = 0; i < soc_dims[k]; ++i)
                    mx = std::max(mx, rmax_g[cone_starts[k] + i]);
                for (int i = 0; i < soc_dims[k]; ++i) rmax_g[cone_starts[k] + i] = mx;
            }
            for (int i = 0; i < p; ++i)
                if (rmax_eq[i] > 0) e_eq[i] *= std::sqrt(rmax_eq[i]);
            for (int i = 0; i < m; ++i)
                if (rmax_g[i] > 0) e_g[i] *= std::sqrt(rmax_g[i]);
            for (int j = 0; j < n; ++j)
                if (cmax[j] > 0) e_var[j] *= std::sqrt(cmax[j]);
        }
        for (int j = 0; j < A.outerSize(); ++j)
            for (SpMat::InnerIterator it(A, j); it; ++it)
                it.valueRef() /= e_eq[it.row()] * e_var[j];
        for (int j = 0; j < G.outerSize(); ++j)
            for (SpMat::InnerIterator it(G, j); it; ++it)
                it.valueRef() /= e_g[it.row()] * e_var[j];
        c = c.cwiseQuotient(e_var);
    }
    At = A.transpose();
    Gt = G.transpose();

    // KKT pattern: [ dI  A'  G' ; A  -dI  0 ; G  0  -W^2-dI ], upper triangle.
    // SOC blocks are stored dense so the pattern survives scaling updates.
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(n + p + A.nonZeros() + G.nonZeros() + n_lp + 9 * soc_dims.size());
    for (int j = 0; j < n; ++j) trip.emplace_back(j, j, kDeltaStat);
    for (int j = 0; j < A.outerSize(); ++j)
        for (SpMat::InnerIterator it(A, j); it; ++it)
            trip.emplace_back(j, n + it.row(), it.value());
    for (int j = 0; j < G.outerSize(); ++j)
        for (SpMat::InnerIterator it(G, j); it; ++it)
            trip.emplace_back(j, n + p + it.row(), it.value());
    for (int i = 0; i < p; ++i) trip.emplace_back(n + i, n + i, -kDeltaStat);
    for (int i = 0; i < n_lp; ++i)
        trip.emplace_back(n + p + i, n + p + i, -1.0 - kDeltaStat);
    for (size_t k = 0; k < soc_dims.size(); ++k) {
        int r0 = n + p + cone_starts[k];
        for (int jj = 0; jj < soc_dims[k]; ++jj)
            for (int ii = 0; ii <= jj; ++ii)
                trip.emplace_back(r0 + ii, r0 + jj, ii == jj ? -1.0 - kDeltaStat : 0.0);
    }
    const int dimK = n + p + m;
    K.resize(dimK, dimK);
    K.setFromTriplets(trip.begin(), trip.end());
    K.makeCompressed();

    lp_slots.resize(n_lp);
    for (int i = 0; i < n_lp; ++i) lp_slots[i] = slot_of(n + p + i, n + p + i);
    soc_slots.resize(soc_dims.size());
    for (size_t k = 0; k < soc_dims.size(); ++k) {
        int r0 = n + p + cone_starts[k];
        for (int jj = 0; jj < soc_dims[k]; ++jj)
            for (int ii = 0; ii <= jj; ++ii)
                soc_slots[k].push_back(slot_of(r0 + ii, r0 + jj));
    }
    ldlt.analyzePattern(K);

    lp_v.resize(n_lp);
    lp_sqrt_v.resize(n_lp);
    socs.resize(soc_dims.size());
    for (size_t k = 0; k < soc_dims.size(); ++k) socs[k].q.resize(soc_dims[k] - 1);
}

void IpmSolver::Impl::set_identity_scalings() {
    lp_v.setOnes();
    lp_sqrt_v.setOnes();
    for (auto& sc : socs) {
        sc.eta = sc.eta2 = sc.a = 1.0;
        sc.q.setZero();
    }
}

void IpmSolver::Impl::write_scalings_to_kkt() {
    double* vals = K.valuePtr();
    for (int i = 0; i < n_lp; ++i) vals[lp_slots[i]] = -lp_v[i] - kDeltaStat;
    for (size_t k = 0; k < socs.size(); ++k) {
        const auto& sc = socs[k];
        // W^2 = eta^2 (2 w w' - J) with w = (a, q); J = diag(1, -I).
        int idx = 0;
        int d = soc_dims[k];
        for (int jj = 0; jj < d; ++jj) {
            double wj = jj == 0 ? sc.a : sc.q[jj - 1];
            for (int ii = 0; ii <= jj; ++ii) {
                double wi = ii == 0 ? sc.a : sc.q[ii - 1];
                double jterm = ii != jj ? 0.0 : (ii == 0 ? 1.0 : -1.0);
                double w2 = sc.eta2 * (2.0 * wi * wj - jterm);
                vals[soc_slots[k][idx++]] = -w2 - (ii == jj ? kDeltaStat : 0.0);
            }
        }
    }
}

bool IpmSolver::Impl::update_scalings() {
    for (int i = 0; i < n_lp; ++i) {
        if (!(s[i] > 0) || !(z[i] > 0)) return false;
        lp_v[i] = s[i] / z[i];
        lp_sqrt_v[i] = std::sqrt(lp_v[i]);
    }
    for (size_t k = 0; k < socs.size(); ++k) {
        auto& sc = socs[k];
        int st = cone_starts[k], d = soc_dims[k];
        double sres = s[st] * s[st] - s.segment(st + 1, d - 1).squaredNorm();
        double zres = z[st] * z[st] - z.segment(st + 1, d - 1).squaredNorm();
        if (sres <= 0 || zres <= 0) return false;
        double snorm = std::sqrt(sres), znorm = std::sqrt(zres);
        Vec sbar = s.segment(st, d) / snorm;
        Vec zbar = z.segment(st, d) / znorm;
        sc.eta2 = snorm / znorm;
        sc.eta = std::sqrt(sc.eta2);
        double gamma = std::sqrt(0.5 * (1.0 + sbar.dot(zbar)));
        sc.a = (0.5 / gamma) * (sbar[0] + zbar[0]);
        sc.q = (0.5 / gamma) * (sbar.tail(d - 1) - zbar.tail(d - 1));
    }
    scale_mul(z, lambda);
    return true;
}

void IpmSolver::Impl::scale_mul(const Vec& in, Vec& out) const {
    out.resize(m);
    out.head(n_lp) = lp_sqrt_v.cwiseProduct(in.head(n_lp));
    for (size_t k = 0; k < socs.size(); ++k) {
        const auto& sc = socs[k];
        int st = cone_starts[k], d = soc_dims[k];
        double zeta = sc.q.dot(in.segment(st + 1, d - 1));
        double factor = in[st] + zeta / (1.0 + sc.a);
        out[st] = sc.eta * (sc.a * in[st] + zeta);
        out.segment(st + 1, d - 1) = sc.eta * (in.segment(st + 1, d - 1) + factor * sc.q);
    }
}

void IpmSolver::Impl::scale2_add(const Vec& in, Vec& out) const {
    out.head(n_lp) += lp_v.cwiseProduct(in.head(n_lp));
    for (size_t k = 0; k < socs.size(); ++k) {
        const auto& sc = socs[k];
        int st = cone_starts[k], d = soc_dims[k];
        // W^2 v = eta^2 (2 (w.v) w - J v)
        double wv = sc.a * in[st] + sc.q.dot(in.segment(st + 1, d - 1));
        out[st] += sc.eta2 * (2.0 * wv * sc.a - in[st]);
        out.segment(st + 1, d - 1) +=
            sc.eta2 * (2.0 * wv * sc.q + in.segment(st + 1, d - 1));
    }
}

void IpmSolver::Impl::conic_product(const Vec& u, const Vec& v, Vec& out) const {
    out.resize(m);
    out.head(n_lp) = u.head(n_lp).cwiseProduct(v.head(n_lp));
    for (size_t k = 0; k < socs.size(); ++k) {
        int st = cone_starts[k], d = soc_dims[k];
        out[st] = u.segment(st, d).dot(v.segment(st, d));
        out.segment(st + 1, d - 1) =
            u[st] * v.segment(st + 1, d - 1) + v[st] * u.segment(st + 1, d - 1);
    }
}

void IpmSolver::Impl::conic_division(const Vec& u, const Vec& w, Vec& out) const {
    out.resize(m);
    out.head(n_lp) = w.head(n_lp).cwiseQuotient(u.head(n_lp));
    for (size_t k = 0; k < socs.size(); ++k) {
        int st = cone_starts[k], d = soc_dims[k];
        double u0 = u[st], w0 = w[st];
        double rho = u0 * u0 - u.segment(st + 1, d - 1).squaredNorm();
        double zeta = u.segment(st + 1, d - 1).dot(w.segment(st + 1, d - 1));
        out[st] = (u0 * w0 - zeta) / rho;
        double factor = (zeta / u0 - w0) / rho;
        out.segment(st + 1, d - 1) =
            factor * u.segment(st + 1, d - 1) + w.segment(st + 1, d - 1) / u0;
    }
}

double IpmSolver::Impl::line_search(const Vec& lam, const Vec& ds, const Vec& dz,
                                    double tau_, double dtau, double kap_,
                                    double dkap) const {
    double alpha = 10.0;
    if (n_lp > 0) {
        double rhomin = (ds.head(n_lp).cwiseQuotient(lam.head(n_lp))).minCoeff();
        double sigmin = (dz.head(n_lp).cwiseQuotient(lam.head(n_lp))).minCoeff();
        if (-sigmin > -rhomin)
            alpha = sigmin < 0 ? 1.0 / (-sigmin) : 1.0 / kLsEps;
        else
            alpha = rhomin < 0 ? 1.0 / (-rhomin) : 1.0 / kLsEps;
    }
    double tlim = -tau_ / dtau, klim = -kap_ / dkap;
    if (tlim > 0 && tlim < alpha) alpha = tlim;
    if (klim > 0 && klim < alpha) alpha = klim;
    for (size_t k = 0; k < socs.size(); ++k) {
        int st = cone_starts[k], d = soc_dims[k];
        double lknorm2 =
            lam[st] * lam[st] - lam.segment(st + 1, d - 1).squaredNorm();
        if (lknorm2 <= 0) continue;
        double lknorm = std::sqrt(lknorm2);
        Vec lkbar = lam.segment(st, d) / lknorm;
        double lk_ds = lkbar[0] * ds[st] - lkbar.tail(d - 1).dot(ds.segment(st + 1, d - 1));
        double lk_dz = lkbar[0] * dz[st] - lkbar.tail(d - 1).dot(dz.segment(st + 1, d - 1));
        double f1 = (lk_ds + ds[st]) / (lkbar[0] + 1.0);
        double rho0 = lk_ds / lknorm;
        double rhonorm =
            ((ds.segment(st + 1, d - 1) - f1 * lkbar.tail(d - 1)) / lknorm).norm() - rho0;
        double f2 = (lk_dz + dz[st]) / (lkbar[0] + 1.0);
        double sig0 = lk_dz / lknorm;
        double signorm =
            ((dz.segment(st + 1, d - 1) - f2 * lkbar.tail(d - 1)) / lknorm).norm() - sig0;
        double conic_step = std::max(0.0, std::max(rhonorm, signorm));
        if (conic_step != 0.0) alpha = std::min(alpha, 1.0 / conic_step);
    }
    return std::clamp(alpha, kStepMin, kStepMax);
}

void IpmSolver::Impl::bring_to_cone(const Vec& r, Vec& out) const {
    double alpha = -kGammaStep;
    for (int i = 0; i < n_lp; ++i)
        if (r[i] <= 0 && -r[i] > alpha) alpha = -r[i];
    for (size_t k = 0; k < socs.size(); ++k) {
        int st = cone_starts[k], d = soc_dims[k];
        double cres = r[st] - r.segment(st + 1, d - 1).norm();
        if (cres <= 0 && -cres > alpha) alpha = -cres;
    }
    alpha += 1.0;
    out = r;
    out.head(n_lp).array() += alpha;
    for (size_t k = 0; k < socs.size(); ++k) out[cone_starts[k]] += alpha;
}

int IpmSolver::Impl::solve_kkt(const Vec& rhs, Vec& dx, Vec& dy, Vec& dz) const {
    Vec sol = ldlt.solve(rhs);
    const double threshold = (1.0 + rhs.lpNorm<Eigen::Infinity>()) * kLinSysAcc;
    double nerr_prev = std::numeric_limits<double>::max();
    Vec ref;
    int k_ref;
    for (k_ref = 0; k_ref <= kNitRef; ++k_ref) {
        Vec e = rhs - K.selfadjointView<Eigen::Upper>() * sol;
        double nerr = e.lpNorm<Eigen::Infinity>();
        if (k_ref > 0 && nerr > nerr_prev) {
            sol -= ref;
            --k_ref;
            break;
        }
        if (k_ref == kNitRef || nerr < threshold ||
            (k_ref > 0 && nerr_prev < kIrErrFact * nerr))
            break;
        nerr_prev = nerr;
        ref = ldlt.solve(e);
        sol += ref;
    }
    dx = sol.head(n);
    dy = sol.segment(n, p);
    dz = sol.tail(m);
    return k_ref;
}

void IpmSolver::Impl::compute_residuals(const Vec& b, const Vec& h) {
    rx = -(Gt * z);
    if (p > 0) rx -= At * y;
    hresx = rx.norm();
    rx -= tau * c;
    if (p > 0) {
        ry = A * x;
        hresy = ry.norm();
        ry -= tau * b;
    } else {
        ry.resize(0);
        hresy = 0;
    }
    rz = s + G * x;
    hresz = rz.norm();
    rz -= tau * h;
    cx = c.dot(x);
    by = p > 0 ? b.dot(y) : 0.0;
    hz = h.dot(z);
    rt = kap + cx + by + hz;
    nx = x.norm();
    ny = y.norm();
    nz = z.norm();
    ns = s.norm();
}

IterInfo IpmSolver::Impl::statistics(const IpmOptions& opt) const {
    IterInfo i;
    i.gap = s.dot(z);
    i.mu = (i.gap + kap * tau) / (n_lp + static_cast<int>(socs.size()) + 1);
    i.kapovert = kap / tau;
    i.pcost = cx / tau;
    i.dcost = -(hz + by) / tau;
    if (i.pcost < 0)
        i.relgap = i.gap / (-i.pcost);
    else if (i.dcost > 0)
        i.relgap = i.gap / i.dcost;
    else
        i.relgap = NAN;
    double nry = p > 0 ? ry.norm() / std::max(resy0 + nx, 1.0) : 0.0;
    double nrz = rz.norm() / std::max(resz0 + nx + ns, 1.0);
    i.pres = std::max(nry, nrz) / tau;
    i.dres = rx.norm() / std::max(resx0 + ny + nz, 1.0) / tau;
    if ((hz + by) / std::max(ny + nz, 1.0) < -opt.reltol)
        i.pinfres = hresx / std::max(ny + nz, 1.0);
    if (cx / std::max(nx, 1.0) < -opt.reltol)
        i.dinfres = std::max(hresy / std::max(nx, 1.0), hresz / std::max(nx + ns, 1.0));
    return i;
}

namespace {

enum class Check { NotYet, Optimal, PrimalInf, DualInf };

Check check_exit(const IterInfo& i, double tau, double kap, double cx, double by,
                 double hz, bool reduced, const IpmOptions& opt) {
    double feastol = reduced ? opt.feastol_inacc : opt.feastol;
    double abstol = reduced ? opt.abstol_inacc : opt.abstol;
    double reltol = reduced ? opt.reltol_inacc : opt.reltol;
    if ((-cx > 0 || -by - hz >= -abstol) && i.pres < feastol && i.dres < feastol &&
        (i.gap < abstol || (!std::isnan(i.relgap) && i.relgap < reltol)))
        return Check::Optimal;
    if (!std::isnan(i.dinfres) && i.dinfres < feastol && tau < kap)
        return Check::DualInf;
    if (!std::isnan(i.pinfres) && i.pinfres < feastol &&
        (tau < kap || (tau < feastol && kap < feastol)))
        return Check::PrimalInf;
    return Check::NotYet;
}

}  // namespace

IpmSolver::IpmSolver(SpMat A, SpMat G, Vec c, int n_lp, std::vector<int> soc_dims,
                     bool equilibrate)
    : impl_(new Impl) {
    impl_->A = std::move(A);
    impl_->G = std::move(G);
    impl_->c = std::move(c);
    impl_->n_lp = n_lp;
    impl_->soc_dims = std::move(soc_dims);
    impl_->build(equilibrate);
}

IpmSolver::IpmSolver(const StandardForm& sf, bool equilibrate)
    : IpmSolver(sf.A, sf.G, sf.c, sf.n_lp, sf.soc_dims, equilibrate) {}

IpmSolver::~IpmSolver() = default;

int IpmSolver::n() const { return impl_->n; }
int IpmSolver::p() const { return impl_->p; }
int IpmSolver::m() const { return impl_->m; }

IpmResult IpmSolver::solve(const Vec& b_in, const Vec& h_in, const IpmOptions& opt) {
    Impl& w = *impl_;
    IpmResult res;
    if (b_in.size() != w.p || h_in.size() != w.m)
        throw std::invalid_argument("solve: b/h dimension mismatch");
    const Vec b = b_in.cwiseQuotient(w.e_eq);
    const Vec h = h_in.cwiseQuotient(w.e_g);

    w.resx0 = std::max(1.0, w.c.norm());
    w.resy0 = std::max(1.0, b.norm());
    w.resz0 = std::max(1.0, h.norm());

    const int dimK = w.n + w.p + w.m;
    Vec rhs1(dimK), rhs2(dimK);
    rhs1.setZero();
    rhs1.segment(w.n, w.p) = b;
    rhs1.tail(w.m) = h;
    rhs2.setZero();
    rhs2.head(w.n) = -w.c;

    w.set_identity_scalings();
    w.write_scalings_to_kkt();
    w.ldlt.factorize(w.K);
    if (w.ldlt.info() != Eigen::Success) {
        res.exit = IpmExit::NumericalTrouble;
        return res;
    }

    Vec dx1(w.n), dy1(w.p), dz1(w.m), dx2(w.n), dy2(w.p), dz2(w.m);
    w.solve_kkt(rhs1, dx1, dy1, dz1);
    w.x = dx1;
    w.bring_to_cone(-dz1, w.s);
    w.solve_kkt(rhs2, dx2, dy2, dz2);
    w.y = dy2;
    w.bring_to_cone(dz2, w.z);
    w.tau = 1.0;
    w.kap = 1.0;
    rhs1.head(w.n) = -w.c;

    struct Snapshot {
        Vec x, y, z, s;
        double tau, kap;
        IterInfo info;
    };
    Snapshot best;
    bool has_best = false;
    double pres_prev = std::numeric_limits<double>::max();
    IterInfo info;
    double step = 0.0;
    IpmExit code = IpmExit::MaxIters;
    Vec W_dz(w.m), ds_by_W(w.m), ds_final(w.m), ds1(w.m), ds2v(w.m);

    auto restore_best = [&]() {
        if (!has_best) return;
        w.x = best.x;
        w.y = best.y;
        w.z = best.z;
        w.s = best.s;
        w.tau = best.tau;
        w.kap = best.kap;
        info = best.info;
    };
    auto exit_with = [&](Check ck, bool reduced) {
        switch (ck) {
            case Check::Optimal:
                return reduced ? IpmExit::OptimalInaccurate : IpmExit::Optimal;
            case Check::PrimalInf:
                return reduced ? IpmExit::PrimalInfeasibleInaccurate : IpmExit::PrimalInfeasible;
            case Check::DualInf:
                return reduced ? IpmExit::DualInfeasibleInaccurate : IpmExit::DualInfeasible;
            default:
                return IpmExit::NumericalTrouble;
        }
    };

    int iter = 0;
    for (iter = 0; iter <= opt.max_iters; ++iter) {
        w.compute_residuals(b, h);
        info = w.statistics(opt);
        info.iter = iter;
        info.step = step;

        // Safeguard: retreat to the best iterate on a blow-up.
        if (iter > 0 && (info.pres > kSafeguard * pres_prev || info.gap < 0)) {
            restore_best();
            w.compute_residuals(b, h);
            info = w.statistics(opt);
            Check ck = check_exit(info, w.tau, w.kap, w.cx, w.by, w.hz, true, opt);
            code = ck == Check::NotYet ? IpmExit::NumericalTrouble : exit_with(ck, true);
            break;
        }
        pres_prev = info.pres;

        Check ck = check_exit(info, w.tau, w.kap, w.cx, w.by, w.hz, false, opt);
        if (ck != Check::NotYet) {
            code = exit_with(ck, false);
            break;
        }
        if (iter > 0 && step == kStepMin * kGammaStep) {
            restore_best();
            w.compute_residuals(b, h);
            info = w.statistics(opt);
            ck = check_exit(info, w.tau, w.kap, w.cx, w.by, w.hz, true, opt);
            code = ck == Check::NotYet ? IpmExit::NumericalTrouble : exit_with(ck, true);
            break;
        }
        if (iter == opt.max_iters) {
            if (has_best && !is_better(info, best.info)) {
                restore_best();
                w.compute_residuals(b, h);
                info = w.statistics(opt);
            }
            ck = check_exit(info, w.tau, w.kap, w.cx, w.by, w.hz, true, opt);
            code = ck == Check::NotYet ? IpmExit::MaxIters : exit_with(ck, true);
            break;
        }
        if (std::isnan(info.pcost)) {
            if (has_best) {
                restore_best();
                w.compute_residuals(b, h);
                info = w.statistics(opt);
                ck = check_exit(info, w.tau, w.kap, w.cx, w.by, w.hz, true, opt);
                code = ck == Check::NotYet ? IpmExit::NumericalTrouble : exit_with(ck, true);
            } else {
                code = IpmExit::NumericalTrouble;
            }
            break;
        }

        if (!has_best || is_better(info, best.info)) {
            best = {w.x, w.y, w.z, w.s, w.tau, w.kap, info};
            has_best = true;
        }

        if (!w.update_scalings()) {
            restore_best();
            w.compute_residuals(b, h);
            info = w.statistics(opt);
            Check c2 = check_exit(info, w.tau, w.kap, w.cx, w.by, w.hz, true, opt);
            code = c2 == Check::NotYet ? IpmExit::NumericalTrouble : exit_with(c2, true);
            break;
        }
        w.write_scalings_to_kkt();
        w.ldlt.factorize(w.K);
        if (w.ldlt.info() != Eigen::Success) {
            code = IpmExit::NumericalTrouble;
            break;
        }

        w.solve_kkt(rhs1, dx1, dy1, dz1);

        // Affine (predictor) direction: rhs = [rx; -ry; s - rz].
        rhs2.head(w.n) = w.rx;
        rhs2.segment(w.n, w.p) = -w.ry;
        rhs2.tail(w.m) = w.s - w.rz;
        w.solve_kkt(rhs2, dx2, dy2, dz2);

        double dtau_denom =
            w.kap / w.tau - w.c.dot(dx1) - b.dot(dy1) - h.dot(dz1);
        double dtauaff =
            (w.rt - w.kap + w.c.dot(dx2) + b.dot(dy2) + h.dot(dz2)) / dtau_denom;
        dz2 += dtauaff * dz1;
        w.scale_mul(dz2, W_dz);
        ds_by_W = -W_dz - w.lambda;
        double dkapaff = -w.kap - w.kap / w.tau * dtauaff;
        double step_aff =
            w.line_search(w.lambda, ds_by_W, W_dz, w.tau, dtauaff, w.kap, dkapaff);
        double sigma = std::clamp(std::pow(1.0 - step_aff, 3), kSigmaMin, kSigmaMax);

        // Combined (corrector) direction.
        w.conic_product(w.lambda, w.lambda, ds1);
        w.conic_product(ds_by_W, W_dz, ds2v);
        double sigmamu = sigma * info.mu;
        ds1 += ds2v;
        ds1.head(w.n_lp).array() -= sigmamu;
        for (size_t k = 0; k < w.socs.size(); ++k) ds1[w.cone_starts[k]] -= sigmamu;
        w.conic_division(w.lambda, ds1, ds_by_W);  // ds_by_W = lambda \ ds1
        w.scale_mul(ds_by_W, ds1);                 // ds1 = W (lambda \ ds1)
        double one_minus_sigma = 1.0 - sigma;
        rhs2.head(w.n) *= one_minus_sigma;
        rhs2.segment(w.n, w.p) *= one_minus_sigma;
        rhs2.tail(w.m) = -one_minus_sigma * w.rz + ds1;
        w.solve_kkt(rhs2, dx2, dy2, dz2);

        double bkap = w.kap * w.tau + dkapaff * dtauaff - sigmamu;
        double dtau = (one_minus_sigma * w.rt - bkap / w.tau + w.c.dot(dx2) +
                       b.dot(dy2) + h.dot(dz2)) /
                      dtau_denom;
        dx2 += dtau * dx1;
        dy2 += dtau * dy1;
        dz2 += dtau * dz1;
        w.scale_mul(dz2, W_dz);
        ds_by_W = -(ds_by_W + W_dz);
        double dkap = -(bkap + w.kap * dtau) / w.tau;
        step = kGammaStep *
               w.line_search(w.lambda, ds_by_W, W_dz, w.tau, dtau, w.kap, dkap);
        w.scale_mul(ds_by_W, ds_final);

        w.x += step * dx2;
        w.y += step * dy2;
        w.z += step * dz2;
        w.s += step * ds_final;
        w.kap += step * dkap;
        w.tau += step * dtau;
    }

    // Backscale: divide by tau, then undo the equilibration.
    res.x = (w.x / w.tau).cwiseQuotient(w.e_var);
    res.y = (w.y / w.tau).cwiseQuotient(w.e_eq);
    res.z = (w.z / w.tau).cwiseQuotient(w.e_g);
    res.s = (w.s / w.tau).cwiseProduct(w.e_g);
    res.exit = code;
    res.pobj = info.pcost;
    res.dobj = info.dcost;
    res.stats.iterations = iter;
    res.stats.pres = info.pres;
    res.stats.dres = info.dres;
    res.stats.gap = info.gap;
    res.stats.relgap = std::isnan(info.relgap) ? 0.0 : info.relgap;
    return res;
}

}  // namespace fcas
