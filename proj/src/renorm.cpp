#include "blab/renorm.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace blab {

namespace {

constexpr long double kPi = std::numbers::pi_v<long double>;

// Signed product of integer powers, accumulated in log space so that factors
// like sigmaP^2m sigmaQ^2n never overflow intermediately.
long double ppow(std::initializer_list<std::pair<double, long>> factors) {
    long double lg = 0;
    int sgn = 1;
    for (auto [b, e] : factors) {
        lg += e * std::log(std::fabs((long double)b));
        if (b < 0 && (e & 1)) sgn = -sgn;
    }
    long double v = std::exp(lg);
    return sgn < 0 ? -v : v;
}

void poly_evalL(const PolyMap& p, const long double w[3], long double out[3]) {
    out[0] = out[1] = out[2] = 0;
    for (const auto& t : p.terms) {
        long double v = t.coeff;
        for (int k = 0; k < t.ex; ++k) v *= w[0];
        for (int k = 0; k < t.ey; ++k) v *= w[1];
        for (int k = 0; k < t.ez; ++k) v *= w[2];
        out[t.comp - 1] += v;
    }
}

}  // namespace

std::vector<SojournState> find_sojourn_raw(double sigmaP, double lambdaQ, double target, int maxN,
                                           double tol) {
    if (!(sigmaP > 1) || !(lambdaQ > 0 && lambdaQ < 1) || !(target > 0))
        throw std::invalid_argument("find_sojourn: need sigmaP>1, lambdaQ in (0,1), target>0");
    long double lsP = std::log((long double)sigmaP);
    long double llQ = std::log((long double)lambdaQ);
    long double lt = std::log((long double)target);

    std::vector<SojournState> out;
    long double best = std::numeric_limits<long double>::infinity();
    for (int m = 1;; ++m) {
        long double ideal = (m * lsP - lt) / (-llQ);
        long nc = std::llround((double)ideal);
        if (ideal > maxN + 1.0L) break;
        for (long n = std::max(1L, nc - 1); n <= nc + 1; ++n) {
            if (n > maxN) continue;
            long double lval = m * lsP + n * llQ;
            long double err = std::fabs(std::exp(lval) - (long double)target);
            // keep m within one sigmaP-step of the ideal sojourn relation
            if ((lval - lt) / lsP >= 1.0L) continue;
            if (err < best * (1 - 1e-15L)) {
                best = err;
                SojournState s;
                s.m = m;
                s.n = int(n);
                s.sojournError = double(err);
                out.push_back(s);
            }
        }
    }
    if (out.empty() || out.back().sojournError > tol)
        throw std::runtime_error("find_sojourn: no pair within tol; best error " +
                                 std::to_string(out.empty() ? -1.0 : out.back().sojournError));
    return out;
}

std::vector<SojournState> find_sojourn(const CycleModel& m, double xi, int maxN, double tol) {
    return find_sojourn_raw(m.sigmaP, m.lambdaQ, xi / m.tau(), maxN, tol);
}

SojournState adjust_arguments(const CycleModel& m, SojournState s) {
    long double mphi = (long double)s.m * (long double)m.phiP;
    long double fracP = mphi - std::floor(mphi);
    s.alphaK = double((kPi / 4 + s.zeta - 2 * kPi * fracP) / (2 * kPi * s.m));
    long double nphi = (long double)s.n * (long double)m.phiQ;
    long double fracQ = nphi - std::floor(nphi);
    s.betaK = double((kPi / 2 + s.vartheta - 2 * kPi * fracQ) / (2 * kPi * s.n));
    // reduced arguments: 2 pi m phiPk = pi/4 + zeta (mod 2 pi), 2 pi n phiQk = pi/2 + vartheta
    s.ctFrak = std::cos(kPi / 4 + (long double)s.zeta);
    s.stFrak = std::sin(kPi / 4 + (long double)s.zeta);
    s.cFrak = -std::sin((long double)s.vartheta);
    s.sFrak = std::cos((long double)s.vartheta);
    s.adjusted = true;
    return s;
}

Reparam reparam_at(const CycleModel& m, const SojournState& s, double mu) {
    if (!s.adjusted) throw std::logic_error("reparam_at: call adjust_arguments first");
    Reparam r;
    r.alphaK = s.alphaK;
    r.betaK = s.betaK;
    double cs = s.cFrak, sn = s.sFrak, ct = s.ctFrak, st = s.stFrak;
    r.rhoTilde2 = 0.5 * m.Htilde.secondDerivAt0(2, 0, 0) * (cs - sn) * (cs - sn) +
                  0.5 * m.Htilde.secondDerivAt0(2, 2, 2) * (sn + cs) * (sn + cs);
    r.rhoTilde3 = 0.5 * m.Htilde.secondDerivAt0(3, 0, 0) * (sn - cs) * (sn - cs) +
                  0.5 * m.Htilde.secondDerivAt0(3, 2, 2) * (sn + cs) * (sn + cs);

    double lPm = double(ppow({{m.lambdaP, s.m}}));
    double lQn = double(ppow({{m.lambdaQ, s.n}}));
    double lQ2n = double(ppow({{m.lambdaQ, 2L * s.n}}));
    double sQmn = double(ppow({{m.sigmaQ, -s.n}}));
    double sPmInv = double(ppow({{m.sigmaP, -s.m}}));
    double scale2 = double(ppow({{m.sigmaQ, -2L * s.n}, {m.sigmaP, -2L * s.m}}));

    r.muBar = {-lPm * m.a1, sQmn + scale2 * mu - lPm * m.b1, -lPm * m.c1};
    r.nuBar = {-lQn * (m.alpha1 * (cs - sn) + m.alpha3 * (sn + cs)),
               sPmInv * (ct + st) - lQ2n * r.rhoTilde2,
               sPmInv * (ct - st) - lQn * m.gamma3 * (cs + sn) - lQ2n * r.rhoTilde3};
    return r;
}

UnfoldingParams unfolding_at(const CycleModel& m, const SojournState& s, double mu, double rho) {
    Reparam r = reparam_at(m, s, mu);
    UnfoldingParams u;
    u.muBar = r.muBar;
    u.nuBar = r.nuBar;
    u.alpha = r.alphaK;
    u.beta = r.betaK;
    u.rho = rho;
    return u;
}

Chart::Chart(const CycleModel& m, const SojournState& s, const SigmaVector& sigma) : sigma_(sigma) {
    s1_ = ppow({{m.sigmaP, -s.m}, {m.sigmaQ, -s.n}});
    s2_ = s1_ * s1_;
    sQn_ = ppow({{m.sigmaQ, -s.n}});
}

LVec3 Chart::apply(const Vec3& v) const {
    return {1 + s1_ * v.x, sQn_ + s2_ * v.y, 1 + s1_ * v.z};
}

Vec3 Chart::applyInv(const LVec3& q) const {
    return {double((q.x - 1) / s1_), double((q.y - sQn_) / s2_), double((q.z - 1) / s1_)};
}

LVec3 Chart::applyPhi(const Vec3& v) const { return apply(theta_sigma(sigma_, v)); }

Vec3 Chart::applyPhiInv(const LVec3& q) const { return theta_sigma_inv(sigma_, applyInv(q)); }

double Chart::scale1() const {
    if (std::fabs(s1_) < 1e-300L)
        throw std::range_error("chart: scale1 below 1e-300, use the log-domain interface");
    return double(s1_);
}

double Chart::scale2() const {
    if (std::fabs(s2_) < 1e-300L)
        throw std::range_error("chart: scale2 below 1e-300, use the log-domain interface");
    return double(s2_);
}

Chart chart_psi(const CycleModel& m, const SojournState& s) {
    // Theta uses only sigma1, sigma2, sigma5, none of which depend on xi.
    return Chart(m, s, sigma_params(m, 1.0));
}

DirectReturn renormalized_map_direct(const CycleModel& m, const SojournState& s, double mu,
                                     double rho, const Vec3& v) {
    if (!s.adjusted) throw std::logic_error("renormalized_map_direct: call adjust_arguments first");
    Chart chart = chart_psi(m, s);
    UnfoldingParams u = unfolding_at(m, s, mu, rho);
    Vec3 w0 = chart.apply(v).toVec3();
    OrbitRecord rec = return_map_orbit(m, u, s.n, s.m, w0);
    DirectReturn dr;
    dr.admissible = rec.admissible;
    dr.clean = rec.cleanSupports;
    dr.escapeIndex = rec.escapeIndex;
    dr.out = chart.applyInv({rec.final.x, rec.final.y, rec.final.z});
    return dr;
}

double direct_noise_bound(const CycleModel& m, const SojournState& s) {
    long double amp = std::max(ppow({{m.sigmaP, 2L * s.m}, {std::fabs(m.sigmaQ), s.n}}),
                               50.0L * ppow({{m.sigmaP, s.m}, {std::fabs(m.sigmaQ), s.n}}));
    long double b = (s.m + s.n + 8) * 2.3e-16L * amp;
    return b > 1e300L ? 1e300 : double(b);
}

Vec3 return_map_closed_form(const CycleModel& M, const SojournState& s, double mu, const Vec3& v) {
    if (!s.adjusted) throw std::logic_error("return_map_closed_form: call adjust_arguments first");
    const long m = s.m, n = s.n;
    const long double c = s.cFrak, sn = s.sFrak, ct = s.ctFrak, st = s.stFrak;
    const long double x = v.x, y = v.y, z = v.z;
    const long double Xp = sn * x + c * z;   // rotated inputs
    const long double Xm = c * x - sn * z;

    const long double P1 = ppow({{M.lambdaP, m}, {M.lambdaQ, n}});
    const long double P2 = ppow({{M.lambdaP, m}, {M.sigmaP, -m}});
    const long double P3 = ppow({{M.sigmaP, m}, {M.lambdaQ, n}});
    const long double P4 = ppow({{M.lambdaP, m}, {M.sigmaQ, n}});
    const long double P5 = ppow({{M.lambdaP, m}, {M.sigmaP, m}, {M.lambdaQ, n}, {M.sigmaQ, n}});

    // leading linear stages
    long double Gy = ct * M.beta2 * y - P3 * M.gamma3 * st * Xp;
    long double Gz = st * M.beta2 * y + P3 * M.gamma3 * ct * Xp;
    long double T = P1 * (M.alpha1 * Xm + M.alpha3 * Xp) + P2 * M.alpha2 * y;
    long double T2 = P5 * (M.alpha1 * Xm + M.alpha3 * Xp) + P4 * M.alpha2 * y;

    long double hotX = 0, hotY = 0, hotZ = 0;
    if (!M.Htilde.zero() || !M.H.zero()) {
        // offsets at the transition entries, all representable in long double
        const long double s1 = ppow({{M.sigmaP, -m}, {M.sigmaQ, -n}});
        const long double lQn = ppow({{M.lambdaQ, n}});
        const long double w1[3] = {lQn * ((c - sn) + s1 * Xm),
                                   ppow({{M.sigmaQ, -n}, {M.sigmaP, -2 * m}}) * y,
                                   lQn * ((c + sn) + s1 * Xp)};
        long double ht[3];
        poly_evalL(M.Htilde, w1, ht);
        const long double rho2 = 0.5L * M.Htilde.secondDerivAt0(2, 0, 0) * (c - sn) * (c - sn) +
                                 0.5L * M.Htilde.secondDerivAt0(2, 2, 2) * (sn + c) * (sn + c);
        const long double rho3 = 0.5L * M.Htilde.secondDerivAt0(3, 0, 0) * (sn - c) * (sn - c) +
                                 0.5L * M.Htilde.secondDerivAt0(3, 2, 2) * (sn + c) * (sn + c);
        const long double lQ2n = lQn * lQn;
        const long double h2 = ht[1] - lQ2n * rho2;
        const long double h3 = ht[2] - lQ2n * rho3;
        const long double hy = ct * h2 - st * h3;
        const long double hz = st * h2 + ct * h3;
        const long double sp2sq = ppow({{M.sigmaP, 2 * m}, {M.sigmaQ, n}});
        Gy += sp2sq * hy;
        Gz += sp2sq * hz;
        T += ppow({{M.lambdaP, m}, {M.sigmaP, m}, {M.sigmaQ, n}}) * ht[0];
        T2 += ppow({{M.lambdaP, m}, {M.sigmaP, 2 * m}, {M.sigmaQ, 2 * n}}) * ht[0];

        if (!M.H.zero()) {
            const long double lPm = ppow({{M.lambdaP, m}});
            const long double w2x = M.alpha1 * lQn * s1 * Xm + M.alpha2 * s1 * s1 *
                                        ppow({{M.sigmaQ, n}}) * y +
                                    M.alpha3 * lQn * s1 * Xp + ht[0];
            const long double what[3] = {lPm * (1 + w2x), s1 * Gy, s1 * Gz};
            long double h[3];
            poly_evalL(M.H, what, h);
            const long double spsq = ppow({{M.sigmaP, m}, {M.sigmaQ, n}});
            hotX = spsq * h[0];
            hotY = spsq * spsq * h[1];
            hotZ = spsq * h[2];
        }
    }

    long double cx = M.a1 * T + M.a2 * Gy + M.a3 * Gz + hotX;
    long double cy = mu + M.b1 * T2 + M.b2 * Gy * Gy + M.b3 * Gz * Gz + M.b4 * Gy * Gz + hotY;
    long double cz = M.c1 * T + M.c2 * Gy + M.c3 * Gz + hotZ;
    return {double(cx), double(cy), double(cz)};
}

std::vector<Vec3> grid_over(const Box3& box, int nx, int ny, int nz) {
    std::vector<Vec3> g;
    g.reserve(size_t(nx) * ny * nz);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            for (int k = 0; k < nz; ++k)
                g.push_back({box.lo.x + (box.hi.x - box.lo.x) * (i + 0.5) / nx,
                             box.lo.y + (box.hi.y - box.lo.y) * (j + 0.5) / ny,
                             box.lo.z + (box.hi.z - box.lo.z) * (k + 0.5) / nz});
    return g;
}

std::vector<ConvergenceRow> convergence_report(const CycleModel& m, double xi, double mu,
                                               const std::vector<SojournState>& sojourns,
                                               const std::vector<Vec3>& grid) {
    SigmaVector sig = sigma_params(m, xi);
    std::vector<ConvergenceRow> rows;
    int k = 0;
    for (SojournState s : sojourns) {
        if (!s.adjusted) s = adjust_arguments(m, s);
        ConvergenceRow row;
        row.k = k++;
        row.m = s.m;
        row.n = s.n;
        row.sojournError = s.sojournError;

        double c0 = 0, c1 = 0;
        const double h = 1e-4;
        for (const Vec3& v : grid) {
            Vec3 d = return_map_closed_form(m, s, mu, v) - eval_E(sig, xi, mu, v);
            c0 = std::max(c0, d.normInf());
            for (int ax = 0; ax < 3; ++ax) {
                Vec3 vp = v, vm = v;
                vp[ax] += h;
                vm[ax] -= h;
                Vec3 dF = (return_map_closed_form(m, s, mu, vp) - return_map_closed_form(m, s, mu, vm)) * (0.5 / h);
                Vec3 dE = (eval_E(sig, xi, mu, vp) - eval_E(sig, xi, mu, vm)) * (0.5 / h);
                c1 = std::max(c1, (dF - dE).normInf());
            }
        }
        row.supC0 = c0;
        row.supC1 = c1;

        if (direct_noise_bound(m, s) < 1e-7) {
            int ok = 0;
            for (const Vec3& v : grid) {
                DirectReturn dr = renormalized_map_direct(m, s, mu, 0.3, v);
                if (dr.admissible) ++ok; else row.flagged = true;
            }
            row.admissibleFraction = double(ok) / double(grid.size());
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace blab
