#include "blab/foliation.hpp"

#include <cmath>
#include <stdexcept>

namespace blab {

namespace {

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

std::vector<Vec3> DiagonalLeaf::sample(const CycleModel& m, int nt) const {
    std::vector<Vec3> pts;
    pts.reserve(nt);
    for (int i = 0; i < nt; ++i) {
        double t = -m.aP + 2 * m.aP * (i + 0.5) / nt;
        Vec3 q{s, a + t, -a + t};
        if (q.normInf() <= m.aP) pts.push_back(q);
    }
    return pts;
}

ParabolaLimit parabola_limit(const CycleModel& m, double xi, double mu, double s0, double a0) {
    (void)xi;  // sigma2 carries no xi-dependence
    double sigma2 = m.beta2 * m.beta2 * (m.b2 + m.b3 + m.b4) / 2.0;
    ParabolaLimit p;
    p.alpha = std::sqrt(2.0) * m.beta2 * (m.b2 - m.b3) * a0;
    p.beta = mu + m.b1 * sigma2 * s0 + (m.b2 + m.b3 - m.b4) * sigma2 * a0 * a0;
    return p;
}

PlanarCurve rescaled_leaf(const CycleModel& M, const SojournState& s, double xi, double mu,
                          double s0, double a0, const std::vector<double>& tGrid) {
    if (!s.adjusted) throw std::logic_error("rescaled_leaf: call adjust_arguments first");
    if (std::fabs(s0) > M.aP)
        throw std::domain_error("rescaled_leaf: s0 outside the gate interval J_k");
    SigmaVector sig = sigma_params(M, xi);
    const long m = s.m, n = s.n;
    const long double rt2 = std::sqrt(2.0L);
    const long double bSum = M.b2 + M.b3 + M.b4;
    const long double tScale = rt2 / (M.beta2 * bSum);  // t_hat = tScale * scale1 * t

    const long double scale1 = ppow({{M.sigmaQ, -n}, {M.sigmaP, -m}});
    const long double scale2 = scale1 * scale1;
    const long double sHat = scale2 * s0;
    const long double aHat = scale1 * a0;

    // pre-combined constant tails
    const long double c1Tail = -M.c1 * (sig.s2 / sig.s5) * ppow({{M.lambdaP, m}, {M.sigmaQ, n}, {M.sigmaP, m}});
    const long double b1Tail = -M.b1 * sig.s2 * ppow({{M.lambdaP, m}, {M.sigmaQ, 2 * n}, {M.sigmaP, 2 * m}});
    const long double xS = M.c1 * (sig.s2 / sig.s5) * scale1 * s0;
    const long double big1 = (sig.s2 / sig.s5) * ppow({{M.sigmaQ, n}, {M.sigmaP, m}});
    const long double big2 = sig.s2 * ppow({{M.sigmaQ, 2 * n}, {M.sigmaP, 2 * m}});

    ParabolaLimit lim = parabola_limit(M, xi, mu, s0, a0);

    PlanarCurve out;
    out.x.reserve(tGrid.size());
    out.y.reserve(tGrid.size());
    for (double t : tGrid) {
        const long double tHat = tScale * scale1 * t;
        // the leaf point entering U_Y is (sHat, 1 + tHat + aHat, 1 + tHat - aHat)
        if (std::fabs(double(tHat + aHat)) > M.rY || std::fabs(double(tHat - aHat)) > M.rY ||
            std::fabs(s0) * double(scale2) > M.rY)
            throw std::domain_error("rescaled_leaf: leaf leaves U_Y before transport");
        const long double w[3] = {sHat, tHat + aHat, tHat - aHat};
        long double h[3];
        poly_evalL(M.H, w, h);

        long double X = xS + t + big1 * h[2] + c1Tail;
        long double Y = lim.beta + t * t + lim.alpha * t + big2 * h[1] + b1Tail;
        out.x.push_back(double(X));
        out.y.push_back(double(Y));
    }
    return out;
}

double sup_distance_to_parabola(const PlanarCurve& c, const ParabolaLimit& p) {
    double d = 0;
    for (size_t i = 0; i < c.x.size(); ++i)
        d = std::max(d, std::fabs(c.y[i] - p.eval(c.x[i])));
    return d;
}

namespace {

DerivativeChain chain_impl(const CycleModel& M, const SojournState& s, const Vec3& v,
                           const Vec3* w1Base, const Vec3* wHatBase) {
    if (!s.adjusted) throw std::logic_error("derivative_chain: call adjust_arguments first");
    const long m = s.m, n = s.n;
    const long double c = s.cFrak, sn = s.sFrak, ct = s.ctFrak, st = s.stFrak;

    DerivativeChain ch;
    ch.input = {v.x, v.y, v.z};

    const long double lQn = ppow({{M.lambdaQ, n}});
    const long double sQn = ppow({{M.sigmaQ, n}});
    ch.afterQ = {lQn * (c * v.x - sn * v.z), sQn * v.y, lQn * (sn * v.x + c * v.z)};

    // first transition: A plus the Htilde Jacobian at the entry offset
    LVec3 q = ch.afterQ;
    long double j1[3] = {M.alpha1 * q.x + M.alpha2 * q.y + M.alpha3 * q.z, M.beta2 * q.y,
                         M.gamma3 * q.z};
    if (w1Base && !M.Htilde.zero()) {
        for (const auto& t : M.Htilde.terms) {
            long double grad[3] = {0, 0, 0};
            double wb[3] = {w1Base->x, w1Base->y, w1Base->z};
            int e[3] = {t.ex, t.ey, t.ez};
            for (int ax = 0; ax < 3; ++ax) {
                if (e[ax] == 0) continue;
                long double g = t.coeff * e[ax];
                for (int bx = 0; bx < 3; ++bx) {
                    int p = e[bx] - (bx == ax ? 1 : 0);
                    for (int k = 0; k < p; ++k) g *= wb[bx];
                }
                grad[ax] = g;
            }
            j1[t.comp - 1] += grad[0] * q.x + grad[1] * q.y + grad[2] * q.z;
        }
    }
    ch.stage1 = {j1[0], j1[1], j1[2]};

    const long double lPm = ppow({{M.lambdaP, m}});
    const long double sPm = ppow({{M.sigmaP, m}});
    ch.stage2 = {lPm * ch.stage1.x, sPm * (ct * ch.stage1.y - st * ch.stage1.z),
                 sPm * (st * ch.stage1.y + ct * ch.stage1.z)};

    // second transition: DB at the entry offset (zero offset at the skeleton)
    long double wy = wHatBase ? wHatBase->y : 0.0L;
    long double wz = wHatBase ? wHatBase->z : 0.0L;
    long double vy = M.b1 * ch.stage2.x + (2 * M.b2 * wy + M.b4 * wz) * ch.stage2.y +
                     (2 * M.b3 * wz + M.b4 * wy) * ch.stage2.z;
    long double vx = M.a1 * ch.stage2.x + M.a2 * ch.stage2.y + M.a3 * ch.stage2.z;
    long double vz = M.c1 * ch.stage2.x + M.c2 * ch.stage2.y + M.c3 * ch.stage2.z;
    if (wHatBase && !M.H.zero()) {
        for (const auto& t : M.H.terms) {
            double wb[3] = {wHatBase->x, wHatBase->y, wHatBase->z};
            int e[3] = {t.ex, t.ey, t.ez};
            long double dot = 0;
            const long double st2[3] = {ch.stage2.x, ch.stage2.y, ch.stage2.z};
            for (int ax = 0; ax < 3; ++ax) {
                if (e[ax] == 0) continue;
                long double g = t.coeff * e[ax];
                for (int bx = 0; bx < 3; ++bx) {
                    int p = e[bx] - (bx == ax ? 1 : 0);
                    for (int k = 0; k < p; ++k) g *= wb[bx];
                }
                dot += g * st2[ax];
            }
            if (t.comp == 1) vx += dot;
            if (t.comp == 2) vy += dot;
            if (t.comp == 3) vz += dot;
        }
    }
    ch.stage3 = {vx, vy, vz};
    return ch;
}

}  // namespace

DerivativeChain derivative_chain(const CycleModel& m, const SojournState& s, const Vec3& v) {
    return chain_impl(m, s, v, nullptr, nullptr);
}

DerivativeChain derivative_chain_at(const CycleModel& m, const SojournState& s, const Vec3& v,
                                    const Vec3& w1Base, const Vec3& wHatBase) {
    return chain_impl(m, s, v, &w1Base, &wHatBase);
}

std::vector<AngleRow> angle_report(const CycleModel& M, const std::vector<SojournState>& sojourns,
                                   double K) {
    if (K <= 0) throw std::invalid_argument("angle_report: K must be positive");
    std::vector<AngleRow> rows;
    int k = 0;
    for (SojournState s : sojourns) {
        if (!s.adjusted) s = adjust_arguments(M, s);
        AngleRow row;
        row.k = k++;
        row.m = s.m;
        row.n = s.n;

        const long double scaleInv = ppow({{M.sigmaP, -s.m}, {std::fabs(M.sigmaQ), -(long)s.n}});
        const long double vy = std::sin(K * scaleInv);
        const long double vx = std::sqrt(1.0L - vy * vy);

        // expansion and angle for the minimal-angle unit vector (vx, vy, 0)
        DerivativeChain ch = chain_impl(M, s, Vec3{double(vx), 0, 0}, nullptr, nullptr);
        // vy is far below double resolution at deep rows; feed the two parts
        // through the linear chain separately and recombine in long double.
        DerivativeChain chY = chain_impl(M, s, Vec3{0, 1, 0}, nullptr, nullptr);
        auto comb = [&](const LVec3& a, const LVec3& b) {
            return LVec3{a.x + vy * b.x, a.y + vy * b.y, a.z + vy * b.z};
        };
        LVec3 tld = comb(ch.stage2, chY.stage2);
        LVec3 hat = comb(ch.stage3, chY.stage3);
        row.expansion = double(std::sqrt(hat.y * hat.y + hat.z * hat.z));
        long double norm = std::sqrt(tld.x * tld.x + tld.y * tld.y + tld.z * tld.z);
        long double ratio = std::fabs(tld.x) / norm;
        row.angleToFu = double(std::asin(ratio));
        row.angleLog = double(std::log(ratio));
        row.claimedLog = double(s.m * std::log((long double)std::fabs(M.lambdaP)) +
                                s.n * std::log((long double)std::fabs(M.sigmaQ)));

        // diagonal ratio at v = (0,1,0)
        row.diagRatio = double(std::fabs(std::fabs(chY.stage2.y / chY.stage2.z) - 1.0L));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace blab
