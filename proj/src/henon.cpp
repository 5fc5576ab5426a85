#include "blab/henon.hpp"

#include <cmath>

namespace blab {

Vec3 eval_G(const HenonParams& p, const Vec3& v) {
    return {v.y,
            p.mu + v.y * v.y + p.eta1 * v.y * v.z + p.eta2 * v.z * v.z,
            p.xi * v.z + v.y};
}

Vec3 eval_E(const SigmaVector& s, double xi, double mu, const Vec3& v) {
    return {xi * v.x + s.s1 * v.y,
            mu + s.s2 * v.y * v.y + s.s3 * v.x * v.x + s.s4 * v.x * v.y,
            s.s5 * v.y};
}

std::pair<double, double> eta_of_sigma(const SigmaVector& s) {
    if (!s.conjugable()) throw std::invalid_argument("eta_of_sigma: need s1*s2*s5 != 0");
    return {s.s1 * s.s4 / s.s2, s.s1 * s.s1 * s.s3 / s.s2};
}

Vec3 theta_sigma(const SigmaVector& s, const Vec3& v) {
    return {s.s1 * v.z / s.s2, v.y / s.s2, s.s5 * v.x / s.s2};
}

Vec3 theta_sigma_inv(const SigmaVector& s, const Vec3& v) {
    return {s.s2 * v.z / s.s5, s.s2 * v.y, s.s2 * v.x / s.s1};
}

double conjugate_check(const SigmaVector& s, double xi, double mu, std::span<const Vec3> samples) {
    if (!s.conjugable()) throw std::invalid_argument("conjugate_check: need s1*s2*s5 != 0");
    auto [eta1, eta2] = eta_of_sigma(s);
    HenonParams g{xi, mu, eta1, eta2};
    double worst = 0.0;
    for (const Vec3& v : samples) {
        // ThetaHat scales the mu-slot by 1/s2; it returns unchanged through the
        // inverse, so only the spatial coordinates can disagree.
        Vec3 lhs = theta_sigma_inv(s, eval_E(s, xi, mu / s.s2, theta_sigma(s, v)));
        Vec3 rhs = eval_G(g, v);
        worst = std::max(worst, (lhs - rhs).normInf());
    }
    return worst;
}

Mat3 jacobian_G(const HenonParams& p, const Vec3& v) {
    Mat3 j;
    j.a = {{{0, 1, 0},
            {0, 2 * v.y + p.eta1 * v.z, p.eta1 * v.y + 2 * p.eta2 * v.z},
            {0, 1, p.xi}}};
    return j;
}

namespace {

// 2D Newton for the fixed-point system with x = y:
//   F(y,z) = (mu + y^2 + eta1*y*z + eta2*z^2 - y, xi*z + y - z)
Vec3 refine_fixed_point(const HenonParams& p, double y0, double z0) {
    double y = y0, z = z0;
    for (int it = 0; it < 50; ++it) {
        double f1 = p.mu + y * y + p.eta1 * y * z + p.eta2 * z * z - y;
        double f2 = p.xi * z + y - z;
        double a = 2 * y + p.eta1 * z - 1, b = p.eta1 * y + 2 * p.eta2 * z;
        double c = 1, d = p.xi - 1;
        double det = a * d - b * c;
        if (det == 0.0) break;
        double dy = (f1 * d - b * f2) / det;
        double dz = (a * f2 - f1 * c) / det;
        y -= dy;
        z -= dz;
        if (std::max(std::fabs(dy), std::fabs(dz)) < 1e-14) break;
    }
    Vec3 fp{y, y, z};
    if ((eval_G(p, fp) - fp).normInf() >= 1e-12)
        throw std::runtime_error("fixed_points_G: Newton did not converge within 50 steps");
    return fp;
}

}  // namespace

FixedPointPair fixed_points_G(const HenonParams& p) {
    double disc = 1.0 - 4.0 * p.mu;
    if (disc <= 0.0)
        throw std::domain_error("fixed_points_G: discriminant 1-4mu <= 0, no real pair");
    double r = std::sqrt(disc);
    double yMinus = (1.0 - r) / 2.0, yPlus = (1.0 + r) / 2.0;
    double zMinus = yMinus / (1.0 - p.xi), zPlus = yPlus / (1.0 - p.xi);

    FixedPointPair fp;
    if (p.eta1 == 0.0 && p.eta2 == 0.0) {
        fp.pMinus = yMinus;
        fp.pTildeMinus = zMinus;
        fp.pPlus = yPlus;
        fp.pTildePlus = zPlus;
        return fp;
    }
    Vec3 pm = refine_fixed_point(p, yMinus, zMinus);
    Vec3 pp = refine_fixed_point(p, yPlus, zPlus);
    fp.pMinus = pm.y;
    fp.pTildeMinus = pm.z;
    fp.pPlus = pp.y;
    fp.pTildePlus = pp.z;
    return fp;
}

}  // namespace blab
