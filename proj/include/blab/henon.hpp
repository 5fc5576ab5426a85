#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "blab/vec3.hpp"

namespace blab {

// Parameters of the center-unstable family G: (x,y,z) -> (y, mu+y^2+eta1*yz+eta2*z^2, xi*z+y).
struct HenonParams {
    double xi = 1.185;  // > 1
    double mu = -9.5;
    double eta1 = 0.0;
    double eta2 = 0.0;
};

// The five varsigma-parameters of the family E.
struct SigmaVector {
    double s1 = 1, s2 = 1, s3 = 0, s4 = 0, s5 = 1;
    bool conjugable() const { return s1 * s2 * s5 != 0.0; }
};

// Fixed points of G in the reference domain: P- = (p-,p-,pt-), P+ = (p+,p+,pt+).
struct FixedPointPair {
    double pMinus = 0, pTildeMinus = 0;
    double pPlus = 0, pTildePlus = 0;
};

// Parameter window in which the blender is certified; etaBound is configurable.
struct ParamWindow {
    double xiLo = 1.18, xiHi = 1.19;
    double muLo = -10.0, muHi = -9.0;
    double etaBound = 0.01;

    bool contains(double xi, double mu, double eta1, double eta2) const {
        return xi > xiLo && xi < xiHi && mu > muLo && mu < muHi &&
               std::fabs(eta1) < etaBound && std::fabs(eta2) < etaBound;
    }
    bool containsEta(double xi, double eta1, double eta2) const {
        return xi > xiLo && xi < xiHi &&
               std::fabs(eta1) < etaBound && std::fabs(eta2) < etaBound;
    }
};

Vec3 eval_G(const HenonParams& p, const Vec3& v);
Vec3 eval_E(const SigmaVector& s, double xi, double mu, const Vec3& v);

// (eta1, eta2) making G conjugate to E; eta1 is the yz-coefficient, eta2 the z^2 one.
// The conjugating coordinate change is Theta(x,y,z) = (s1 z / s2, y / s2, s5 x / s2).
std::pair<double, double> eta_of_sigma(const SigmaVector& s);
Vec3 theta_sigma(const SigmaVector& s, const Vec3& v);
Vec3 theta_sigma_inv(const SigmaVector& s, const Vec3& v);

// Max over samples of || ThetaHat^-1 o EHat o ThetaHat - GHat ||_inf, mu-slot included.
double conjugate_check(const SigmaVector& s, double xi, double mu, std::span<const Vec3> samples);

Mat3 jacobian_G(const HenonParams& p, const Vec3& v);

// Closed form for eta=0, Newton-refined otherwise. Throws on non-convergence or
// a nonpositive discriminant of y^2 - y + mu.
FixedPointPair fixed_points_G(const HenonParams& p);

}  // namespace blab
