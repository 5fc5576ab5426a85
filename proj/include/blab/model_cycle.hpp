#pragma once

#include <string>
#include <vector>

#include "blab/henon.hpp"
#include "blab/vec3.hpp"

namespace blab {

// Sparse polynomial map R^3 -> R^3 (the higher-order parts of the transitions).
struct PolyMap {
    struct Term {
        int comp = 1;  // 1..3
        int ex = 0, ey = 0, ez = 0;
        double coeff = 0;
    };
    std::vector<Term> terms;

    bool zero() const { return terms.empty(); }
    Vec3 eval(const Vec3& w) const;
    // d^2/dwi dwj of component `comp` at the origin
    double secondDerivAt0(int comp, int i, int j) const;
    bool flatAt0() const;          // value and first derivatives vanish at 0
    bool flatSecondYZ(int comp) const;  // no y^2, z^2, yz monomials in `comp`
};

// C^r bump b^theta: 1 on [-1,1], 0 outside [-theta,theta], polynomial
// smoothstep of order `order`+1 on the transition bands.
struct BumpProfile {
    double theta = 2.0;
    int order = 2;

    double operator()(double x) const;
    double derivative(int k, double x) const;  // exact, piecewise-polynomial
    double crNorm(int r) const;                // max_{j<=r} sup |b^(j)|
};

enum class Region { P, Q, X, Y };

// All constants of the model diffeomorphism with a heterodimensional cycle.
struct CycleModel {
    // eigenvalue data (A)
    double lambdaP = 0.01, sigmaP = 3.0, phiP = 0.17;
    double lambdaQ = 0.5, sigmaQ = 2.0, phiQ = 0.31;
    // transition T1 coefficients (B)
    double alpha1 = 1.0, alpha2 = 0.3, alpha3 = 0.2, beta2 = 1.0, gamma3 = 1.0;
    // transition T2 coefficients (C)
    double a1 = 0.1, a2 = 0.0, a3 = 1.4142135623730951;
    double b1 = 1.0, b2 = 0.5, b3 = 0.5, b4 = 1.0;
    double c1 = 0.1, c2 = 0.7071067811865476, c3 = 0.7071067811865476;
    PolyMap H, Htilde;
    // neighbourhood sizes and bookkeeping transition lengths
    double aP = 2.5, aQ = 2.5;
    int N1 = 1, N2 = 1;
    // rotation-like perturbation supports and transition entry radii
    double kappa1 = 0.625, theta1 = 1.25;  // U_P: exact inside [-1.6,1.6]^3, id outside [-2,2]^3
    double kappa2 = 0.5, theta2 = 1.2;     // U_Q: exact inside [-2,2]^3, id outside [-2.4,2.4]^3
    double rX = 0.5, rY = 0.5;             // sup-norm radii of U_X and U_Y
    BumpProfile bump;

    // heteroclinic anchors in local coordinates
    static Vec3 Xtilde() { return {1, 0, 0}; }
    static Vec3 Ypt() { return {0, 1, 1}; }
    static Vec3 Xpt() { return {0, 1, 0}; }
    static Vec3 Ytilde() { return {1, 0, 1}; }

    double tau() const { return gamma3 * (a3 - a2) / std::sqrt(2.0); }
    double etaExp() const { return std::log(1.0 / lambdaQ) / std::log(sigmaP); }
    double etaTildeExp(double xi) const { return std::log(tau() / xi) / std::log(sigmaP); }
    double spectralValue() const {
        return std::fabs(std::pow(std::sqrt(std::fabs(lambdaP)) * sigmaP, etaExp()) * sigmaQ);
    }

    static CycleModel canonical() { return CycleModel{}; }
};

// Unfolding parameters: tangency / quasi-transverse translations and the two
// argument shifts, plus the translation support radius rho.
struct UnfoldingParams {
    Vec3 muBar{0, 0, 0};
    Vec3 nuBar{0, 0, 0};
    double alpha = 0.0, beta = 0.0;
    double rho = 0.3;
};

struct CheckReport {
    struct Item {
        std::string name;
        double value = 0;
        bool pass = false;
    };
    std::vector<Item> items;
    bool allPass = true;

    void add(const std::string& n, double v, bool p) {
        items.push_back({n, v, p});
        allPass = allPass && p;
    }
};

CheckReport validate_model(const CycleModel& m, double xi, const ParamWindow& window);

// The five varsigma-parameters associated to (xi, model). Throws when a3 == a2.
SigmaVector sigma_params(const CycleModel& m, double xi);

double bump_pi(const BumpProfile& bp, double rho, const Vec3& w);

Vec3 perturb_translation(const Vec3& z0, const Vec3& w, double rho, const Vec3& z,
                         const BumpProfile& bp = BumpProfile{});

enum class RotAxis { X, Y };
Vec3 perturb_rotation(RotAxis axis, double omega, double theta, double kappa, const Vec3& w,
                      const BumpProfile& bp = BumpProfile{});

// One step of the unfolded model f_{upsilon,rho} = Omega o f in the declared
// region. Throws when z is outside the region's domain.
Vec3 model_step(const CycleModel& m, const UnfoldingParams& u, Region region, const Vec3& z);

struct OrbitRecord {
    std::vector<std::pair<Region, Vec3>> points;  // point AFTER each step, tagged by the region it was computed in
    bool admissible = false;
    int escapeIndex = -1;  // itinerary check that failed (index into the checks, -1 if none)
    bool cleanSupports = true;  // all bumps at 1 and rotations exact along the orbit
    int returnTime = 0;         // n + N1 + m + N2
    Vec3 final{};
};

// Applies n steps in U_Q, T1, m steps in U_P, T2; verifies the admissible
// itinerary along the way. Escapes are reported in the verdict, not thrown.
OrbitRecord return_map_orbit(const CycleModel& m, const UnfoldingParams& u, int n, int mSteps,
                             const Vec3& zNearYtilde);

// Model files: line-oriented "key = value" text plus H/Htilde monomial lines.
CycleModel load_model(const std::string& path);
CycleModel parse_model(const std::string& text);

}  // namespace blab
