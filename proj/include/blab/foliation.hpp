#pragma once

#include <vector>

#include "blab/renorm.hpp"

namespace blab {

// A leaf of the diagonal foliation of U_P: (s, a, -a) + (0, t, t), clipped.
struct DiagonalLeaf {
    double s = 0, a = 0;
    std::vector<Vec3> sample(const CycleModel& m, int nt = 1000) const;
};

// Limit parabola y = x^2 + alpha x + beta of the rescaled leaves.
struct ParabolaLimit {
    double alpha = 0, beta = 0;
    double eval(double x) const { return x * x + alpha * x + beta; }
};

ParabolaLimit parabola_limit(const CycleModel& m, double xi, double mu, double s0, double a0);

struct PlanarCurve {
    std::vector<double> x, y;
};

// Transports the leaf with rescaled data (s_hat(s0), a_hat(a0)) through the
// second transition, pulls back through Phi_k^-1, projects to the (x,y)-plane
// and substitutes the rescaled parameter. Terms are pre-combined so the huge
// chart scales cancel analytically.
PlanarCurve rescaled_leaf(const CycleModel& m, const SojournState& s, double xi, double mu,
                          double s0, double a0, const std::vector<double>& tGrid);

double sup_distance_to_parabola(const PlanarCurve& c, const ParabolaLimit& p);

// Derivative of the admissible return composition, staged per region block.
struct DerivativeChain {
    LVec3 input{};
    LVec3 afterQ{};   // after n steps near Q
    LVec3 stage1{};   // v_upsilon: after the first transition
    LVec3 stage2{};   // v~: after m steps near P
    LVec3 stage3{};   // v^: after the second transition
};

// Stages computed at the heteroclinic skeleton (transition entries at X and Y
// exactly); matches the displayed coefficient formulas.
DerivativeChain derivative_chain(const CycleModel& m, const SojournState& s, const Vec3& v);

// Base-aware variant: the transition Jacobians are taken at the given entry
// offsets (w1Base at X, wHatBase at Y), as a finite-difference oracle needs.
DerivativeChain derivative_chain_at(const CycleModel& m, const SojournState& s, const Vec3& v,
                                    const Vec3& w1Base, const Vec3& wHatBase);

struct AngleRow {
    int k = 0, m = 0, n = 0;
    double expansion = 0;       // ||pi_{2,3}(v^)|| for the minimal-angle vector
    double angleToFu = 0;       // arcsin(|v~_x| / ||v~||); underflows to 0 for deep rows
    double angleLog = 0;        // log of the same ratio, safe at any depth
    double diagRatio = 0;       // | |v~_y / v~_z| - 1 | at v = (0,1,0)
    double claimedLog = 0;      // log(lambdaP^m |sigmaQ|^n)
};

// Expansion / angle / diagonal-ratio table over the sojourn list; the test
// vector has |v_y| = sin(K sigmaQ^-n sigmaP^-m) with the rest on the x-axis.
std::vector<AngleRow> angle_report(const CycleModel& m, const std::vector<SojournState>& sojourns,
                                   double K);

}  // namespace blab
