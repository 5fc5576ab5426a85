#pragma once

#include <vector>

#include "blab/model_cycle.hpp"

namespace blab {

// Long-double 3-vector for chart/return-map internals, where products of the
// form sigmaP^2m sigmaQ^2n exceed double range long before they matter.
struct LVec3 {
    long double x = 0, y = 0, z = 0;
    Vec3 toVec3() const { return {double(x), double(y), double(z)}; }
};

// A sojourn pair (m, n) together with its adjusting arguments and the derived
// rotation sums c = cos(2 pi n phiQk), ct = cos(2 pi m phiPk), etc.
struct SojournState {
    int m = 0, n = 0;
    double zeta = 0, vartheta = 0;
    double sojournError = 0;  // |sigmaP^m lambdaQ^n - tau^-1 xi|
    bool adjusted = false;
    double alphaK = 0, betaK = 0;
    double cFrak = 0, sFrak = 0;    // cos/sin(2 pi n (phiQ + betaK))
    double ctFrak = 0, stFrak = 0;  // cos/sin(2 pi m (phiP + alphaK))
};

// Record sequence of sojourn pairs approaching tau^-1 xi, ordered by n with
// strictly decreasing error. Throws when no pair reaches `tol` by n = maxN,
// reporting the best error achieved.
std::vector<SojournState> find_sojourn(const CycleModel& m, double xi, int maxN, double tol);
std::vector<SojournState> find_sojourn_raw(double sigmaP, double lambdaQ, double target, int maxN,
                                           double tol);

// Fills alphaK/betaK (zeta = vartheta = 0 unless set on the state) and the
// frak sums; the reduced arguments pi/4 + zeta and pi/2 + vartheta are used
// directly so the adjusted values are exact to rounding.
SojournState adjust_arguments(const CycleModel& m, SojournState s);

struct Reparam {
    Vec3 muBar{};  // evaluated at the given mu
    Vec3 nuBar{};
    double alphaK = 0, betaK = 0;
    double rhoTilde2 = 0, rhoTilde3 = 0;
};

Reparam reparam_at(const CycleModel& m, const SojournState& s, double mu);
UnfoldingParams unfolding_at(const CycleModel& m, const SojournState& s, double mu, double rho = 0.3);

// The affine chart Psi_k around Ytilde and its composition Phi_k = Psi_k o Theta.
class Chart {
  public:
    Chart(const CycleModel& m, const SojournState& s, const SigmaVector& sigma);

    LVec3 apply(const Vec3& v) const;       // Psi_k
    Vec3 applyInv(const LVec3& q) const;    // Psi_k^-1
    LVec3 applyPhi(const Vec3& v) const;    // Phi_k = Psi_k o Theta
    Vec3 applyPhiInv(const LVec3& q) const;

    // Plain double scales; throws below 1e-300 where the affine view is
    // meaningless and the log-domain entry points must be used instead.
    double scale1() const;
    double scale2() const;
    long double scale1L() const { return s1_; }
    long double scale2L() const { return s2_; }
    long double sigmaQn() const { return sQn_; }  // sigmaQ^-n

  private:
    long double s1_, s2_, sQn_;
    SigmaVector sigma_;
};

Chart chart_psi(const CycleModel& m, const SojournState& s);

struct DirectReturn {
    Vec3 out{};
    bool admissible = false;
    bool clean = false;   // all perturbation plateaus exact along the orbit
    int escapeIndex = -1;
};

// Renormalized return map by direct composition of model steps, conjugated by
// Psi_k. Valid only while the chart scales stay within double range; see
// direct_noise_bound for the rounding-amplification estimate.
DirectReturn renormalized_map_direct(const CycleModel& m, const SojournState& s, double mu,
                                     double rho, const Vec3& v);

// Estimated absolute rounding error of the direct path (the chart sandwich
// amplifies coordinate noise by sigmaP^2m sigmaQ^n).
double direct_noise_bound(const CycleModel& m, const SojournState& s);

// Closed-form return map: the pre-combined composition, exact for polynomial
// H / Htilde, cancellation-free and safe for large k.
Vec3 return_map_closed_form(const CycleModel& m, const SojournState& s, double mu, const Vec3& v);

struct ConvergenceRow {
    int k = 0, m = 0, n = 0;
    double sojournError = 0;
    double supC0 = 0;
    double supC1 = 0;
    double admissibleFraction = -1;  // -1: direct path not evaluated at this depth
    bool flagged = false;            // itinerary escape seen on the direct path
};

std::vector<ConvergenceRow> convergence_report(const CycleModel& m, double xi, double mu,
                                               const std::vector<SojournState>& sojourns,
                                               const std::vector<Vec3>& grid);

// Uniform grid over a box, cell-centered, for convergence sweeps.
std::vector<Vec3> grid_over(const Box3& box, int nx, int ny, int nz);

}  // namespace blab
