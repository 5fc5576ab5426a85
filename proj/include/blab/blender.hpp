#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "blab/henon.hpp"
#include "blab/vec3.hpp"

namespace blab {

// Cone apertures: C^uu = { sqrt(u^2+w^2) < uuRatio*|v| },
//                 C^u  = { |u| < uRatio*sqrt(v^2+w^2) }.
struct ConeSpec {
    double uuRatio = 0.5;
    double uRatio = 0.5;
};

// A uu-disc: a polyline graph over y, strictly monotone, chords inside C^uu.
// `src` carries a provenance parameter per sample; fresh discs use their own y,
// iterated discs inherit it by interpolation so nested preimage intervals can
// be read off after repeated covering steps.
struct UUDisc {
    std::vector<Vec3> pts;
    std::vector<double> src;

    UUDisc() = default;
    explicit UUDisc(std::vector<Vec3> p);

    double yMin() const { return pts.front().y; }
    double yMax() const { return pts.back().y; }
    double yExtent() const { return yMax() - yMin(); }
    bool spansY(double a, double b, double tol = 0.0) const {
        return yMin() <= a + tol && yMax() >= b - tol;
    }
    // Linear interpolation at height y (requires yMin() <= y <= yMax()).
    Vec3 at(double y) const;
    double srcAt(double y) const;

    // The canonical disc L = {(0,y,0)} sampled over (-4,4).
    static UUDisc lineL(int samples = 2000, double yHalf = 4.0);
};

struct DiscCheck {
    bool pass = false;
    double worstRatio = 0;  // max over chords of sqrt(dx^2+dz^2)/|dy|
    int worstIndex = -1;
};

// The local stable line of a reference fixed point: {(p+t, p, ptilde)}.
struct StableSegment {
    double p = 0, pTilde = 0;
    Vec3 at(double t) const { return {p + t, p, pTilde}; }
};

DiscCheck validate_uu_disc(const UUDisc& d, const ConeSpec& c);

// True iff the z-values where the disc crosses y=p- and y=p+ both lie strictly
// between pTilde+ and pTilde-, and the crossing points lie inside the box.
// Throws if the disc does not span [pMinus, pPlus].
bool in_between_test(const UUDisc& d, const FixedPointPair& fp, const Box3& box = Box3::delta());
// Crossing z-value of the disc at height y.
double crossing_z(const UUDisc& d, double y);

// Pushforward under G: maps samples, clips to the box, splits where the image
// loses y-monotonicity or leaves C^uu, resamples each surviving branch on a
// uniform y-grid. Empty result means the image left the box entirely.
std::vector<UUDisc> iterate_disc(const HenonParams& p, const UUDisc& d, const Box3& box,
                                 const ConeSpec& cone = {}, int resample = 2000);

// One covering step: some branch of the image that is again in-between,
// preferring maximal y-extent, ties broken toward larger crossing margins.
std::optional<UUDisc> covering_step(const HenonParams& p, const UUDisc& d, const FixedPointPair& fp,
                                    const Box3& box = Box3::delta(), const ConeSpec& cone = {},
                                    int resample = 2000);

struct Certification {
    bool ok = false;
    int failStep = -1;                                  // step of the first covering failure
    std::vector<std::pair<double, double>> intervals;   // nested preimage intervals on the seed
    double witnessParam = 0;
    Vec3 witness;
    bool orbitInside = false;   // forward orbit of the witness stayed in the box (inflated 1e-6)
    double contraction = 0;     // max ratio of consecutive interval widths
};

Certification certify_superposition(const HenonParams& p, const UUDisc& d, int n,
                                    const Box3& box = Box3::delta(), const ConeSpec& cone = {},
                                    int resample = 2000);

// Random check of DG-invariance and (y,z)-expansion of C^u over |y| >= yMin.
// Returns the number of violating (point, vector) pairs.
int cone_invariance_sample(const HenonParams& p, const Box3& region, double yMin, int samples,
                           std::uint64_t seed, const ConeSpec& cone = {});

struct SeparatrixTrace {
    std::vector<double> lineExtent;          // t-extent of the invariant-line segment per step
    std::vector<std::pair<double, double>> yzPoints;  // final (y,z) samples of the surface trace
    std::vector<double> yExtent, zExtent;    // running extents per step (nondecreasing)
    int overflowStep = -1;                   // step at which the trace left representable range
};

// Iterates a fundamental segment of the invariant vertical line through P+ and a
// transverse seed curve in the image of the half-space {y >= p+}. Requires eta = 0.
SeparatrixTrace separatrix_trace(const HenonParams& p, int steps);

}  // namespace blab
