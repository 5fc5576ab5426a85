#pragma once

#include <variant>
#include <vector>

#include "blab/blender.hpp"

namespace blab {

// One-parameter families of uu-discs, sampled at uniform t in [0,1].
struct UStrip {
    std::vector<UUDisc> discs;
};

// Closed loop: discs.front() and discs.back() agree within 1e-9.
struct UUTube {
    std::vector<UUDisc> discs;
};

// Both boundary discs cross the same local stable line; interior in-between.
struct FoldingSurface {
    std::vector<UUDisc> discs;
    int side = 0;  // -1: W^s_loc(P-), +1: W^s_loc(P+)
};

struct StripTransverse { int side = 0; };
struct StripGrown { UStrip strip; double ratio = 0; };
struct TubeTangency { int side = 0; double tStar = 0; };
struct TubeFolding { FoldingSurface surface; };
struct TubeGrown { UUTube tube; double ratio = 0; };

using StepOutcome = std::variant<StripTransverse, StripGrown, TubeTangency, TubeFolding, TubeGrown>;

struct WidthBounds {
    double width = 0;       // polyline-shooting estimate (an upper bound)
    double lowerBound = 0;  // straight-chord distance between the boundary discs
};

// Central width of a strip: infimal length of curves inside the surface joining
// D0 and D1 with chords in C^u. Shooting from 64 start heights with
// golden-section refinement of the end height.
WidthBounds strip_width_bounds(const UStrip& s, const ConeSpec& cone = {});
double strip_width(const UStrip& s, const ConeSpec& cone = {});

// Width of a tube: thickness of the enclosed region, measured as the smallest
// z-extent of the loop section over the common y-window.
double tube_width(const UUTube& t);

bool strip_in_between(const UStrip& s, const FixedPointPair& fp, const Box3& box = Box3::delta());
bool tube_in_between(const UUTube& t, const FixedPointPair& fp, const Box3& box = Box3::delta());

// Structural validity: leaf discs valid, family pairwise disjoint at probe
// heights, cross-leaf chords in C^u; tubes additionally need a simple section
// loop and matching endpoints.
void validate_strip(const UStrip& s, const ConeSpec& cone = {});
void validate_tube(const UUTube& t, const ConeSpec& cone = {});

StepOutcome classify_strip_step(const HenonParams& p, const UStrip& s, const FixedPointPair& fp,
                                const Box3& box = Box3::delta(), const ConeSpec& cone = {},
                                int resample = 2000);
StepOutcome classify_tube_step(const HenonParams& p, const UUTube& t, const FixedPointPair& fp,
                               const Box3& box = Box3::delta(), const ConeSpec& cone = {},
                               int resample = 2000);

struct TubeRunResult {
    std::vector<StepOutcome> trace;
    std::vector<double> widths;   // widths of the Grown prefix, seed first
    bool terminated = false;      // hit Tangency or Folding before maxSteps
    double lambdaMin = 0;         // smallest observed growth ratio
    double lambdaGeo = 0;         // geometric mean of growth ratios
};

TubeRunResult run_tube_until_tangency(const HenonParams& p, const UUTube& t, int maxSteps,
                                      const Box3& box = Box3::delta(), const ConeSpec& cone = {},
                                      int resample = 2000);

// Seed builders used by tests and scenario sweeps.
UStrip make_vertical_strip(double x0, double z0, double z1, int leaves = 64, int samples = 600,
                           double yHalf = 4.0);
UUTube make_loop_tube(double xAmp, double zCenter, double zAmp, int leaves = 256, int samples = 600,
                      double yHalf = 4.0);

}  // namespace blab
