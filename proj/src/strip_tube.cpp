#include "blab/strip_tube.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace blab {

namespace {

constexpr double kGoldInv = 0.6180339887498949;
constexpr double kGapTol = 1e-6;       // tangency threshold on the crossing gap
constexpr double kTangencyHalo = 0.02; // t-radius for the no-sign-change check

// Common y-window of a disc family.
std::pair<double, double> common_window(const std::vector<UUDisc>& discs) {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (const auto& d : discs) {
        lo = std::max(lo, d.yMin());
        hi = std::min(hi, d.yMax());
    }
    if (!(lo < hi)) throw std::domain_error("disc family has empty common y-window");
    return {lo, hi};
}

double polyline_length(const std::vector<UUDisc>& discs, double y0, double y1,
                       const ConeSpec& cone) {
    double len = 0;
    int m = int(discs.size());
    Vec3 prev = discs[0].at(y0);
    for (int k = 1; k < m; ++k) {
        double y = y0 + (y1 - y0) * k / double(m - 1);
        Vec3 cur = discs[k].at(y);
        Vec3 ch = cur - prev;
        if (!(std::fabs(ch.x) < cone.uRatio * std::hypot(ch.y, ch.z)) &&
            (ch.x != 0 || ch.y != 0 || ch.z != 0))
            return std::numeric_limits<double>::infinity();
        len += ch.norm2();
        prev = cur;
    }
    return len;
}

}  // namespace

WidthBounds strip_width_bounds(const UStrip& s, const ConeSpec& cone) {
    if (s.discs.size() < 2) throw std::invalid_argument("strip_width: need at least 2 leaves");
    const UUDisc& d0 = s.discs.front();
    const UUDisc& d1 = s.discs.back();
    auto [yLo, yHi] = common_window(s.discs);

    double degen = 0;
    for (int i = 0; i < 32; ++i) {
        double y = yLo + (yHi - yLo) * (i + 0.5) / 32;
        degen = std::max(degen, (d0.at(y) - d1.at(y)).normInf());
    }
    if (degen < 1e-12) throw std::domain_error("strip_width: degenerate family, D0 = D1");

    WidthBounds wb;
    // straight-chord lower bound between the boundary leaves
    double lb = std::numeric_limits<double>::infinity();
    const int nb = 200;
    for (int i = 0; i < nb; ++i) {
        double ya = yLo + (yHi - yLo) * i / double(nb - 1);
        Vec3 a = d0.at(ya);
        for (int j = 0; j < nb; ++j) {
            double yb = yLo + (yHi - yLo) * j / double(nb - 1);
            lb = std::min(lb, (a - d1.at(yb)).norm2());
        }
    }
    wb.lowerBound = lb;

    double best = std::numeric_limits<double>::infinity();
    const int starts = 64;
    for (int i = 0; i < starts; ++i) {
        double y0 = yLo + (yHi - yLo) * (i + 0.5) / starts;
        // golden-section over the end height
        double a = yLo, b = yHi;
        double c = b - kGoldInv * (b - a), d = a + kGoldInv * (b - a);
        double fc = polyline_length(s.discs, y0, c, cone);
        double fd = polyline_length(s.discs, y0, d, cone);
        for (int it = 0; it < 40; ++it) {
            if (fc < fd) {
                b = d; d = c; fd = fc;
                c = b - kGoldInv * (b - a);
                fc = polyline_length(s.discs, y0, c, cone);
            } else {
                a = c; c = d; fc = fd;
                d = a + kGoldInv * (b - a);
                fd = polyline_length(s.discs, y0, d, cone);
            }
        }
        best = std::min({best, fc, fd});
    }
    wb.width = best;
    return wb;
}

double strip_width(const UStrip& s, const ConeSpec& cone) { return strip_width_bounds(s, cone).width; }

double tube_width(const UUTube& t) {
    auto [yLo, yHi] = common_window(t.discs);
    double w = std::numeric_limits<double>::infinity();
    const int ny = 64;
    for (int i = 0; i < ny; ++i) {
        double y = yLo + (yHi - yLo) * (i + 0.5) / ny;
        double zlo = std::numeric_limits<double>::infinity(), zhi = -zlo;
        for (const auto& d : t.discs) {
            double z = d.at(y).z;
            zlo = std::min(zlo, z);
            zhi = std::max(zhi, z);
        }
        w = std::min(w, zhi - zlo);
    }
    return w;
}

bool strip_in_between(const UStrip& s, const FixedPointPair& fp, const Box3& box) {
    for (const auto& d : s.discs)
        if (!in_between_test(d, fp, box)) return false;
    return true;
}

bool tube_in_between(const UUTube& t, const FixedPointPair& fp, const Box3& box) {
    for (const auto& d : t.discs)
        if (!in_between_test(d, fp, box)) return false;
    return true;
}

namespace {

// Tubes only need disjoint leaves; the C^u condition on cross-leaf chords is a
// strip requirement.
void validate_family(const std::vector<UUDisc>& discs, const ConeSpec& cone, bool loop) {
    if (discs.size() < 3) throw std::invalid_argument("disc family: need at least 3 leaves");
    for (const auto& d : discs)
        if (!validate_uu_disc(d, cone).pass) throw std::domain_error("disc family: leaf fails the uu-cone test");
    auto [yLo, yHi] = common_window(discs);
    size_t last = discs.size() - 1;
    for (int i = 0; i < 8; ++i) {
        double y = yLo + (yHi - yLo) * (i + 0.5) / 8;
        for (size_t k = 0; k + 1 < discs.size(); ++k) {
            if (loop && k + 1 == last) continue;
            Vec3 a = discs[k].at(y), b = discs[k + 1].at(y);
            double dx = b.x - a.x, dz = b.z - a.z;
            if (std::hypot(dx, dz) < 1e-12)
                throw std::domain_error("disc family: adjacent leaves touch");
            if (!loop && !(std::fabs(dx) < cone.uRatio * std::fabs(dz)))
                throw std::domain_error("disc family: cross-leaf chord leaves C^u");
        }
    }
}

}  // namespace

void validate_strip(const UStrip& s, const ConeSpec& cone) { validate_family(s.discs, cone, false); }

void validate_tube(const UUTube& t, const ConeSpec& cone) {
    validate_family(t.discs, cone, true);
    auto [yLo, yHi] = common_window(t.discs);
    double seam = 0;
    for (int i = 0; i < 16; ++i) {
        double y = yLo + (yHi - yLo) * (i + 0.5) / 16;
        seam = std::max(seam, (t.discs.front().at(y) - t.discs.back().at(y)).normInf());
    }
    if (seam > 1e-9) throw std::domain_error("tube: D0 != D1");
    // simple section loop at a few heights
    for (int i = 0; i < 4; ++i) {
        double y = yLo + (yHi - yLo) * (i + 0.5) / 4;
        size_t m = t.discs.size() - 1;
        std::vector<std::pair<double, double>> sec(m);
        for (size_t k = 0; k < m; ++k) {
            Vec3 q = t.discs[k].at(y);
            sec[k] = {q.x, q.z};
        }
        auto crosses = [&](size_t a, size_t b) {
            auto [x1, z1] = sec[a]; auto [x2, z2] = sec[(a + 1) % m];
            auto [x3, z3] = sec[b]; auto [x4, z4] = sec[(b + 1) % m];
            auto orient = [](double ax, double az, double bx, double bz, double cx, double cz) {
                return (bx - ax) * (cz - az) - (bz - az) * (cx - ax);
            };
            double o1 = orient(x1, z1, x2, z2, x3, z3), o2 = orient(x1, z1, x2, z2, x4, z4);
            double o3 = orient(x3, z3, x4, z4, x1, z1), o4 = orient(x3, z3, x4, z4, x2, z2);
            return o1 * o2 < 0 && o3 * o4 < 0;
        };
        for (size_t a = 0; a < m; ++a)
            for (size_t b = a + 2; b < m; ++b) {
                if (a == 0 && b == m - 1) continue;  // adjacent around the seam
                if (crosses(a, b)) throw std::domain_error("tube: section loop self-intersects");
            }
    }
}

namespace {

enum class LeafState { InBetween, Outside, Invalid };

struct LeafImage {
    LeafState state = LeafState::Invalid;
    UUDisc branch;        // spanning branch of this class, if any
    double gapMinus = 0;  // z(p-) - ptilde-   (defined when state != Invalid)
    double gapPlus = 0;   // z(p+) - ptilde+
};

// Image of one leaf restricted to the branch class: cls=-1 keeps the branch with
// negative source heights, cls=+1 the positive one.
LeafImage leaf_image(const HenonParams& p, const UUDisc& leaf, int cls, const FixedPointPair& fp,
                     const Box3& box, const ConeSpec& cone, int resample) {
    UUDisc fresh = leaf;
    for (size_t i = 0; i < fresh.pts.size(); ++i) fresh.src[i] = fresh.pts[i].y;  // immediate provenance
    auto branches = iterate_disc(p, fresh, box, cone, resample);
    LeafImage li;
    double bestExt = 0;
    for (auto& br : branches) {
        double mid = 0.5 * (br.src.front() + br.src.back());
        if ((cls < 0) != (mid < 0)) continue;
        if (!br.spansY(fp.pMinus, fp.pPlus, 1e-9)) continue;
        if (br.yExtent() > bestExt) {
            bestExt = br.yExtent();
            li.branch = br;
        }
    }
    if (li.branch.pts.empty()) return li;
    double zLo = std::min(fp.pTildeMinus, fp.pTildePlus);
    double zHi = std::max(fp.pTildeMinus, fp.pTildePlus);
    double zm = li.branch.at(fp.pMinus).z, zp = li.branch.at(fp.pPlus).z;
    li.gapMinus = zm - fp.pTildeMinus;
    li.gapPlus = zp - fp.pTildePlus;
    bool inside = zm > zLo && zm < zHi && zp > zLo && zp < zHi &&
                  box.contains(li.branch.at(fp.pMinus)) && box.contains(li.branch.at(fp.pPlus));
    double margin = std::min({zm - zLo, zHi - zm, zp - zLo, zHi - zp});
    li.state = (inside && margin > kGapTol) ? LeafState::InBetween : LeafState::Outside;
    return li;
}

// Zero-touch or sign change of a gap sequence; used for both strip and tube sides.
struct GapScan {
    bool touches = false;     // min |g| below tolerance
    bool signChange = false;  // consecutive defined values change sign
    int touchIndex = -1;
};

GapScan scan_gaps(const std::vector<double>& g, const std::vector<bool>& defined, bool cyclic) {
    GapScan sc;
    double best = std::numeric_limits<double>::infinity();
    int n = int(g.size());
    for (int i = 0; i < n; ++i) {
        if (!defined[i]) continue;
        if (std::fabs(g[i]) < best) {
            best = std::fabs(g[i]);
            sc.touchIndex = i;
        }
    }
    sc.touches = best < kGapTol;
    int prev = -1;
    int limit = cyclic ? n + 1 : n;
    for (int k = 0; k < limit; ++k) {
        int i = k % n;
        if (!defined[i]) continue;
        if (prev >= 0 && g[prev] * g[i] < 0) sc.signChange = true;
        prev = i;
    }
    return sc;
}

}  // namespace

StepOutcome classify_strip_step(const HenonParams& p, const UStrip& s, const FixedPointPair& fp,
                                const Box3& box, const ConeSpec& cone, int resample) {
    if (!strip_in_between(s, fp, box))
        throw std::domain_error("classify_strip_step: strip is not in-between");
    int m = int(s.discs.size());

    std::array<std::vector<LeafImage>, 2> cls;  // 0 -> negative branch, 1 -> positive branch
    cls[0].resize(m);
    cls[1].resize(m);
    for (int i = 0; i < m; ++i) {
        cls[0][i] = leaf_image(p, s.discs[i], -1, fp, box, cone, resample);
        cls[1][i] = leaf_image(p, s.discs[i], +1, fp, box, cone, resample);
    }

    // transverse crossing of either stable line by any branch family
    for (int c = 0; c < 2; ++c) {
        std::vector<double> gm(m), gp(m);
        std::vector<bool> def(m);
        for (int i = 0; i < m; ++i) {
            def[i] = cls[c][i].state != LeafState::Invalid;
            gm[i] = def[i] ? cls[c][i].gapMinus : 0;
            gp[i] = def[i] ? cls[c][i].gapPlus : 0;
        }
        GapScan sm = scan_gaps(gm, def, false);
        GapScan sp = scan_gaps(gp, def, false);
        if (sm.touches || sm.signChange) return StripTransverse{-1};
        if (sp.touches || sp.signChange) return StripTransverse{+1};
    }

    for (int c : {0, 1}) {
        bool all = true;
        for (int i = 0; i < m; ++i) all = all && cls[c][i].state == LeafState::InBetween;
        if (!all) continue;
        UStrip grown;
        grown.discs.reserve(m);
        for (int i = 0; i < m; ++i) grown.discs.push_back(std::move(cls[c][i].branch));
        double w0 = strip_width(s, cone);
        double w1 = strip_width(grown, cone);
        return StripGrown{std::move(grown), w1 / w0};
    }
    throw std::runtime_error("classify_strip_step: image degenerates, no branch family survives");
}

StepOutcome classify_tube_step(const HenonParams& p, const UUTube& t, const FixedPointPair& fp,
                               const Box3& box, const ConeSpec& cone, int resample) {
    if (!tube_in_between(t, fp, box))
        throw std::domain_error("classify_tube_step: tube is not in-between");
    int m = int(t.discs.size());  // discs[m-1] == discs[0]

    std::array<std::vector<LeafImage>, 2> cls;
    cls[0].resize(m);
    cls[1].resize(m);
    for (int i = 0; i < m; ++i) {
        cls[0][i] = leaf_image(p, t.discs[i], -1, fp, box, cone, resample);
        cls[1][i] = leaf_image(p, t.discs[i], +1, fp, box, cone, resample);
    }

    // (c) a full in-between loop in some branch class
    int grownClass = -1;
    for (int c : {0, 1}) {
        bool all = true;
        for (int i = 0; i < m; ++i) all = all && cls[c][i].state == LeafState::InBetween;
        if (all) { grownClass = c; break; }
    }
    if (grownClass >= 0) {
        UUTube grown;
        grown.discs.reserve(m);
        for (int i = 0; i < m; ++i) grown.discs.push_back(std::move(cls[grownClass][i].branch));
        grown.discs.back() = grown.discs.front();  // exact seam
        double ratio = tube_width(grown) / tube_width(t);
        return TubeGrown{std::move(grown), ratio};
    }

    // working class: the one with more in-between leaves
    int nIn[2] = {0, 0};
    for (int c : {0, 1})
        for (int i = 0; i < m; ++i) nIn[c] += cls[c][i].state == LeafState::InBetween;
    int c = nIn[0] >= nIn[1] ? 0 : 1;
    if (nIn[c] == 0)
        throw std::runtime_error("classify_tube_step: image degenerates, no in-between leaf");

    int loop = m - 1;  // cyclic index range, seam leaf dropped
    std::vector<double> gm(loop), gp(loop);
    std::vector<bool> def(loop), inb(loop);
    for (int i = 0; i < loop; ++i) {
        def[i] = cls[c][i].state != LeafState::Invalid;
        inb[i] = cls[c][i].state == LeafState::InBetween;
        gm[i] = def[i] ? cls[c][i].gapMinus : 0;
        gp[i] = def[i] ? cls[c][i].gapPlus : 0;
    }

    // (a) zero touch without sign change in a halo around the touch
    int halo = std::max(1, int(kTangencyHalo * loop));
    for (int side = 0; side < 2; ++side) {
        const auto& g = side == 0 ? gm : gp;
        GapScan sc = scan_gaps(g, def, true);
        if (!sc.touches) continue;
        bool flips = false;
        int prev = -1;
        for (int k = -halo; k <= halo; ++k) {
            int i = ((sc.touchIndex + k) % loop + loop) % loop;
            if (!def[i]) continue;
            if (prev >= 0 && g[prev] * g[i] < 0) flips = true;
            prev = i;
        }
        if (!flips)
            return TubeTangency{side == 0 ? -1 : +1, double(sc.touchIndex) / loop};
    }

    // (b) folding: maximal cyclic in-between arc with both boundaries crossing
    // the same stable line
    int start = -1;
    for (int i = 0; i < loop && start < 0; ++i)
        if (!inb[i] && inb[(i + 1) % loop]) start = (i + 1) % loop;
    if (start < 0)
        throw std::runtime_error("classify_tube_step: inconsistent in-between pattern");
    int bestStart = 0, bestLen = 0;
    {
        int i = start, n = 0;
        while (n < loop) {
            if (inb[i]) {
                int runStart = i, runLen = 0;
                while (runLen < loop && inb[i]) { ++runLen; ++n; i = (i + 1) % loop; }
                if (runLen > bestLen) { bestLen = runLen; bestStart = runStart; }
            } else {
                ++n;
                i = (i + 1) % loop;
            }
        }
    }
    auto crossing_side = [&](int inside, int outside) -> int {
        // which gap moved toward / across its zero between the two leaves
        if (!def[outside]) return 0;
        if (gm[inside] * gm[outside] <= 0 || std::fabs(gm[outside]) < kGapTol) return -1;
        if (gp[inside] * gp[outside] <= 0 || std::fabs(gp[outside]) < kGapTol) return +1;
        return 0;
    };
    int endIdx = (bestStart + bestLen - 1) % loop;
    int beforeIdx = (bestStart - 1 + loop) % loop;
    int afterIdx = (endIdx + 1) % loop;
    int sideA = crossing_side(bestStart, beforeIdx);
    int sideB = crossing_side(endIdx, afterIdx);
    if (sideA != 0 && sideA == sideB) {
        FoldingSurface fs;
        fs.side = sideA;
        fs.discs.push_back(cls[c][beforeIdx].branch);
        for (int k = 0; k < bestLen; ++k) fs.discs.push_back(cls[c][(bestStart + k) % loop].branch);
        fs.discs.push_back(cls[c][afterIdx].branch);
        return TubeFolding{std::move(fs)};
    }
    // boundary leaves cross different lines: report the closer approach as a tangency
    GapScan sm = scan_gaps(gm, def, true), sp = scan_gaps(gp, def, true);
    double am = sm.touchIndex >= 0 ? std::fabs(gm[sm.touchIndex]) : 1e300;
    double ap = sp.touchIndex >= 0 ? std::fabs(gp[sp.touchIndex]) : 1e300;
    if (std::min(am, ap) < kGapTol)
        return TubeTangency{am < ap ? -1 : +1, double((am < ap ? sm : sp).touchIndex) / loop};
    throw std::runtime_error("classify_tube_step: folding boundaries cross different stable lines");
}

TubeRunResult run_tube_until_tangency(const HenonParams& p, const UUTube& t, int maxSteps,
                                      const Box3& box, const ConeSpec& cone, int resample) {
    FixedPointPair fp = fixed_points_G(p);
    if (!tube_in_between(t, fp, box))
        throw std::domain_error("run_tube_until_tangency: tube is not in-between");
    TubeRunResult res;
    UUTube cur = t;
    res.widths.push_back(tube_width(cur));
    double geo = 0;
    int ngrow = 0;
    double lmin = std::numeric_limits<double>::infinity();
    for (int k = 0; k < maxSteps; ++k) {
        StepOutcome out = classify_tube_step(p, cur, fp, box, cone, resample);
        res.trace.push_back(out);
        if (auto* g = std::get_if<TubeGrown>(&res.trace.back())) {
            cur = g->tube;
            double w = tube_width(cur);
            if (w <= res.widths.back())
                throw std::runtime_error("run_tube_until_tangency: width failed to grow");
            geo += std::log(g->ratio);
            lmin = std::min(lmin, g->ratio);
            ++ngrow;
            res.widths.push_back(w);
            continue;
        }
        res.terminated = true;
        break;
    }
    res.lambdaGeo = ngrow ? std::exp(geo / ngrow) : 0.0;
    res.lambdaMin = ngrow ? lmin : 0.0;
    return res;
}

UStrip make_vertical_strip(double x0, double z0, double z1, int leaves, int samples, double yHalf) {
    UStrip s;
    s.discs.reserve(leaves);
    for (int k = 0; k < leaves; ++k) {
        double z = z0 + (z1 - z0) * k / double(leaves - 1);
        std::vector<Vec3> pts;
        pts.reserve(samples);
        for (int i = 0; i < samples; ++i) {
            double y = -yHalf + 2 * yHalf * (i + 0.5) / samples;
            pts.push_back({x0, y, z});
        }
        s.discs.push_back(UUDisc(std::move(pts)));
    }
    return s;
}

UUTube make_loop_tube(double xAmp, double zCenter, double zAmp, int leaves, int samples, double yHalf) {
    UUTube t;
    t.discs.reserve(leaves);
    for (int k = 0; k < leaves; ++k) {
        double ang = 2 * std::numbers::pi * k / double(leaves - 1);
        double x = xAmp * std::sin(ang), z = zCenter + zAmp * std::cos(ang);
        std::vector<Vec3> pts;
        pts.reserve(samples);
        for (int i = 0; i < samples; ++i) {
            double y = -yHalf + 2 * yHalf * (i + 0.5) / samples;
            pts.push_back({x, y, z});
        }
        t.discs.push_back(UUDisc(std::move(pts)));
    }
    t.discs.back() = t.discs.front();
    return t;
}

}  // namespace blab
