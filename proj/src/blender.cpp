#include "blab/blender.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "blab/rng.hpp"

namespace blab {

UUDisc::UUDisc(std::vector<Vec3> p) : pts(std::move(p)) {
    src.resize(pts.size());
    for (size_t i = 0; i < pts.size(); ++i) src[i] = pts[i].y;
}

UUDisc UUDisc::lineL(int samples, double yHalf) {
    std::vector<Vec3> p;
    p.reserve(samples);
    // open interval |y| < yHalf, sampled cell-centered
    for (int i = 0; i < samples; ++i) {
        double y = -yHalf + (2 * yHalf) * (i + 0.5) / samples;
        p.push_back({0.0, y, 0.0});
    }
    return UUDisc(std::move(p));
}

namespace {

size_t bracket(const std::vector<Vec3>& pts, double y) {
    // pts strictly increasing in y; returns i with pts[i].y <= y <= pts[i+1].y
    size_t lo = 0, hi = pts.size() - 1;
    while (hi - lo > 1) {
        size_t mid = (lo + hi) / 2;
        if (pts[mid].y <= y) lo = mid; else hi = mid;
    }
    return lo;
}

}  // namespace

Vec3 UUDisc::at(double y) const {
    if (pts.size() < 2 || y < yMin() - 1e-9 || y > yMax() + 1e-9)
        throw std::domain_error("UUDisc::at: y outside disc range");
    double yc = std::clamp(y, yMin(), yMax());
    size_t i = bracket(pts, yc);
    double dy = pts[i + 1].y - pts[i].y;
    double t = dy > 0 ? (yc - pts[i].y) / dy : 0.0;
    return pts[i] + (pts[i + 1] - pts[i]) * t;
}

double UUDisc::srcAt(double y) const {
    double yc = std::clamp(y, yMin(), yMax());
    size_t i = bracket(pts, yc);
    double dy = pts[i + 1].y - pts[i].y;
    double t = dy > 0 ? (yc - pts[i].y) / dy : 0.0;
    return src[i] + (src[i + 1] - src[i]) * t;
}

DiscCheck validate_uu_disc(const UUDisc& d, const ConeSpec& c) {
    if (d.pts.size() < 2) throw std::invalid_argument("validate_uu_disc: need at least 2 samples");
    DiscCheck r;
    r.pass = true;
    for (size_t i = 0; i + 1 < d.pts.size(); ++i) {
        Vec3 ch = d.pts[i + 1] - d.pts[i];
        double dy = std::fabs(ch.y);
        double uw = std::hypot(ch.x, ch.z);
        double ratio = dy > 0 ? uw / dy : std::numeric_limits<double>::infinity();
        if (ratio > r.worstRatio) {
            r.worstRatio = ratio;
            r.worstIndex = int(i);
        }
        if (!(uw < c.uuRatio * dy)) r.pass = false;
    }
    return r;
}

double crossing_z(const UUDisc& d, double y) { return d.at(y).z; }

bool in_between_test(const UUDisc& d, const FixedPointPair& fp, const Box3& box) {
    if (!d.spansY(fp.pMinus, fp.pPlus, 1e-9))
        throw std::domain_error("in_between_test: disc does not span [p-, p+]");
    double zLo = std::min(fp.pTildeMinus, fp.pTildePlus);
    double zHi = std::max(fp.pTildeMinus, fp.pTildePlus);
    Vec3 cMinus = d.at(fp.pMinus);
    Vec3 cPlus = d.at(fp.pPlus);
    return cMinus.z > zLo && cMinus.z < zHi &&
           cPlus.z > zLo && cPlus.z < zHi &&
           box.contains(cMinus) && box.contains(cPlus);
}

namespace {

// t-interval of segment a + t(b-a), t in [0,1], inside the box (slab clipping).
std::optional<std::pair<double, double>> clip_segment(const Vec3& a, const Vec3& b, const Box3& box) {
    double t0 = 0.0, t1 = 1.0;
    for (int ax = 0; ax < 3; ++ax) {
        double pa = a[ax], pb = b[ax], lo = box.lo[ax], hi = box.hi[ax];
        double dp = pb - pa;
        if (dp == 0.0) {
            if (pa < lo || pa > hi) return std::nullopt;
            continue;
        }
        double u0 = (lo - pa) / dp, u1 = (hi - pa) / dp;
        if (u0 > u1) std::swap(u0, u1);
        t0 = std::max(t0, u0);
        t1 = std::min(t1, u1);
        if (t0 > t1) return std::nullopt;
    }
    return std::make_pair(t0, t1);
}

struct RawBranch {
    std::vector<Vec3> pts;
    std::vector<double> src;
};

UUDisc resample_branch(RawBranch& br, int n) {
    if (br.pts.front().y > br.pts.back().y) {
        std::reverse(br.pts.begin(), br.pts.end());
        std::reverse(br.src.begin(), br.src.end());
    }
    UUDisc out;
    out.pts.reserve(n);
    out.src.reserve(n);
    double y0 = br.pts.front().y, y1 = br.pts.back().y;
    size_t j = 0;
    for (int i = 0; i < n; ++i) {
        double y = y0 + (y1 - y0) * i / double(n - 1);
        while (j + 2 < br.pts.size() && br.pts[j + 1].y <= y) ++j;
        double dy = br.pts[j + 1].y - br.pts[j].y;
        double t = dy != 0 ? (y - br.pts[j].y) / dy : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        out.pts.push_back(br.pts[j] + (br.pts[j + 1] - br.pts[j]) * t);
        out.src.push_back(br.src[j] + (br.src[j + 1] - br.src[j]) * t);
    }
    return out;
}

}  // namespace

std::vector<UUDisc> iterate_disc(const HenonParams& p, const UUDisc& d, const Box3& box,
                                 const ConeSpec& cone, int resample) {
    if (d.pts.size() < 2) throw std::invalid_argument("iterate_disc: need at least 2 samples");

    std::vector<Vec3> img(d.pts.size());
    for (size_t i = 0; i < d.pts.size(); ++i) img[i] = eval_G(p, d.pts[i]);

    std::vector<UUDisc> out;
    RawBranch cur;
    int dir = 0;
    auto close = [&]() {
        if (cur.pts.size() >= 2 && std::fabs(cur.pts.back().y - cur.pts.front().y) > 1e-9)
            out.push_back(resample_branch(cur, resample));
        cur = RawBranch{};
        dir = 0;
    };

    for (size_t i = 0; i + 1 < img.size(); ++i) {
        const Vec3 &a = img[i], &b = img[i + 1];
        double dy = b.y - a.y;
        double uw = std::hypot(b.x - a.x, b.z - a.z);
        int sdir = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
        bool chordOk = sdir != 0 && uw < cone.uuRatio * std::fabs(dy);
        if (!chordOk || (dir != 0 && sdir != dir)) {
            close();
            continue;
        }
        auto clip = clip_segment(a, b, box);
        if (!clip) {
            close();
            continue;
        }
        auto [t0, t1] = *clip;
        double sa = d.src[i], sb = d.src[i + 1];
        Vec3 pa = a + (b - a) * t0, pb = a + (b - a) * t1;
        double qa = sa + (sb - sa) * t0, qb = sa + (sb - sa) * t1;
        if (t0 > 0.0 && !cur.pts.empty()) close();
        if (cur.pts.empty()) {
            cur.pts.push_back(pa);
            cur.src.push_back(qa);
            dir = sdir;
        }
        cur.pts.push_back(pb);
        cur.src.push_back(qb);
        if (t1 < 1.0) close();
    }
    close();
    return out;
}

namespace {

// Smaller distance of the two crossing z-values to the in-between window edges.
double crossing_margin(const UUDisc& d, const FixedPointPair& fp) {
    double zLo = std::min(fp.pTildeMinus, fp.pTildePlus);
    double zHi = std::max(fp.pTildeMinus, fp.pTildePlus);
    double m = std::numeric_limits<double>::infinity();
    for (double y : {fp.pMinus, fp.pPlus}) {
        double z = d.at(y).z;
        m = std::min({m, z - zLo, zHi - z});
    }
    return m;
}

}  // namespace

std::optional<UUDisc> covering_step(const HenonParams& p, const UUDisc& d, const FixedPointPair& fp,
                                    const Box3& box, const ConeSpec& cone, int resample) {
    if (!in_between_test(d, fp, box))
        throw std::domain_error("covering_step: input disc is not in-between");
    auto branches = iterate_disc(p, d, box, cone, resample);
    const UUDisc* best = nullptr;
    double bestExtent = 0, bestMargin = 0;
    for (const auto& br : branches) {
        if (!br.spansY(fp.pMinus, fp.pPlus, 1e-9)) continue;
        if (!in_between_test(br, fp, box)) continue;
        double ext = br.yExtent();
        double mar = crossing_margin(br, fp);
        if (!best || ext > bestExtent + 1e-9 ||
            (std::fabs(ext - bestExtent) <= 1e-9 && mar > bestMargin)) {
            best = &br;
            bestExtent = ext;
            bestMargin = mar;
        }
    }
    if (!best) return std::nullopt;
    return *best;
}

Certification certify_superposition(const HenonParams& p, const UUDisc& d, int n,
                                    const Box3& box, const ConeSpec& cone, int resample) {
    if (!in_between_test(d, fixed_points_G(p), box))
        throw std::domain_error("certify_superposition: seed disc is not in-between");
    FixedPointPair fp = fixed_points_G(p);

    Certification cert;
    cert.intervals.push_back({d.src.front(), d.src.back()});
    UUDisc cur = d;
    for (int k = 0; k < n; ++k) {
        auto next = covering_step(p, cur, fp, box, cone, resample);
        if (!next) {
            cert.failStep = k;
            return cert;
        }
        cur = *next;
        auto [lo, hi] = std::minmax_element(cur.src.begin(), cur.src.end());
        cert.intervals.push_back({*lo, *hi});
    }
    cert.ok = true;
    cert.witnessParam = 0.5 * (cert.intervals.back().first + cert.intervals.back().second);
    cert.witness = d.at(cert.witnessParam);  // seed discs are parameterized by their own y

    double worst = 0;
    for (size_t i = 2; i < cert.intervals.size(); ++i) {
        double w0 = cert.intervals[i - 1].second - cert.intervals[i - 1].first;
        double w1 = cert.intervals[i].second - cert.intervals[i].first;
        if (w0 > 0) worst = std::max(worst, w1 / w0);
    }
    cert.contraction = worst;

    Vec3 w = cert.witness;
    cert.orbitInside = true;
    for (int k = 0; k < n; ++k) {
        w = eval_G(p, w);
        if (!box.contains(w, 1e-6)) {
            cert.orbitInside = false;
            break;
        }
    }
    return cert;
}

int cone_invariance_sample(const HenonParams& p, const Box3& region, double yMin, int samples,
                           std::uint64_t seed, const ConeSpec& cone) {
    if (yMin < std::sqrt(5.0) - 1e-12)
        throw std::invalid_argument("cone_invariance_sample: need yMin >= sqrt(5)");
    Rng rng(seed);
    int violations = 0;
    for (int i = 0; i < samples; ++i) {
        Vec3 z;
        do {
            z = rng.inBox(region);
        } while (std::fabs(z.y) < yMin);
        // strictly interior direction of C^u
        double phi = rng.uniform(0, 2 * std::numbers::pi);
        double u = rng.uniform(-1, 1) * cone.uRatio * (1 - 1e-12);
        Vec3 v{u, std::cos(phi), std::sin(phi)};
        double nv = v.norm2();
        v = v * (1.0 / nv);

        Vec3 w = jacobian_G(p, z) * v;
        bool inCone = std::fabs(w.x) < cone.uRatio * std::hypot(w.y, w.z);
        bool expands = std::hypot(w.y, w.z) > std::hypot(v.y, v.z);
        if (!inCone || !expands) ++violations;
    }
    return violations;
}

SeparatrixTrace separatrix_trace(const HenonParams& p, int steps) {
    if (p.eta1 != 0.0 || p.eta2 != 0.0)
        throw std::invalid_argument("separatrix_trace: closed-form seeds need eta = 0");
    FixedPointPair fp = fixed_points_G(p);
    SeparatrixTrace tr;

    // Invariant line L = {(p+, p+, ptilde+ + t)}: the restriction of G is t -> xi*t.
    double ext = 1.0;  // seed segment t in [0,1]
    for (int k = 0; k < steps; ++k) {
        ext *= p.xi;
        tr.lineExtent.push_back(ext);
    }

    // Transverse seed inside G({y >= p+}): the image of {(p+, p+ + s, ptilde+)}.
    const int ns = 400;
    std::vector<Vec3> cur(ns);
    for (int i = 0; i < ns; ++i) {
        double s = double(i) / (ns - 1);
        cur[i] = eval_G(p, {fp.pPlus, fp.pPlus + s, fp.pTildePlus});
    }
    double ymax = 0, zmax = 0;
    const double cap = 1e300;
    for (int k = 0; k < steps; ++k) {
        double ylo = cur[0].y, yhi = cur[0].y, zlo = cur[0].z, zhi = cur[0].z;
        bool overflow = false;
        for (auto& q : cur) {
            q = eval_G(p, q);
            if (!q.finite() || q.normInf() > cap) { overflow = true; break; }
            ylo = std::min(ylo, q.y); yhi = std::max(yhi, q.y);
            zlo = std::min(zlo, q.z); zhi = std::max(zhi, q.z);
        }
        if (overflow) {
            tr.overflowStep = k;
            break;
        }
        ymax = std::max(ymax, yhi - ylo);
        zmax = std::max(zmax, zhi - zlo);
        tr.yExtent.push_back(ymax);
        tr.zExtent.push_back(zmax);
    }
    for (const auto& q : cur)
        if (q.finite()) tr.yzPoints.push_back({q.y, q.z});
    return tr;
}

}  // namespace blab
