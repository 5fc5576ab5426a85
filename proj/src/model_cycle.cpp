#include "blab/model_cycle.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace blab {

Vec3 PolyMap::eval(const Vec3& w) const {
    Vec3 out{0, 0, 0};
    for (const auto& t : terms) {
        double v = t.coeff;
        for (int k = 0; k < t.ex; ++k) v *= w.x;
        for (int k = 0; k < t.ey; ++k) v *= w.y;
        for (int k = 0; k < t.ez; ++k) v *= w.z;
        out[t.comp - 1] += v;
    }
    return out;
}

double PolyMap::secondDerivAt0(int comp, int i, int j) const {
    int want[3] = {0, 0, 0};
    want[i] += 1;
    want[j] += 1;
    double r = 0;
    for (const auto& t : terms) {
        if (t.comp != comp) continue;
        if (t.ex == want[0] && t.ey == want[1] && t.ez == want[2])
            r += t.coeff * (i == j ? 2.0 : 1.0);
    }
    return r;
}

bool PolyMap::flatAt0() const {
    for (const auto& t : terms)
        if (t.ex + t.ey + t.ez < 2) return false;
    return true;
}

bool PolyMap::flatSecondYZ(int comp) const {
    for (const auto& t : terms) {
        if (t.comp != comp) continue;
        if (t.ex == 0 && t.ey + t.ez == 2) return false;
    }
    return true;
}

namespace {

long long binom(int n, int k) {
    long long r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

// Coefficients of the order-N smoothstep S_N (degree 2N+1, C^N at both ends).
std::vector<double> smoothstep_coeffs(int N) {
    std::vector<double> c(2 * N + 2, 0.0);
    for (int k = 0; k <= N; ++k) {
        double v = double(binom(N + k, k)) * double(binom(2 * N + 1, N - k));
        if (k % 2) v = -v;
        c[N + 1 + k] = v;
    }
    return c;
}

double poly_deriv_eval(const std::vector<double>& c, int deriv, double t) {
    double s = 0;
    for (int d = int(c.size()) - 1; d >= deriv; --d) {
        double f = c[d];
        for (int j = 0; j < deriv; ++j) f *= (d - j);
        s = s * t + f;
    }
    return s;
}

}  // namespace

double BumpProfile::operator()(double x) const { return derivative(0, x); }

double BumpProfile::derivative(int k, double x) const {
    double ax = std::fabs(x);
    if (ax <= 1.0) return k == 0 ? 1.0 : 0.0;
    if (ax >= theta) return 0.0;
    auto coeffs = smoothstep_coeffs(order + 1);
    double scale = 1.0 / (theta - 1.0);
    double t = (ax - 1.0) * scale;
    double v = poly_deriv_eval(coeffs, k, t);
    for (int j = 0; j < k; ++j) v *= scale;
    v = -v;                      // descending band: b = 1 - S(t)
    if (k == 0) v += 1.0;
    if (x < 0 && k % 2 == 1) v = -v;  // even function
    return v;
}

double BumpProfile::crNorm(int r) const {
    double norm = 1.0;  // sup |b| = 1
    const int n = 4000;
    for (int k = 1; k <= r; ++k)
        for (int i = 0; i <= n; ++i) {
            double x = 1.0 + (theta - 1.0) * i / n;
            norm = std::max(norm, std::fabs(derivative(k, x)));
        }
    return norm;
}

CheckReport validate_model(const CycleModel& m, double xi, const ParamWindow& window) {
    CheckReport r;
    r.add("0<|lambdaP|<1", std::fabs(m.lambdaP), m.lambdaP != 0 && std::fabs(m.lambdaP) < 1);
    r.add("sigmaP>1", m.sigmaP, m.sigmaP > 1);
    r.add("0<lambdaQ<1", m.lambdaQ, m.lambdaQ > 0 && m.lambdaQ < 1);
    r.add("|sigmaQ|>1", std::fabs(m.sigmaQ), std::fabs(m.sigmaQ) > 1);
    r.add("alpha1*beta2*gamma3 != 0", m.alpha1 * m.beta2 * m.gamma3,
          m.alpha1 * m.beta2 * m.gamma3 != 0);
    r.add("b1*(a2*c3 - a3*c2) != 0", m.b1 * (m.a2 * m.c3 - m.a3 * m.c2),
          m.b1 * (m.a2 * m.c3 - m.a3 * m.c2) != 0);
    r.add("c2 == c3", m.c2 - m.c3, m.c2 == m.c3);
    r.add("gamma3*(a3-a2) > 0", m.gamma3 * (m.a3 - m.a2), m.gamma3 * (m.a3 - m.a2) > 0);
    r.add("(a2+a3)*(b2+b3+b4) != 0", (m.a2 + m.a3) * (m.b2 + m.b3 + m.b4),
          (m.a2 + m.a3) * (m.b2 + m.b3 + m.b4) != 0);
    double spec = m.spectralValue();
    r.add("spectral in (0,1)", spec, spec > 0 && spec < 1);
    r.add("Htilde flat at 0", 0, m.Htilde.flatAt0());
    r.add("H flat at 0", 0, m.H.flatAt0());
    r.add("H2 second y/z jets vanish", 0, m.H.flatSecondYZ(2));

    bool windowOk = false;
    double eta1 = 0, eta2 = 0;
    if (m.gamma3 * (m.a3 - m.a2) > 0) {
        SigmaVector s = sigma_params(m, xi);
        auto [e1, e2] = eta_of_sigma(s);
        eta1 = e1;
        eta2 = e2;
        windowOk = window.containsEta(xi, e1, e2);
        r.add("sigma1*sigma2*sigma5 != 0", s.s1 * s.s2 * s.s5, s.conjugable());
    }
    r.add("eta1 in window", eta1, std::fabs(eta1) < window.etaBound);
    r.add("eta2 in window", eta2, std::fabs(eta2) < window.etaBound);
    r.add("xi in window", xi, xi > window.xiLo && xi < window.xiHi);
    r.add("membership", 0, windowOk);
    return r;
}

SigmaVector sigma_params(const CycleModel& m, double xi) {
    if (m.a3 == m.a2) throw std::domain_error("sigma_params: a3 == a2");
    const double rt2 = std::sqrt(2.0);
    SigmaVector s;
    s.s1 = m.beta2 * (m.a2 + m.a3) / rt2;
    s.s2 = m.beta2 * m.beta2 * (m.b2 + m.b3 + m.b4) / 2.0;
    s.s3 = xi * xi * (m.b2 + m.b3 - m.b4) / ((m.a3 - m.a2) * (m.a3 - m.a2));
    s.s4 = xi * rt2 * m.beta2 * (m.b3 - m.b2) / (m.a3 - m.a2);
    s.s5 = m.beta2 * (m.c2 + m.c3) / rt2;
    return s;
}

double bump_pi(const BumpProfile& bp, double rho, const Vec3& w) {
    if (rho <= 0) throw std::invalid_argument("bump_pi: rho must be positive");
    return bp(w.x / rho) * bp(w.y / rho) * bp(w.z / rho);
}

Vec3 perturb_translation(const Vec3& z0, const Vec3& w, double rho, const Vec3& z,
                         const BumpProfile& bp) {
    if (rho <= 0) throw std::invalid_argument("perturb_translation: rho must be positive");
    Vec3 d = z - z0;
    if (d.normInf() >= bp.theta * rho) return z;
    return z + w * bump_pi(bp, rho, d);
}

Vec3 perturb_rotation(RotAxis axis, double omega, double theta, double kappa, const Vec3& w,
                      const BumpProfile& bp) {
    if (kappa <= 0) throw std::invalid_argument("perturb_rotation: kappa must be positive");
    BumpProfile prof = bp;
    prof.theta = theta;
    double ang = 2 * std::numbers::pi * prof(kappa * w.normInf()) * omega;
    double c = std::cos(ang), s = std::sin(ang);
    if (axis == RotAxis::X) return {w.x, c * w.y - s * w.z, s * w.y + c * w.z};
    return {c * w.x - s * w.z, w.y, s * w.x + c * w.z};
}

namespace {

Vec3 apply_A(const CycleModel& m, const Vec3& w) {
    return {m.alpha1 * w.x + m.alpha2 * w.y + m.alpha3 * w.z, m.beta2 * w.y, m.gamma3 * w.z};
}

Vec3 apply_B(const CycleModel& m, const Vec3& w) {
    return {m.a1 * w.x + m.a2 * w.y + m.a3 * w.z,
            m.b1 * w.x + m.b2 * w.y * w.y + m.b3 * w.z * w.z + m.b4 * w.y * w.z,
            m.c1 * w.x + m.c2 * w.y + m.c3 * w.z};
}

struct OmegaResult {
    Vec3 out;
    bool clean;  // value taken on a plateau: full translation, exact rotation, or identity
};

// Omega restricted to the U_P chart: translation ball at Xtilde, else the
// x-axis rotation; both are the identity outside their supports.
OmegaResult omega_P(const CycleModel& m, const UnfoldingParams& u, const Vec3& z) {
    double d = (z - CycleModel::Xtilde()).normInf();
    if (d < m.bump.theta * u.rho)
        return {perturb_translation(CycleModel::Xtilde(), u.nuBar, u.rho, z, m.bump), d <= u.rho};
    double n = z.normInf();
    return {perturb_rotation(RotAxis::X, u.alpha, m.theta1, m.kappa1, z, m.bump),
            n <= 1.0 / m.kappa1 || n >= m.theta1 / m.kappa1};
}

OmegaResult omega_Q(const CycleModel& m, const UnfoldingParams& u, const Vec3& z) {
    double d = (z - CycleModel::Ytilde()).normInf();
    if (d < m.bump.theta * u.rho)
        return {perturb_translation(CycleModel::Ytilde(), u.muBar, u.rho, z, m.bump), d <= u.rho};
    double n = z.normInf();
    return {perturb_rotation(RotAxis::Y, u.beta, m.theta2, m.kappa2, z, m.bump),
            n <= 1.0 / m.kappa2 || n >= m.theta2 / m.kappa2};
}

OmegaResult step_info(const CycleModel& m, const UnfoldingParams& u, Region region, const Vec3& z) {
    switch (region) {
        case Region::Q: {
            if (z.normInf() > m.aQ) throw std::domain_error("model_step: point outside U_Q");
            double c = std::cos(2 * std::numbers::pi * m.phiQ);
            double s = std::sin(2 * std::numbers::pi * m.phiQ);
            Vec3 f{m.lambdaQ * (c * z.x - s * z.z), m.sigmaQ * z.y, m.lambdaQ * (s * z.x + c * z.z)};
            return omega_Q(m, u, f);
        }
        case Region::P: {
            if (z.normInf() > m.aP) throw std::domain_error("model_step: point outside U_P");
            double c = std::cos(2 * std::numbers::pi * m.phiP);
            double s = std::sin(2 * std::numbers::pi * m.phiP);
            Vec3 f{m.lambdaP * z.x, m.sigmaP * (c * z.y - s * z.z), m.sigmaP * (s * z.y + c * z.z)};
            return omega_P(m, u, f);
        }
        case Region::X: {
            Vec3 w = z - CycleModel::Xpt();
            if (w.normInf() > m.rX) throw std::domain_error("model_step: point outside U_X");
            Vec3 f = CycleModel::Xtilde() + apply_A(m, w) + m.Htilde.eval(w);
            return omega_P(m, u, f);
        }
        case Region::Y: {
            Vec3 w = z - CycleModel::Ypt();
            if (w.normInf() > m.rY) throw std::domain_error("model_step: point outside U_Y");
            Vec3 f = CycleModel::Ytilde() + apply_B(m, w) + m.H.eval(w);
            return omega_Q(m, u, f);
        }
    }
    throw std::logic_error("model_step: bad region");
}

}  // namespace

Vec3 model_step(const CycleModel& m, const UnfoldingParams& u, Region region, const Vec3& z) {
    return step_info(m, u, region, z).out;
}

OrbitRecord return_map_orbit(const CycleModel& m, const UnfoldingParams& u, int n, int mSteps,
                             const Vec3& z0) {
    OrbitRecord rec;
    rec.returnTime = n + m.N1 + mSteps + m.N2;
    int idx = 0;
    Vec3 z = z0;

    auto fail = [&](int at) {
        rec.admissible = false;
        rec.escapeIndex = at;
        rec.final = z;
        return rec;
    };

    if ((z - CycleModel::Ytilde()).normInf() > 2 * u.rho) return fail(0);

    auto advance = [&](Region reg) {
        auto st = step_info(m, u, reg, z);
        z = st.out;
        rec.cleanSupports = rec.cleanSupports && st.clean;
        rec.points.push_back({reg, z});
        ++idx;
    };

    for (int i = 0; i < n; ++i) {
        if (z.normInf() > m.aQ) return fail(idx);
        advance(Region::Q);
    }
    if ((z - CycleModel::Xpt()).normInf() > m.rX) return fail(idx);
    advance(Region::X);
    if ((z - CycleModel::Xtilde()).normInf() > 2 * u.rho) return fail(idx);

    for (int j = 0; j < mSteps; ++j) {
        if (z.normInf() > m.aP) return fail(idx);
        advance(Region::P);
    }
    if ((z - CycleModel::Ypt()).normInf() > m.rY) return fail(idx);
    advance(Region::Y);
    if ((z - CycleModel::Ytilde()).normInf() > 2 * u.rho) return fail(idx);

    rec.admissible = true;
    rec.final = z;
    return rec;
}

namespace {

std::string strip_ws(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

CycleModel parse_model(const std::string& text) {
    CycleModel m;
    std::istringstream in(text);
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = strip_ws(line);
        if (line.empty()) continue;

        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "H" || key == "Htilde") {
            PolyMap::Term t;
            if (!(ls >> t.comp >> t.ex >> t.ey >> t.ez >> t.coeff))
                throw std::runtime_error("model: bad polynomial line " + std::to_string(lineNo));
            (key == "H" ? m.H : m.Htilde).terms.push_back(t);
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("model: expected key = value at line " + std::to_string(lineNo));
        key = strip_ws(line.substr(0, eq));
        std::string val = strip_ws(line.substr(eq + 1));
        double v = 0;
        try {
            v = std::stod(val);
        } catch (...) {
            throw std::runtime_error("model: bad number at line " + std::to_string(lineNo));
        }
        if (key == "lambdaP") m.lambdaP = v;
        else if (key == "sigmaP") m.sigmaP = v;
        else if (key == "phiP") m.phiP = v;
        else if (key == "lambdaQ") m.lambdaQ = v;
        else if (key == "sigmaQ") m.sigmaQ = v;
        else if (key == "phiQ") m.phiQ = v;
        else if (key == "alpha1") m.alpha1 = v;
        else if (key == "alpha2") m.alpha2 = v;
        else if (key == "alpha3") m.alpha3 = v;
        else if (key == "beta2") m.beta2 = v;
        else if (key == "gamma3") m.gamma3 = v;
        else if (key == "a1") m.a1 = v;
        else if (key == "a2") m.a2 = v;
        else if (key == "a3") m.a3 = v;
        else if (key == "b1") m.b1 = v;
        else if (key == "b2") m.b2 = v;
        else if (key == "b3") m.b3 = v;
        else if (key == "b4") m.b4 = v;
        else if (key == "c1") m.c1 = v;
        else if (key == "c2") m.c2 = v;
        else if (key == "c3") m.c3 = v;
        else if (key == "aP") m.aP = v;
        else if (key == "aQ") m.aQ = v;
        else if (key == "N1") m.N1 = int(v);
        else if (key == "N2") m.N2 = int(v);
        else if (key == "kappa1") m.kappa1 = v;
        else if (key == "theta1") m.theta1 = v;
        else if (key == "kappa2") m.kappa2 = v;
        else if (key == "theta2") m.theta2 = v;
        else if (key == "rX") m.rX = v;
        else if (key == "rY") m.rY = v;
        else if (key == "bumpTheta") m.bump.theta = v;
        else if (key == "bumpOrder") m.bump.order = int(v);
        else throw std::runtime_error("model: unknown key '" + key + "' at line " + std::to_string(lineNo));
    }
    if (!m.Htilde.flatAt0() || !m.H.flatAt0() || !m.H.flatSecondYZ(2))
        throw std::runtime_error("model: H/Htilde violate the flatness constraints");
    return m;
}

CycleModel load_model(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("model: cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_model(ss.str());
}

}  // namespace blab
