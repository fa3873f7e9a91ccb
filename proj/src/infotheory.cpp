#include "seqclone/infotheory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "seqclone/curves.hpp"

namespace seqclone::info {

namespace {

void require_unit_interval(double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) {
        throw std::domain_error(std::string(what) + ": argument must lie in [0, 1]");
    }
}

// x log2(x / y) with 0 log 0 := 0
double xlog2_ratio(double x, double y) { return x == 0.0 ? 0.0 : x * std::log2(x / y); }

} // namespace

double binary_entropy(double p) {
    require_unit_interval(p, "binary_entropy");
    return -xlog2_ratio(p, 1.0) - xlog2_ratio(1.0 - p, 1.0);
}

double info_ab(double f) {
    require_unit_interval(f, "info_ab");
    return 1.0 - binary_entropy(f);
}

double info_ae_bb84(double fe) {
    require_unit_interval(fe, "info_ae_bb84");
    return info_ab(fe);
}

double info_ae_six(double fb, double fe) {
    require_unit_interval(fb, "info_ae_six");
    require_unit_interval(fe, "info_ae_six");
    if (fb <= 0.0) {
        throw std::domain_error("info_ae_six: F_B must be positive");
    }
    const double joint = fb + fe - 1.0;
    if (joint < 0.0) {
        throw std::domain_error("info_ae_six: requires F_B + F_E >= 1");
    }
    return 1.0 + xlog2_ratio(joint, fb) + xlog2_ratio(1.0 - fe, fb);
}

double info_ae(Protocol protocol, double fb) {
    const double fe = opt::optimal_fe(protocol, fb);
    return protocol == Protocol::BB84 ? info_ae_bb84(fe) : info_ae_six(fb, fe);
}

double ck_rate(double i_ab, double i_ae, double i_be) { return std::max(i_ab - i_ae, i_ab - i_be); }

InfoCurvePoint info_curve_point(Protocol protocol, double fb) {
    InfoCurvePoint p{};
    p.fb = fb;
    p.fe = opt::optimal_fe(protocol, fb);
    p.i_ab = info_ab(fb);
    p.i_ae = protocol == Protocol::BB84 ? info_ae_bb84(p.fe) : info_ae_six(fb, p.fe);
    p.rate_lower_bound = ck_rate(p.i_ab, p.i_ae, p.i_ae);
    return p;
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
    double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) {
        return lo;
    }
    if (fhi == 0.0) {
        return hi;
    }
    if ((flo < 0.0) == (fhi < 0.0)) {
        throw std::runtime_error("bisect: no sign change in bracket");
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
            break;
        }
        const double fm = f(mid);
        if (fm == 0.0) {
            return mid;
        }
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double threshold(Protocol protocol) {
    const auto gap = [protocol](double fb) { return info_ab(fb) - info_ae(protocol, fb); };
    // Tighter than kThresholdTol so the midpoint is well inside the tolerance.
    return bisect(gap, 0.5, 1.0, kThresholdTol * 1e-3);
}

} // namespace seqclone::info
