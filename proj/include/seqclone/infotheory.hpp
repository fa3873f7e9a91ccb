// Mutual-information curves, the one-way Csiszar-Korner key-rate bound and
// the security threshold where I_AB = I_AE. All information is in bits.

#pragma once

#include <functional>

#include "seqclone/types.hpp"

namespace seqclone::info {

/// -p log2 p - (1-p) log2 (1-p), with 0 log 0 := 0.
double binary_entropy(double p);

/// I_AB = 1 + F log2 F + (1-F) log2 (1-F) = 1 - h2(F).
double info_ab(double f);

/// Alice-Eve information for BB84: the same functional form in F_E.
double info_ae_bb84(double fe);

/// Alice-Eve information for the six-state protocol:
///   1 + (F_B+F_E-1) log2((F_B+F_E-1)/F_B) + (1-F_E) log2((1-F_E)/F_B).
/// Requires F_B > 0 and F_B + F_E >= 1.
double info_ae_six(double fb, double fe);

/// Alice-Eve information for the protocol's optimal cloner at Bob fidelity fb.
double info_ae(Protocol protocol, double fb);

/// max(I_AB - I_AE, I_AB - I_BE). Pass I_BE = I_AE for the sufficient-condition bound.
double ck_rate(double i_ab, double i_ae, double i_be);

struct InfoCurvePoint {
    double fb;
    double fe;
    double i_ab;
    double i_ae;
    double rate_lower_bound;
};

/// Closed-form optimal-cloner curve point at Bob fidelity fb.
InfoCurvePoint info_curve_point(Protocol protocol, double fb);

inline constexpr double kThresholdTol = 1e-10;

/// Root of f on [lo, hi] by bisection to absolute tolerance tol. Throws
/// std::runtime_error if f(lo) and f(hi) have the same sign.
double bisect(const std::function<double(double)>& f, double lo, double hi, double tol);

/// Bob fidelity at which I_AB = I_AE along the protocol's optimal-cloner curve.
double threshold(Protocol protocol);

} // namespace seqclone::info
