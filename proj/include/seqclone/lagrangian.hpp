// Stationarity checks for the tensor-power cloners.
//
// Two checks are provided. The printed form works on the base coefficients
// (v, x, y) with
//   F_E = (1/N) sum_m (N - |m|) prod_i A^{1-m_i} B^{m_i} = A S^{N-1}
//   F_B = (1/N) sum_m (N - |m|) prod_i P^{1-m_i} Q^{m_i}
//   G   = S^N - 1
// where A = v^2+x^2, B = x^2+y^2, P = 1/2+vx+xy, Q = 1/2-vx-xy and
// S = v^2+2x^2+y^2; the six-state variant sets y = x. The full check works on
// all 4^N amplitudes against every per-class constraint.

#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "seqclone/cloner.hpp"
#include "seqclone/objective.hpp"
#include "seqclone/types.hpp"

namespace seqclone::opt {

/// Base factor [[v, x], [x, y]] of Eve's amplitudes; y == x for six-state.
struct TensorCoefficients {
    double v;
    double x;
    double y;
};

/// Eve's optimal base at Bob fidelity fb.
TensorCoefficients optimal_tensor_coefficients(Protocol protocol, double fb);

cloner::AmplitudeMatrix tensor_cloner(const TensorCoefficients& c, int qubits);

/// Recovers the base of a real symmetric tensor power, or nothing if `a` is
/// not one within tol (or lacks the protocol's x == y shape for six-state).
std::optional<TensorCoefficients> tensor_factor(const cloner::AmplitudeMatrix& a, Protocol protocol,
                                                double tol = 1e-10);

struct LagrangianFit {
    double residual;
    double lambda_fb;
    double lambda_norm;
};

/// grad F_E + l1 grad F_B + l2 grad G over (v, x, y) (over (v, x) for
/// six-state), with (l1, l2) fitted by least squares.
LagrangianFit printed_lagrangian_fit(Protocol protocol, int qubits, const TensorCoefficients& c);

/// printed_lagrangian_fit on the factor of `a`. Throws std::invalid_argument
/// if `a` is not a tensor power of the protocol's shape.
double lagrangian_residual(const cloner::AmplitudeMatrix& a, Protocol protocol);

/// Full-space stationarity residual of `a` with the Bob target set to the
/// fidelity `a` achieves.
double kkt_residual(const cloner::AmplitudeMatrix& a, Protocol protocol);

/// BB84 only: scales v by (1 + relative) and re-solves (x, y) so that
/// S = 1 and P keeps its value, i.e. a different point on the printed
/// constraint surface.
TensorCoefficients perturb_on_constraint_curve(const TensorCoefficients& c, double relative);

/// Moves `a` by relative * |a| along a seeded random direction tangent to the
/// constraint set of `objective`, then projects back onto it.
Eigen::VectorXd perturbed_feasible_point(const CloningObjective& objective, const Eigen::VectorXd& a,
                                         double relative, std::uint64_t seed);

} // namespace seqclone::opt
