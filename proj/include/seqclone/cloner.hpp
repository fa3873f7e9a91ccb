// Pauli-error cloning machines acting on N-qubit sequences.
//
// A cloner is fully described by an amplitude matrix a_{m,n} over Pauli
// labels. The joint output is
//
//   sum_{m,n} a_{m,n} U_{m,n}|psi>_E |B_{m,n}>_{B,C}
//     = sum_{m,n} b_{m,n} U_{m,n}|psi>_B |B_{m,n}>_{E,C},
//
// with b the sign-kernel Fourier dual of a. Each clone is the Pauli channel
// with weights |a|^2 (Eve) or |b|^2 (Bob) applied to the input.

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "seqclone/qkit.hpp"
#include "seqclone/types.hpp"

namespace seqclone::cloner {

using qkit::cplx;
using qkit::DensityMatrix;
using qkit::EnsembleEntry;
using qkit::InputEnsemble;
using qkit::PureState;

inline constexpr int kMaxTensorQubits = 8;

/// 2^N x 2^N table a_{m,n}; row index m (bit flips), column index n (phase
/// flips), both big-endian bit vectors.
class AmplitudeMatrix {
  public:
    /// Throws std::invalid_argument unless entries are 2^N x 2^N and
    /// sum |a|^2 = 1 within 1e-10.
    AmplitudeMatrix(int qubits, Eigen::MatrixXcd entries);

    static AmplitudeMatrix identity(int qubits);
    /// Real amplitudes from a flattened vector, index m * 2^N + n.
    static AmplitudeMatrix from_flat(int qubits, const Eigen::VectorXd& flat);

    int qubits() const { return qubits_; }
    Eigen::Index dim() const { return entries_.rows(); }
    cplx operator()(Eigen::Index m, Eigen::Index n) const { return entries_(m, n); }
    cplx at(const qkit::PauliLabel& label) const;
    const Eigen::MatrixXcd& entries() const { return entries_; }

    /// |a_{m,n}|^2
    Eigen::MatrixXd weights() const { return entries_.cwiseAbs2(); }
    double squared_norm() const { return entries_.squaredNorm(); }

  private:
    Eigen::MatrixXcd entries_;
    int qubits_ = 0;
};

/// Sylvester-Hadamard sign matrix W_{j,k} = (-1)^{j.k} of size 2^N.
Eigen::MatrixXd sign_kernel(int qubits);

/// b_{m,n} = 2^{-N} sum_{x,y} (-1)^{n.x - m.y} a_{x,y}; an involution.
AmplitudeMatrix fourier_dual(const AmplitudeMatrix& a);

/// Amplitudes of the requested clone's channel: a for E, fourier_dual(a) for B.
AmplitudeMatrix clone_amplitudes(const AmplitudeMatrix& a, Clone which);

/// N-fold tensor power of a normalized 2x2 amplitude matrix.
AmplitudeMatrix tensor_power(const Eigen::Matrix2cd& base, int qubits);

/// Joint state on E (x) B (x) C built from the E-form expansion.
PureState joint_output_state(const AmplitudeMatrix& a, const PureState& psi);

/// Same state built from the B-form expansion with amplitudes b, reordered
/// to E (x) B (x) C.
PureState joint_output_state_from_dual(const AmplitudeMatrix& b, const PureState& psi);

/// sum_{m,n} w_{m,n} U|psi><psi|U^dagger with w = |a|^2 (E) or |b|^2 (B).
DensityMatrix clone_density(const AmplitudeMatrix& a, const PureState& psi, Clone which);

/// sum_{m,n} w_{m,n} |<psi|U_{m,n}|psi>|^2
double fidelity_full(const AmplitudeMatrix& a, const PureState& psi, Clone which);

/// True when X^m Z^n leaves eigenstates of `basis` invariant up to phase.
constexpr bool basis_delta(Basis basis, int m, int n) {
    switch (basis) {
    case Basis::Z:
        return m == 0;
    case Basis::X:
        return n == 0;
    case Basis::Y:
        return m == n;
    }
    return false;
}

/// Single-qubit fidelity of `qubit` for a product-state entry, computed from
/// the entry's state vector through its one-qubit marginal. Throws
/// std::invalid_argument for entangled entries.
double qubit_fidelity(const AmplitudeMatrix& a, const EnsembleEntry& entry, int qubit, Clone which);

/// sum_{m,n} w_{m,n} delta_basis(m_qubit, n_qubit) for a weight table.
double basis_qubit_fidelity(const Eigen::MatrixXd& weights, int qubits, int qubit, Basis basis);

/// How per-qubit disturbance is counted.
///  SparedQubit:    qubit i untouched while some other qubit is hit
///                  (satisfies F^i = F_full + D^i).
///  PrintedIndices: qubit i hit while every other qubit is untouched.
enum class DisturbanceConvention { SparedQubit, PrintedIndices };

struct FidelityReport {
    double full_fidelity = 0.0;
    std::vector<double> per_qubit_fidelity;
    std::vector<double> per_qubit_disturbance;
    double average_fidelity = 0.0;
};

FidelityReport fidelity_report(const AmplitudeMatrix& a, const EnsembleEntry& entry, Clone which,
                               DisturbanceConvention convention = DisturbanceConvention::SparedQubit);

struct EnsembleFidelityReport {
    std::vector<FidelityReport> entries;
    double average_fidelity = 0.0;
    // max - min single-qubit fidelity over every entry and qubit position
    double spread = 0.0;
    bool equal_fidelity = false;
};

inline constexpr double kDefaultEqualFidelityTol = 1e-9;

EnsembleFidelityReport fidelity_report(const AmplitudeMatrix& a, const InputEnsemble& ensemble, Clone which,
                                       double equal_fidelity_tol = kDefaultEqualFidelityTol,
                                       DisturbanceConvention convention = DisturbanceConvention::SparedQubit);

struct BB84Coefficients {
    double v;
    double x;
    double y;
};

struct SixStateCoefficients {
    double v;
    double x;
};

/// v = 1/2 + sqrt(F(1-F)), x = F - 1/2, y = 1/2 - sqrt(F(1-F)); F in [1/2, 1].
BB84Coefficients bb84_coefficients(double fb);

/// v = sqrt((3F-1)/2), x = sqrt((1-F)/2); F in [1/3, 1].
SixStateCoefficients sixstate_coefficients(double fb);

/// Eve's amplitudes [[v,x],[x,y]]^{(x)N} with Bob's single-qubit fidelity fb.
AmplitudeMatrix bb84_product_ansatz(double fb, int qubits);

/// Cloner whose Bob-side amplitudes are [[v,x],[x,x]]^{(x)N} built from
/// sixstate_coefficients(fb), so Bob's single-qubit fidelity is fb. Eve's
/// amplitudes are the Fourier dual.
AmplitudeMatrix sixstate_product_ansatz(double fb, int qubits);

AmplitudeMatrix product_ansatz(Protocol protocol, double fb, int qubits);

/// Single-qubit fidelity averaged over qubit positions and the protocol's
/// bases. Works for any N up to kMaxTensorQubits without enumerating states.
double mean_qubit_fidelity(const AmplitudeMatrix& a, Protocol protocol, Clone which);

} // namespace seqclone::cloner
