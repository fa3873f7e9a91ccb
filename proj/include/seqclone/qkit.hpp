// Multi-qubit state-space core: bit-vector index algebra, Pauli error
// operators, generalized Bell states, mutually unbiased bases and the
// product-state ensembles an eavesdropper has to clone.
//
// Ordering convention used throughout the library: qubit 0 is the leftmost
// tensor factor, and the integer index of |k_0 k_1 ... k_{N-1}> is big-endian
// (qubit 0 is the most significant bit).

#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "seqclone/types.hpp"

namespace seqclone::qkit {

using cplx = std::complex<double>;

inline constexpr int kMaxPatternQubits = 15;
inline constexpr int kMaxStateQubits = 24;

/// N-component vector over {0,1}, stored as its big-endian integer index.
class BitVector {
  public:
    BitVector() = default;
    BitVector(int length, std::uint32_t index);

    static BitVector zeros(int length) { return BitVector(length, 0); }
    static BitVector from_bits(std::span<const int> bits);

    int length() const { return length_; }
    std::uint32_t index() const { return index_; }
    int bit(int qubit) const;
    int weight() const;

    BitVector operator^(const BitVector& other) const;
    bool operator==(const BitVector&) const = default;

  private:
    std::uint32_t index_ = 0;
    int length_ = 0;
};

/// Bitwise scalar product k.n modulo 2.
int dot(const BitVector& a, const BitVector& b);

/// Label (m, n) of U = (x)_i X^{m_i} Z^{n_i}.
struct PauliLabel {
    BitVector m;
    BitVector n;

    PauliLabel(BitVector bit_flips, BitVector phase_flips);
    static PauliLabel identity(int qubits);

    int qubits() const { return m.length(); }
    bool is_identity() const { return m.index() == 0 && n.index() == 0; }
};

class PureState {
  public:
    /// Throws std::invalid_argument unless the dimension is a power of two and
    /// the squared norm is 1 within 1e-12.
    explicit PureState(Eigen::VectorXcd amplitudes);

    static PureState basis(int qubits, std::uint32_t index);

    int qubits() const { return qubits_; }
    Eigen::Index dim() const { return amplitudes_.size(); }
    const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
    cplx operator[](Eigen::Index i) const { return amplitudes_[i]; }

  private:
    Eigen::VectorXcd amplitudes_;
    int qubits_ = 0;
};

PureState tensor(const PureState& left, const PureState& right);

/// |<a|b>|; states are only ever compared up to a global phase.
double overlap_magnitude(const PureState& a, const PureState& b);
bool equal_up_to_phase(const PureState& a, const PureState& b, double tol = 1e-12);

class DensityMatrix {
  public:
    /// Validates Hermiticity (1e-12), unit trace (1e-12) and eigenvalues >= -1e-10.
    explicit DensityMatrix(Eigen::MatrixXcd entries);

    static DensityMatrix pure(const PureState& psi);
    static DensityMatrix maximally_mixed(int qubits);

    int qubits() const { return qubits_; }
    Eigen::Index dim() const { return entries_.rows(); }
    const Eigen::MatrixXcd& matrix() const { return entries_; }

    /// <psi|rho|psi>
    double expectation(const PureState& psi) const;
    double purity() const;
    double min_eigenvalue() const;

  private:
    Eigen::MatrixXcd entries_;
    int qubits_ = 0;
};

/// U_{m,n}|psi>, with X^1 Z^1 = -i sigma_y per qubit.
PureState apply_pauli(const PauliLabel& label, const PureState& state);

/// Dense 2^N x 2^N matrix of U_{m,n}.
Eigen::MatrixXcd pauli_matrix(const PauliLabel& label);

/// 2^{-N/2} sum_k (-1)^{k.n} |k>|k xor m> on a pair of 2^N-dimensional systems.
PureState bell_state(const PauliLabel& label);

/// Both eigenstates of the basis; index 0 is the +1 eigenstate.
std::array<PureState, 2> mub_eigenstates(Basis basis);

/// Tensor product of single-qubit eigenstates, values.bit(i) selecting the
/// eigenstate of bases[i].
PureState product_state(std::span<const Basis> bases, const BitVector& values);

struct EnsembleEntry {
    PureState state;
    std::vector<Basis> bases;
    BitVector values;
};

struct InputEnsemble {
    Protocol protocol;
    int qubits;
    BasisMode mode;
    std::vector<EnsembleEntry> entries;

    std::size_t size() const { return entries.size(); }
};

/// Per-qubit basis choices Alice can make for one sequence: every element of
/// bases^N (Independent) or the constant assignments (Correlated).
std::vector<std::vector<Basis>> basis_assignments(Protocol protocol, int qubits, BasisMode mode);

/// All product states Eve can encounter for a sequence of `qubits` qubits.
/// Independent: (2 * #bases)^N states. Correlated: #bases * 2^N states.
InputEnsemble enumerate_ensemble(Protocol protocol, int qubits, BasisMode mode);

/// Reduced state of the listed qubits (in the listed order).
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep);
DensityMatrix partial_trace(const DensityMatrix& rho, int keep);
DensityMatrix reduced_density(const PureState& psi, std::span<const int> keep);

} // namespace seqclone::qkit
