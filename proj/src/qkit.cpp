#include "seqclone/qkit.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace seqclone::qkit {

namespace {

constexpr double kStateNormTol = 1e-12;
constexpr double kHermitianTol = 1e-12;
constexpr double kTraceTol = 1e-12;
constexpr double kEigenTol = 1e-10;

int log2_dim(Eigen::Index dim, const char* what) {
    if (dim < 1 || !std::has_single_bit(static_cast<std::uint64_t>(dim))) {
        throw std::invalid_argument(std::string(what) + ": dimension " + std::to_string(dim) +
                                    " is not a power of two");
    }
    return std::countr_zero(static_cast<std::uint64_t>(dim));
}

// Bit of `index` addressing qubit q of an n-qubit register (big-endian).
inline int qubit_bit(std::uint64_t index, int q, int n) {
    return static_cast<int>((index >> (n - 1 - q)) & 1U);
}

} // namespace

// --- BitVector ---------------------------------------------------------------

BitVector::BitVector(int length, std::uint32_t index) : index_(index), length_(length) {
    if (length < 0 || length > kMaxPatternQubits) {
        throw std::invalid_argument("BitVector: length out of range");
    }
    if (length < 32 && (index >> length) != 0) {
        throw std::invalid_argument("BitVector: index has bits beyond the vector length");
    }
}

BitVector BitVector::from_bits(std::span<const int> bits) {
    std::uint32_t index = 0;
    for (int b : bits) {
        if (b != 0 && b != 1) {
            throw std::invalid_argument("BitVector: components must be 0 or 1");
        }
        index = (index << 1) | static_cast<std::uint32_t>(b);
    }
    return BitVector(static_cast<int>(bits.size()), index);
}

int BitVector::bit(int qubit) const {
    if (qubit < 0 || qubit >= length_) {
        throw std::out_of_range("BitVector: qubit index out of range");
    }
    return qubit_bit(index_, qubit, length_);
}

int BitVector::weight() const { return std::popcount(index_); }

BitVector BitVector::operator^(const BitVector& other) const {
    if (other.length_ != length_) {
        throw std::invalid_argument("BitVector: length mismatch in xor");
    }
    return BitVector(length_, index_ ^ other.index_);
}

int dot(const BitVector& a, const BitVector& b) {
    if (a.length() != b.length()) {
        throw std::invalid_argument("BitVector: length mismatch in dot");
    }
    return std::popcount(a.index() & b.index()) & 1;
}

PauliLabel::PauliLabel(BitVector bit_flips, BitVector phase_flips)
    : m(bit_flips), n(phase_flips) {
    if (m.length() != n.length()) {
        throw std::invalid_argument("PauliLabel: m and n lengths differ");
    }
}

PauliLabel PauliLabel::identity(int qubits) {
    return PauliLabel(BitVector::zeros(qubits), BitVector::zeros(qubits));
}

// --- PureState ---------------------------------------------------------------

PureState::PureState(Eigen::VectorXcd amplitudes) : amplitudes_(std::move(amplitudes)) {
    qubits_ = log2_dim(amplitudes_.size(), "PureState");
    if (qubits_ > kMaxStateQubits) {
        throw std::invalid_argument("PureState: too many qubits");
    }
    if (std::abs(amplitudes_.squaredNorm() - 1.0) > kStateNormTol) {
        throw std::invalid_argument("PureState: squared norm differs from 1");
    }
}

PureState PureState::basis(int qubits, std::uint32_t index) {
    if (qubits < 0 || qubits > kMaxStateQubits || index >= (1ULL << qubits)) {
        throw std::invalid_argument("PureState::basis: index out of range");
    }
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(Eigen::Index{1} << qubits);
    v[index] = 1.0;
    return PureState(std::move(v));
}

PureState tensor(const PureState& left, const PureState& right) {
    const Eigen::Index dl = left.dim();
    const Eigen::Index dr = right.dim();
    Eigen::VectorXcd v(dl * dr);
    for (Eigen::Index i = 0; i < dl; ++i) {
        v.segment(i * dr, dr) = left[i] * right.amplitudes();
    }
    return PureState(std::move(v));
}

double overlap_magnitude(const PureState& a, const PureState& b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("overlap: dimension mismatch");
    }
    return std::abs(a.amplitudes().dot(b.amplitudes()));
}

bool equal_up_to_phase(const PureState& a, const PureState& b, double tol) {
    return a.dim() == b.dim() && std::abs(overlap_magnitude(a, b) - 1.0) <= tol;
}

// --- DensityMatrix -------------------------------------------------------------

DensityMatrix::DensityMatrix(Eigen::MatrixXcd entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols()) {
        throw std::invalid_argument("DensityMatrix: matrix is not square");
    }
    qubits_ = log2_dim(entries_.rows(), "DensityMatrix");
    if ((entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() > kHermitianTol) {
        throw std::invalid_argument("DensityMatrix: not Hermitian");
    }
    if (std::abs(entries_.trace() - cplx(1.0)) > kTraceTol) {
        throw std::invalid_argument("DensityMatrix: trace differs from 1");
    }
    if (min_eigenvalue() < -kEigenTol) {
        throw std::invalid_argument("DensityMatrix: negative eigenvalue");
    }
}

DensityMatrix DensityMatrix::pure(const PureState& psi) {
    return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(int qubits) {
    const Eigen::Index d = Eigen::Index{1} << qubits;
    return DensityMatrix(Eigen::MatrixXcd::Identity(d, d) / static_cast<double>(d));
}

double DensityMatrix::expectation(const PureState& psi) const {
    if (psi.dim() != dim()) {
        throw std::invalid_argument("DensityMatrix::expectation: dimension mismatch");
    }
    return psi.amplitudes().dot(entries_ * psi.amplitudes()).real();
}

double DensityMatrix::purity() const { return (entries_ * entries_).trace().real(); }

double DensityMatrix::min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(entries_, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

// --- Pauli operators and Bell states --------------------------------------------

PureState apply_pauli(const PauliLabel& label, const PureState& state) {
    if (label.qubits() != state.qubits()) {
        throw std::invalid_argument("apply_pauli: label length does not match state qubit count");
    }
    // X^m Z^n |k> = (-1)^{n.k} |k xor m>
    const std::uint32_t m = label.m.index();
    const std::uint32_t n = label.n.index();
    Eigen::VectorXcd out(state.dim());
    for (Eigen::Index k = 0; k < state.dim(); ++k) {
        const auto kk = static_cast<std::uint32_t>(k);
        const double sign = (std::popcount(kk & n) & 1) ? -1.0 : 1.0;
        out[kk ^ m] = sign * state[k];
    }
    return PureState(std::move(out));
}

Eigen::MatrixXcd pauli_matrix(const PauliLabel& label) {
    const Eigen::Index d = Eigen::Index{1} << label.qubits();
    const std::uint32_t m = label.m.index();
    const std::uint32_t n = label.n.index();
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(d, d);
    for (Eigen::Index k = 0; k < d; ++k) {
        const auto kk = static_cast<std::uint32_t>(k);
        u(kk ^ m, k) = (std::popcount(kk & n) & 1) ? -1.0 : 1.0;
    }
    return u;
}

PureState bell_state(const PauliLabel& label) {
    const int n = label.qubits();
    const Eigen::Index d = Eigen::Index{1} << n;
    const std::uint32_t m = label.m.index();
    const std::uint32_t ph = label.n.index();
    const double norm = 1.0 / std::sqrt(static_cast<double>(d));
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(d * d);
    for (Eigen::Index k = 0; k < d; ++k) {
        const auto kk = static_cast<std::uint32_t>(k);
        const double sign = (std::popcount(kk & ph) & 1) ? -1.0 : 1.0;
        v[k * d + (kk ^ m)] = sign * norm;
    }
    return PureState(std::move(v));
}

std::array<PureState, 2> mub_eigenstates(Basis basis) {
    const double h = 1.0 / std::sqrt(2.0);
    const cplx i(0.0, 1.0);
    switch (basis) {
    case Basis::Z:
        return {PureState(Eigen::Vector2cd(1.0, 0.0)), PureState(Eigen::Vector2cd(0.0, 1.0))};
    case Basis::X:
        return {PureState(Eigen::Vector2cd(h, h)), PureState(Eigen::Vector2cd(h, -h))};
    case Basis::Y:
        return {PureState(Eigen::Vector2cd(h, h * i)), PureState(Eigen::Vector2cd(h, -h * i))};
    }
    throw std::invalid_argument("mub_eigenstates: unknown basis");
}

PureState product_state(std::span<const Basis> bases, const BitVector& values) {
    if (bases.empty() || static_cast<int>(bases.size()) != values.length()) {
        throw std::invalid_argument("product_state: basis list and value vector lengths differ");
    }
    PureState out = mub_eigenstates(bases[0])[values.bit(0)];
    for (std::size_t q = 1; q < bases.size(); ++q) {
        out = tensor(out, mub_eigenstates(bases[q])[values.bit(static_cast<int>(q))]);
    }
    return out;
}

std::vector<std::vector<Basis>> basis_assignments(Protocol protocol, int qubits, BasisMode mode) {
    if (qubits < 1 || qubits > kMaxPatternQubits) {
        throw std::invalid_argument("basis_assignments: sequence length out of range");
    }
    const auto bases = protocol_bases(protocol);
    const std::size_t nb = bases.size();
    std::vector<std::vector<Basis>> out;
    if (mode == BasisMode::Correlated) {
        for (Basis b : bases) {
            out.emplace_back(static_cast<std::size_t>(qubits), b);
        }
        return out;
    }
    std::size_t total = 1;
    for (int q = 0; q < qubits; ++q) {
        total *= nb;
    }
    out.reserve(total);
    for (std::size_t c = 0; c < total; ++c) {
        std::vector<Basis> a(static_cast<std::size_t>(qubits));
        std::size_t rest = c;
        for (int q = qubits - 1; q >= 0; --q) {
            a[static_cast<std::size_t>(q)] = bases[rest % nb];
            rest /= nb;
        }
        out.push_back(std::move(a));
    }
    return out;
}

InputEnsemble enumerate_ensemble(Protocol protocol, int qubits, BasisMode mode) {
    const auto assignments = basis_assignments(protocol, qubits, mode);
    const std::uint32_t values_count = 1U << qubits;
    InputEnsemble ensemble{protocol, qubits, mode, {}};
    ensemble.entries.reserve(assignments.size() * values_count);
    for (const auto& a : assignments) {
        for (std::uint32_t v = 0; v < values_count; ++v) {
            BitVector values(qubits, v);
            ensemble.entries.push_back({product_state(a, values), a, values});
        }
    }
    return ensemble;
}

// --- Partial traces ----------------------------------------------------------------

namespace {

struct SplitIndex {
    std::vector<int> keep;
    std::vector<int> rest;
    int n;

    std::uint64_t kept_part(std::uint64_t full) const {
        std::uint64_t r = 0;
        for (int q : keep) {
            r = (r << 1) | static_cast<std::uint64_t>(qubit_bit(full, q, n));
        }
        return r;
    }
    std::uint64_t rest_part(std::uint64_t full) const {
        std::uint64_t r = 0;
        for (int q : rest) {
            r = (r << 1) | static_cast<std::uint64_t>(qubit_bit(full, q, n));
        }
        return r;
    }
};

SplitIndex make_split(int n, std::span<const int> keep) {
    SplitIndex s{{keep.begin(), keep.end()}, {}, n};
    std::vector<bool> kept(static_cast<std::size_t>(n), false);
    for (int q : keep) {
        if (q < 0 || q >= n) {
            throw std::invalid_argument("partial_trace: qubit index out of range");
        }
        if (kept[static_cast<std::size_t>(q)]) {
            throw std::invalid_argument("partial_trace: qubit listed twice");
        }
        kept[static_cast<std::size_t>(q)] = true;
    }
    if (keep.empty()) {
        throw std::invalid_argument("partial_trace: nothing to keep");
    }
    for (int q = 0; q < n; ++q) {
        if (!kept[static_cast<std::size_t>(q)]) {
            s.rest.push_back(q);
        }
    }
    return s;
}

} // namespace

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> keep) {
    const int n = rho.qubits();
    const SplitIndex split = make_split(n, keep);
    const Eigen::Index dk = Eigen::Index{1} << split.keep.size();
    const Eigen::Index dim = rho.dim();
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dk, dk);
    const auto& m = rho.matrix();
    for (Eigen::Index i = 0; i < dim; ++i) {
        const auto ri = split.rest_part(static_cast<std::uint64_t>(i));
        const auto ki = split.kept_part(static_cast<std::uint64_t>(i));
        for (Eigen::Index j = 0; j < dim; ++j) {
            if (split.rest_part(static_cast<std::uint64_t>(j)) != ri) {
                continue;
            }
            out(static_cast<Eigen::Index>(ki),
                static_cast<Eigen::Index>(split.kept_part(static_cast<std::uint64_t>(j)))) += m(i, j);
        }
    }
    return DensityMatrix(std::move(out));
}

DensityMatrix partial_trace(const DensityMatrix& rho, int keep) {
    if (rho.qubits() < 2) {
        throw std::invalid_argument("partial_trace: need at least two qubits");
    }
    const std::array<int, 1> k{keep};
    return partial_trace(rho, k);
}

DensityMatrix reduced_density(const PureState& psi, std::span<const int> keep) {
    const SplitIndex split = make_split(psi.qubits(), keep);
    const Eigen::Index dk = Eigen::Index{1} << split.keep.size();
    const Eigen::Index dr = Eigen::Index{1} << split.rest.size();
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dk, dr);
    for (Eigen::Index i = 0; i < psi.dim(); ++i) {
        const auto u = static_cast<std::uint64_t>(i);
        m(static_cast<Eigen::Index>(split.kept_part(u)), static_cast<Eigen::Index>(split.rest_part(u))) =
            psi[i];
    }
    Eigen::MatrixXcd rho = m * m.adjoint();
    // Hermitize away rounding so validation sees an exactly Hermitian matrix.
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return DensityMatrix(std::move(rho));
}

} // namespace seqclone::qkit
