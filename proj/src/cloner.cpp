#include "seqclone/cloner.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace seqclone::cloner {

namespace {

constexpr double kAmplitudeNormTol = 1e-10;
constexpr double kProductPurityTol = 1e-10;

inline int pattern_bit(Eigen::Index index, int q, int n) {
    return static_cast<int>((static_cast<std::uint64_t>(index) >> (n - 1 - q)) & 1U);
}

void require_same_dim(const AmplitudeMatrix& a, const PureState& psi, const char* what) {
    if (a.qubits() != psi.qubits()) {
        throw std::invalid_argument(std::string(what) + ": cloner and state qubit counts differ");
    }
}

qkit::PauliLabel label_of(int qubits, Eigen::Index m, Eigen::Index n) {
    return {qkit::BitVector(qubits, static_cast<std::uint32_t>(m)),
            qkit::BitVector(qubits, static_cast<std::uint32_t>(n))};
}

Eigen::Matrix2cd single_qubit_pauli(int m, int n) {
    Eigen::Matrix2cd x;
    x << 0, 1, 1, 0;
    Eigen::Matrix2cd z;
    z << 1, 0, 0, -1;
    Eigen::Matrix2cd u = Eigen::Matrix2cd::Identity();
    if (m != 0) {
        u = x;
    }
    if (n != 0) {
        u = u * z;
    }
    return u;
}

} // namespace

AmplitudeMatrix::AmplitudeMatrix(int qubits, Eigen::MatrixXcd entries)
    : entries_(std::move(entries)), qubits_(qubits) {
    if (qubits < 1 || qubits > kMaxTensorQubits) {
        throw std::invalid_argument("AmplitudeMatrix: qubit count out of range");
    }
    const Eigen::Index d = Eigen::Index{1} << qubits;
    if (entries_.rows() != d || entries_.cols() != d) {
        throw std::invalid_argument("AmplitudeMatrix: expected a 2^N x 2^N table");
    }
    if (std::abs(entries_.squaredNorm() - 1.0) > kAmplitudeNormTol) {
        throw std::invalid_argument("AmplitudeMatrix: sum of |a|^2 differs from 1");
    }
}

AmplitudeMatrix AmplitudeMatrix::identity(int qubits) {
    const Eigen::Index d = Eigen::Index{1} << qubits;
    Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(d, d);
    e(0, 0) = 1.0;
    return AmplitudeMatrix(qubits, std::move(e));
}

AmplitudeMatrix AmplitudeMatrix::from_flat(int qubits, const Eigen::VectorXd& flat) {
    const Eigen::Index d = Eigen::Index{1} << qubits;
    if (flat.size() != d * d) {
        throw std::invalid_argument("AmplitudeMatrix::from_flat: expected 4^N values");
    }
    Eigen::MatrixXcd e(d, d);
    for (Eigen::Index m = 0; m < d; ++m) {
        for (Eigen::Index n = 0; n < d; ++n) {
            e(m, n) = flat[m * d + n];
        }
    }
    return AmplitudeMatrix(qubits, std::move(e));
}

cplx AmplitudeMatrix::at(const qkit::PauliLabel& label) const {
    if (label.qubits() != qubits_) {
        throw std::invalid_argument("AmplitudeMatrix::at: label length mismatch");
    }
    return entries_(label.m.index(), label.n.index());
}

Eigen::MatrixXd sign_kernel(int qubits) {
    const Eigen::Index d = Eigen::Index{1} << qubits;
    Eigen::MatrixXd w(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index k = 0; k < d; ++k) {
            w(j, k) = (std::popcount(static_cast<std::uint64_t>(j & k)) & 1) ? -1.0 : 1.0;
        }
    }
    return w;
}

AmplitudeMatrix fourier_dual(const AmplitudeMatrix& a) {
    // b_{m,n} = 2^{-N} sum_{x,y} W_{n,x} a_{x,y} W_{y,m}, i.e. b = W a^T W / 2^N.
    const Eigen::MatrixXd w = sign_kernel(a.qubits());
    const double scale = 1.0 / static_cast<double>(a.dim());
    Eigen::MatrixXcd b = scale * (w.cast<cplx>() * a.entries().transpose() * w.cast<cplx>());
    return AmplitudeMatrix(a.qubits(), std::move(b));
}

AmplitudeMatrix clone_amplitudes(const AmplitudeMatrix& a, Clone which) {
    return which == Clone::E ? a : fourier_dual(a);
}

AmplitudeMatrix tensor_power(const Eigen::Matrix2cd& base, int qubits) {
    if (qubits < 1 || qubits > kMaxTensorQubits) {
        throw std::invalid_argument("tensor_power: qubit count out of range");
    }
    Eigen::MatrixXcd out = base;
    for (int q = 1; q < qubits; ++q) {
        const Eigen::Index d = out.rows();
        Eigen::MatrixXcd next(2 * d, 2 * d);
        for (Eigen::Index i = 0; i < d; ++i) {
            for (Eigen::Index j = 0; j < d; ++j) {
                next.block<2, 2>(2 * i, 2 * j) = out(i, j) * base;
            }
        }
        out = std::move(next);
    }
    return AmplitudeMatrix(qubits, std::move(out));
}

PureState joint_output_state(const AmplitudeMatrix& a, const PureState& psi) {
    require_same_dim(a, psi, "joint_output_state");
    const int n = a.qubits();
    const Eigen::Index d = a.dim();
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(d * d * d);
    for (Eigen::Index m = 0; m < d; ++m) {
        for (Eigen::Index ph = 0; ph < d; ++ph) {
            const cplx amp = a(m, ph);
            if (amp == cplx(0.0)) {
                continue;
            }
            const auto label = label_of(n, m, ph);
            const PureState shifted = qkit::apply_pauli(label, psi);
            const PureState bell = qkit::bell_state(label);
            for (Eigen::Index e = 0; e < d; ++e) {
                out.segment(e * d * d, d * d) += amp * shifted[e] * bell.amplitudes();
            }
        }
    }
    return PureState(std::move(out));
}

PureState joint_output_state_from_dual(const AmplitudeMatrix& b, const PureState& psi) {
    require_same_dim(b, psi, "joint_output_state_from_dual");
    const int n = b.qubits();
    const Eigen::Index d = b.dim();
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(d * d * d);
    for (Eigen::Index m = 0; m < d; ++m) {
        for (Eigen::Index ph = 0; ph < d; ++ph) {
            const cplx amp = b(m, ph);
            if (amp == cplx(0.0)) {
                continue;
            }
            const auto label = label_of(n, m, ph);
            const PureState shifted = qkit::apply_pauli(label, psi);
            const PureState bell = qkit::bell_state(label); // on (E, C)
            // term index order is (B, E, C); store as (E, B, C)
            for (Eigen::Index bq = 0; bq < d; ++bq) {
                for (Eigen::Index e = 0; e < d; ++e) {
                    for (Eigen::Index c = 0; c < d; ++c) {
                        out[(e * d + bq) * d + c] += amp * shifted[bq] * bell[e * d + c];
                    }
                }
            }
        }
    }
    return PureState(std::move(out));
}

DensityMatrix clone_density(const AmplitudeMatrix& a, const PureState& psi, Clone which) {
    require_same_dim(a, psi, "clone_density");
    const AmplitudeMatrix amps = clone_amplitudes(a, which);
    const Eigen::MatrixXd w = amps.weights();
    const Eigen::Index d = a.dim();
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d, d);
    for (Eigen::Index m = 0; m < d; ++m) {
        for (Eigen::Index ph = 0; ph < d; ++ph) {
            if (w(m, ph) == 0.0) {
                continue;
            }
            const PureState shifted = qkit::apply_pauli(label_of(a.qubits(), m, ph), psi);
            rho += w(m, ph) * shifted.amplitudes() * shifted.amplitudes().adjoint();
        }
    }
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return DensityMatrix(std::move(rho));
}

double fidelity_full(const AmplitudeMatrix& a, const PureState& psi, Clone which) {
    require_same_dim(a, psi, "fidelity_full");
    const Eigen::MatrixXd w = clone_amplitudes(a, which).weights();
    const Eigen::Index d = a.dim();
    double f = 0.0;
    for (Eigen::Index m = 0; m < d; ++m) {
        for (Eigen::Index ph = 0; ph < d; ++ph) {
            if (w(m, ph) == 0.0) {
                continue;
            }
            const PureState shifted = qkit::apply_pauli(label_of(a.qubits(), m, ph), psi);
            f += w(m, ph) * std::norm(psi.amplitudes().dot(shifted.amplitudes()));
        }
    }
    return f;
}

double qubit_fidelity(const AmplitudeMatrix& a, const EnsembleEntry& entry, int qubit, Clone which) {
    require_same_dim(a, entry.state, "qubit_fidelity");
    const int n = a.qubits();
    if (qubit < 0 || qubit >= n) {
        throw std::invalid_argument("qubit_fidelity: qubit index out of range");
    }
    const qkit::DensityMatrix marginal = [&] {
        const std::array<int, 1> keep{qubit};
        return qkit::reduced_density(entry.state, keep);
    }();
    for (int q = 0; q < n; ++q) {
        const std::array<int, 1> keep{q};
        if (qkit::reduced_density(entry.state, keep).purity() < 1.0 - kProductPurityTol) {
            throw std::invalid_argument("qubit_fidelity: entry is not a product state");
        }
    }

    // Marginal error weights on (m_i, n_i).
    const Eigen::MatrixXd w = clone_amplitudes(a, which).weights();
    std::array<double, 4> marginal_w{};
    for (Eigen::Index m = 0; m < a.dim(); ++m) {
        for (Eigen::Index ph = 0; ph < a.dim(); ++ph) {
            marginal_w[static_cast<std::size_t>(2 * pattern_bit(m, qubit, n) + pattern_bit(ph, qubit, n))] +=
                w(m, ph);
        }
    }
    const Eigen::Matrix2cd& rho = marginal.matrix();
    double f = 0.0;
    for (int mi = 0; mi < 2; ++mi) {
        for (int ni = 0; ni < 2; ++ni) {
            const Eigen::Matrix2cd p = single_qubit_pauli(mi, ni);
            // |<phi|P|phi>|^2 = Tr(rho P rho P^dagger) for pure rho
            const double overlap = (rho * p * rho * p.adjoint()).trace().real();
            f += marginal_w[static_cast<std::size_t>(2 * mi + ni)] * overlap;
        }
    }
    return f;
}

double basis_qubit_fidelity(const Eigen::MatrixXd& weights, int qubits, int qubit, Basis basis) {
    double f = 0.0;
    for (Eigen::Index m = 0; m < weights.rows(); ++m) {
        for (Eigen::Index ph = 0; ph < weights.cols(); ++ph) {
            if (basis_delta(basis, pattern_bit(m, qubit, qubits), pattern_bit(ph, qubit, qubits))) {
                f += weights(m, ph);
            }
        }
    }
    return f;
}

FidelityReport fidelity_report(const AmplitudeMatrix& a, const EnsembleEntry& entry, Clone which,
                               DisturbanceConvention convention) {
    const int n = a.qubits();
    if (static_cast<int>(entry.bases.size()) != n) {
        throw std::invalid_argument("fidelity_report: entry and cloner qubit counts differ");
    }
    const Eigen::MatrixXd w = clone_amplitudes(a, which).weights();
    FidelityReport r;
    r.per_qubit_fidelity.assign(static_cast<std::size_t>(n), 0.0);
    r.per_qubit_disturbance.assign(static_cast<std::size_t>(n), 0.0);
    std::vector<bool> pass(static_cast<std::size_t>(n));
    for (Eigen::Index m = 0; m < a.dim(); ++m) {
        for (Eigen::Index ph = 0; ph < a.dim(); ++ph) {
            const double weight = w(m, ph);
            int failures = 0;
            for (int q = 0; q < n; ++q) {
                const bool ok = basis_delta(entry.bases[static_cast<std::size_t>(q)], pattern_bit(m, q, n),
                                            pattern_bit(ph, q, n));
                pass[static_cast<std::size_t>(q)] = ok;
                failures += ok ? 0 : 1;
            }
            if (failures == 0) {
                r.full_fidelity += weight;
            }
            for (int q = 0; q < n; ++q) {
                const auto qi = static_cast<std::size_t>(q);
                if (pass[qi]) {
                    r.per_qubit_fidelity[qi] += weight;
                }
                const bool others_clean = failures == (pass[qi] ? 0 : 1);
                const bool counted = convention == DisturbanceConvention::SparedQubit
                                         ? (pass[qi] && !others_clean)
                                         : (!pass[qi] && others_clean);
                if (counted) {
                    r.per_qubit_disturbance[qi] += weight;
                }
            }
        }
    }
    double sum = 0.0;
    for (double f : r.per_qubit_fidelity) {
        sum += f;
    }
    r.average_fidelity = sum / n;
    return r;
}

EnsembleFidelityReport fidelity_report(const AmplitudeMatrix& a, const InputEnsemble& ensemble, Clone which,
                                       double equal_fidelity_tol, DisturbanceConvention convention) {
    if (ensemble.qubits != a.qubits()) {
        throw std::invalid_argument("fidelity_report: ensemble and cloner qubit counts differ");
    }
    EnsembleFidelityReport out;
    out.entries.reserve(ensemble.size());
    double lo = 1.0;
    double hi = 0.0;
    double total = 0.0;
    for (const auto& entry : ensemble.entries) {
        FidelityReport r = fidelity_report(a, entry, which, convention);
        for (double f : r.per_qubit_fidelity) {
            lo = std::min(lo, f);
            hi = std::max(hi, f);
        }
        total += r.average_fidelity;
        out.entries.push_back(std::move(r));
    }
    out.average_fidelity = ensemble.size() ? total / static_cast<double>(ensemble.size()) : 0.0;
    out.spread = ensemble.size() ? hi - lo : 0.0;
    out.equal_fidelity = out.spread <= equal_fidelity_tol;
    return out;
}

BB84Coefficients bb84_coefficients(double fb) {
    if (!(fb >= 0.5 && fb <= 1.0)) {
        throw std::domain_error("bb84_coefficients: F_B must lie in [1/2, 1]");
    }
    const double s = std::sqrt(fb * (1.0 - fb));
    return {0.5 + s, fb - 0.5, 0.5 - s};
}

SixStateCoefficients sixstate_coefficients(double fb) {
    if (!(fb >= 1.0 / 3.0 && fb <= 1.0)) {
        throw std::domain_error("sixstate_coefficients: F_B must lie in [1/3, 1]");
    }
    return {std::sqrt(std::max(0.0, (3.0 * fb - 1.0) / 2.0)), std::sqrt(std::max(0.0, (1.0 - fb) / 2.0))};
}

AmplitudeMatrix bb84_product_ansatz(double fb, int qubits) {
    const auto c = bb84_coefficients(fb);
    Eigen::Matrix2cd base;
    base << c.v, c.x, c.x, c.y;
    return tensor_power(base, qubits);
}

AmplitudeMatrix sixstate_product_ansatz(double fb, int qubits) {
    const auto c = sixstate_coefficients(fb);
    Eigen::Matrix2cd bob;
    bob << c.v, c.x, c.x, c.x;
    // The transform factorizes over qubits, so dualize the single-qubit factor.
    const AmplitudeMatrix eve1 = fourier_dual(AmplitudeMatrix(1, bob));
    return tensor_power(eve1.entries(), qubits);
}

AmplitudeMatrix product_ansatz(Protocol protocol, double fb, int qubits) {
    return protocol == Protocol::BB84 ? bb84_product_ansatz(fb, qubits) : sixstate_product_ansatz(fb, qubits);
}

double mean_qubit_fidelity(const AmplitudeMatrix& a, Protocol protocol, Clone which) {
    const Eigen::MatrixXd w = clone_amplitudes(a, which).weights();
    const auto bases = protocol_bases(protocol);
    double total = 0.0;
    for (int q = 0; q < a.qubits(); ++q) {
        for (Basis b : bases) {
            total += basis_qubit_fidelity(w, a.qubits(), q, b);
        }
    }
    return total / static_cast<double>(a.qubits() * static_cast<int>(bases.size()));
}

} // namespace seqclone::cloner
