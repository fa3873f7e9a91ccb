#include <gtest/gtest.h>

#include <random>

#include "seqclone/cloner.hpp"
#include "seqclone/curves.hpp"
#include "support.hpp"

using namespace seqclone;
using namespace seqclone::cloner;
using qkit::BitVector;
using qkit::PureState;

namespace {

// delta for every qubit of pattern (m, n) against the entry's bases
std::vector<bool> preserved(const std::vector<Basis>& bases, std::uint32_t m, std::uint32_t n) {
    const int qubits = static_cast<int>(bases.size());
    std::vector<bool> out;
    for (int q = 0; q < qubits; ++q) {
        const int shift = qubits - 1 - q;
        out.push_back(basis_delta(bases[static_cast<std::size_t>(q)], (m >> shift) & 1, (n >> shift) & 1));
    }
    return out;
}

struct PatternSums {
    double full = 0.0;
    std::vector<double> spared;
    std::vector<double> printed;
    std::vector<double> qubit;
};

PatternSums pattern_sums(const Eigen::MatrixXd& w, const std::vector<Basis>& bases) {
    const std::size_t qubits = bases.size();
    PatternSums s{0.0, std::vector<double>(qubits), std::vector<double>(qubits), std::vector<double>(qubits)};
    for (std::uint32_t m = 0; m < w.rows(); ++m) {
        for (std::uint32_t n = 0; n < w.cols(); ++n) {
            const auto keep = preserved(bases, m, n);
            const auto kept = static_cast<std::size_t>(std::count(keep.begin(), keep.end(), true));
            if (kept == qubits) {
                s.full += w(m, n);
            }
            for (std::size_t i = 0; i < qubits; ++i) {
                if (keep[i]) {
                    s.qubit[i] += w(m, n);
                    if (kept < qubits) {
                        s.spared[i] += w(m, n);
                    }
                } else if (kept == qubits - 1) {
                    s.printed[i] += w(m, n);
                }
            }
        }
    }
    return s;
}

} // namespace

TEST(FourierDual, MatchesDirectSum) {
    std::mt19937_64 rng(1);
    for (int qubits = 1; qubits <= 3; ++qubits) {
        for (int trial = 0; trial < 20; ++trial) {
            const auto a = testing_support::random_cloner(rng, qubits);
            const Eigen::MatrixXcd expected = testing_support::direct_dual(a.entries());
            EXPECT_LT((fourier_dual(a).entries() - expected).norm(), 1e-12);
        }
    }
}

TEST(FourierDual, IsAnInvolution) {
    std::mt19937_64 rng(2);
    for (int qubits = 1; qubits <= 4; ++qubits) {
        for (int trial = 0; trial < 100; ++trial) {
            const auto a = testing_support::random_cloner(rng, qubits);
            const auto back = fourier_dual(fourier_dual(a));
            EXPECT_LT((back.entries() - a.entries()).cwiseAbs().maxCoeff(), 1e-12);
        }
    }
}

TEST(FourierDual, PreservesNorm) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const auto a = testing_support::random_cloner(rng, 2);
        EXPECT_NEAR(fourier_dual(a).squared_norm(), 1.0, 1e-13);
    }
}

TEST(FourierDual, IdentityCloner) {
    // a = delta_{00}: Eve keeps the input, Bob gets the uniform channel
    const auto b = fourier_dual(AmplitudeMatrix::identity(2));
    EXPECT_LT((b.weights().array() - 1.0 / 16.0).abs().maxCoeff(), 1e-15);
}

TEST(SignKernel, Entries) {
    const Eigen::MatrixXd w = sign_kernel(3);
    for (std::uint32_t j = 0; j < 8; ++j) {
        for (std::uint32_t k = 0; k < 8; ++k) {
            EXPECT_EQ(w(j, k), testing_support::parity(j & k) ? -1.0 : 1.0);
        }
    }
}

TEST(JointState, EAndBExpansionsAgree) {
    std::mt19937_64 rng(4);
    for (int qubits = 1; qubits <= 2; ++qubits) {
        for (int trial = 0; trial < 100; ++trial) {
            const auto a = testing_support::random_cloner(rng, qubits);
            const PureState psi(testing_support::random_state(rng, qubits));
            const auto from_e = joint_output_state(a, psi);
            const auto from_b = joint_output_state_from_dual(fourier_dual(a), psi);
            EXPECT_LT((from_e.amplitudes() - from_b.amplitudes()).norm(), 1e-10);
        }
    }
}

TEST(JointState, CloneMarginalsMatchPauliChannels) {
    // tracing the joint state down to clone E (B) gives the |a|^2 (|b|^2) channel
    std::mt19937_64 rng(6);
    const int qubits = 1;
    const auto a = testing_support::random_cloner(rng, qubits);
    const PureState psi(testing_support::random_state(rng, qubits));
    const auto joint = joint_output_state(a, psi);
    const int keep_e[] = {0};
    const int keep_b[] = {1};
    EXPECT_LT((qkit::reduced_density(joint, keep_e).matrix() - clone_density(a, psi, Clone::E).matrix()).norm(),
              1e-12);
    EXPECT_LT((qkit::reduced_density(joint, keep_b).matrix() - clone_density(a, psi, Clone::B).matrix()).norm(),
              1e-12);
}

TEST(Fidelity, QubitMarginalMatchesPatternSum) {
    std::mt19937_64 rng(7);
    for (Protocol p : {Protocol::BB84, Protocol::SixState}) {
        const auto ens = qkit::enumerate_ensemble(p, 3, BasisMode::Independent);
        const auto a = testing_support::random_cloner(rng, 3);
        for (Clone which : {Clone::E, Clone::B}) {
            const Eigen::MatrixXd w = clone_amplitudes(a, which).weights();
            for (std::size_t e = 0; e < ens.size(); e += 7) {
                const auto& entry = ens.entries[e];
                const auto sums = pattern_sums(w, entry.bases);
                for (int q = 0; q < 3; ++q) {
                    const double from_state = qubit_fidelity(a, entry, q, which);
                    EXPECT_NEAR(from_state, sums.qubit[static_cast<std::size_t>(q)], 1e-12);
                    EXPECT_NEAR(basis_qubit_fidelity(w, 3, q, entry.bases[static_cast<std::size_t>(q)]),
                                sums.qubit[static_cast<std::size_t>(q)], 1e-12);
                }
                EXPECT_NEAR(fidelity_full(a, entry.state, which), sums.full, 1e-12);
            }
        }
    }
}

TEST(Fidelity, DisturbanceIdentityOnAllEnsembles) {
    std::mt19937_64 rng(8);
    for (Protocol p : {Protocol::BB84, Protocol::SixState}) {
        for (BasisMode mode : {BasisMode::Independent, BasisMode::Correlated}) {
            for (int qubits = 1; qubits <= 3; ++qubits) {
                const auto ens = qkit::enumerate_ensemble(p, qubits, mode);
                const auto a = testing_support::random_cloner(rng, qubits);
                for (Clone which : {Clone::E, Clone::B}) {
                    const auto report = fidelity_report(a, ens, which);
                    for (std::size_t e = 0; e < ens.size(); ++e) {
                        const auto& r = report.entries[e];
                        const auto sums = pattern_sums(clone_amplitudes(a, which).weights(), ens.entries[e].bases);
                        EXPECT_NEAR(r.full_fidelity, sums.full, 1e-12);
                        for (std::size_t q = 0; q < r.per_qubit_fidelity.size(); ++q) {
                            EXPECT_NEAR(r.per_qubit_fidelity[q], r.full_fidelity + r.per_qubit_disturbance[q], 1e-12);
                            EXPECT_NEAR(r.per_qubit_disturbance[q], sums.spared[q], 1e-12);
                        }
                    }
                }
            }
        }
    }
}

TEST(Fidelity, PrintedIndexDisturbance) {
    std::mt19937_64 rng(9);
    const auto ens = qkit::enumerate_ensemble(Protocol::BB84, 3, BasisMode::Independent);
    const auto a = testing_support::random_cloner(rng, 3);
    for (std::size_t e = 0; e < ens.size(); e += 5) {
        const auto r = fidelity_report(a, ens.entries[e], Clone::E, DisturbanceConvention::PrintedIndices);
        const auto sums = pattern_sums(a.weights(), ens.entries[e].bases);
        for (std::size_t q = 0; q < 3; ++q) {
            EXPECT_NEAR(r.per_qubit_disturbance[q], sums.printed[q], 1e-12);
        }
    }
}

TEST(Fidelity, IdentityClonerIsPerfectForEve) {
    const auto ens = qkit::enumerate_ensemble(Protocol::SixState, 2, BasisMode::Independent);
    const auto a = AmplitudeMatrix::identity(2);
    EXPECT_NEAR(fidelity_report(a, ens, Clone::E).average_fidelity, 1.0, 1e-15);
    EXPECT_NEAR(fidelity_report(a, ens, Clone::B).average_fidelity, 0.5, 1e-15);
}

TEST(Coefficients, NormalizedOnTheDomain) {
    for (int i = 0; i <= 100; ++i) {
        const double fb = 0.5 + 0.005 * i;
        const auto c = bb84_coefficients(fb);
        EXPECT_NEAR(c.v * c.v + 2 * c.x * c.x + c.y * c.y, 1.0, 1e-14) << fb;
        const double f6 = 1.0 / 3.0 + (2.0 / 3.0) * i / 100.0;
        const auto s = sixstate_coefficients(f6);
        EXPECT_NEAR(s.v * s.v + 3 * s.x * s.x, 1.0, 1e-14) << f6;
    }
    EXPECT_THROW(bb84_coefficients(0.4), std::domain_error);
    EXPECT_THROW(sixstate_coefficients(0.3), std::domain_error);
}

TEST(ProductAnsatz, FidelitiesMatchClosedForm) {
    for (Protocol p : {Protocol::BB84, Protocol::SixState}) {
        for (int qubits = 1; qubits <= 3; ++qubits) {
            for (double fb : {0.6, 0.75, 0.8536, 0.95}) {
                const auto a = product_ansatz(p, fb, qubits);
                for (BasisMode mode : {BasisMode::Independent, BasisMode::Correlated}) {
                    const auto ens = qkit::enumerate_ensemble(p, qubits, mode);
                    const auto bob = fidelity_report(a, ens, Clone::B);
                    const auto eve = fidelity_report(a, ens, Clone::E);
                    EXPECT_NEAR(bob.average_fidelity, fb, 1e-12);
                    EXPECT_NEAR(eve.average_fidelity, opt::optimal_fe(p, fb), 1e-12);
                    EXPECT_TRUE(bob.equal_fidelity);
                    EXPECT_TRUE(eve.equal_fidelity);
                }
                EXPECT_NEAR(mean_qubit_fidelity(a, p, Clone::B), fb, 1e-12);
                EXPECT_NEAR(mean_qubit_fidelity(a, p, Clone::E), opt::optimal_fe(p, fb), 1e-12);
            }
        }
    }
}

TEST(ProductAnsatz, MeanFidelityScalesToEightQubits) {
    const auto a = product_ansatz(Protocol::BB84, 0.8536, kMaxTensorQubits);
    EXPECT_NEAR(mean_qubit_fidelity(a, Protocol::BB84, Clone::B), 0.8536, 1e-12);
    EXPECT_NEAR(mean_qubit_fidelity(a, Protocol::BB84, Clone::E), opt::bb84_optimal_fe(0.8536), 1e-12);
}

TEST(TensorPower, MatchesKroneckerProduct) {
    std::mt19937_64 rng(10);
    const Eigen::MatrixXcd base = testing_support::random_complex_amplitudes(rng, 1);
    const auto a = tensor_power(base, 3);
    const Eigen::MatrixXcd expected = testing_support::kron(testing_support::kron(base, base), base);
    EXPECT_LT((a.entries() - expected).norm(), 1e-14);
}

TEST(AmplitudeMatrix, Validation) {
    EXPECT_THROW(AmplitudeMatrix(1, Eigen::MatrixXcd::Identity(2, 2)), std::invalid_argument);
    EXPECT_THROW(AmplitudeMatrix(2, Eigen::MatrixXcd::Zero(2, 2)), std::invalid_argument);
}
