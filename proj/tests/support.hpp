// Reference implementations and random generators shared by the unit tests.
// Nothing here calls into the library's transforms, so the tests compare two
// independent computations.

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

#include "seqclone/cloner.hpp"

namespace testing_support {

using cplx = std::complex<double>;

inline int parity(std::uint32_t v) { return __builtin_popcount(v) & 1; }

// b_{m,n} = 2^{-N} sum_{x,y} (-1)^{n.x + m.y} a_{x,y}, straight from the
// definition: O(16^N).
inline Eigen::MatrixXcd direct_dual(const Eigen::MatrixXcd& a) {
    const auto d = static_cast<std::uint32_t>(a.rows());
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(a.rows(), a.cols());
    for (std::uint32_t m = 0; m < d; ++m) {
        for (std::uint32_t n = 0; n < d; ++n) {
            cplx acc = 0.0;
            for (std::uint32_t x = 0; x < d; ++x) {
                for (std::uint32_t y = 0; y < d; ++y) {
                    const int sign = parity(n & x) ^ parity(m & y);
                    acc += (sign ? -1.0 : 1.0) * a(x, y);
                }
            }
            b(m, n) = acc / static_cast<double>(d);
        }
    }
    return b;
}

inline Eigen::MatrixXcd kron(const Eigen::MatrixXcd& l, const Eigen::MatrixXcd& r) {
    Eigen::MatrixXcd out(l.rows() * r.rows(), l.cols() * r.cols());
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
        for (Eigen::Index j = 0; j < l.cols(); ++j) {
            out.block(i * r.rows(), j * r.cols(), r.rows(), r.cols()) = l(i, j) * r;
        }
    }
    return out;
}

inline Eigen::MatrixXcd random_complex_amplitudes(std::mt19937_64& rng, int qubits) {
    std::normal_distribution<double> g;
    const Eigen::Index d = Eigen::Index{1} << qubits;
    Eigen::MatrixXcd a(d, d);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        a(i) = cplx(g(rng), g(rng));
    }
    return a / a.norm();
}

inline seqclone::cloner::AmplitudeMatrix random_cloner(std::mt19937_64& rng, int qubits) {
    return {qubits, random_complex_amplitudes(rng, qubits)};
}

// Real nonnegative cloner, the class the optimizer searches.
inline seqclone::cloner::AmplitudeMatrix random_real_cloner(std::mt19937_64& rng, int qubits) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Eigen::Index d = Eigen::Index{1} << qubits;
    Eigen::MatrixXcd a(d, d);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        a(i) = u(rng);
    }
    return {qubits, a / a.norm()};
}

inline Eigen::VectorXd flatten_real(const seqclone::cloner::AmplitudeMatrix& a) {
    const Eigen::Index d = a.dim();
    Eigen::VectorXd v(d * d);
    for (Eigen::Index m = 0; m < d; ++m) {
        for (Eigen::Index n = 0; n < d; ++n) {
            v[m * d + n] = a(m, n).real();
        }
    }
    return v;
}

inline Eigen::VectorXcd random_state(std::mt19937_64& rng, int qubits) {
    std::normal_distribution<double> g;
    Eigen::VectorXcd v(Eigen::Index{1} << qubits);
    for (auto& c : v) {
        c = cplx(g(rng), g(rng));
    }
    return v / v.norm();
}

} // namespace testing_support
