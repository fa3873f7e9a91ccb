#include "seqclone/lagrangian.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace seqclone::opt {

namespace {

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
    }
    return r;
}

// Gradient of (1/N) sum_{m in {0,1}^N} (N - |m|) prod_i U^{1-m_i} V^{m_i},
// grouped by k = |m|.
Eigen::VectorXd weighted_sum_gradient(int n, double u, double w, const Eigen::VectorXd& du,
                                      const Eigen::VectorXd& dw) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(du.size());
    for (int k = 0; k < n; ++k) {
        const double weight = binomial(n, k) * (n - k) / n;
        const int pu = n - k;
        g += weight * (pu * std::pow(u, pu - 1) * std::pow(w, k)) * du;
        if (k > 0) {
            g += weight * (k * std::pow(u, pu) * std::pow(w, k - 1)) * dw;
        }
    }
    return g;
}

} // namespace

TensorCoefficients optimal_tensor_coefficients(Protocol protocol, double fb) {
    if (protocol == Protocol::BB84) {
        const auto c = cloner::bb84_coefficients(fb);
        return {c.v, c.x, c.y};
    }
    // Eve's base is the dual of Bob's [[v, x], [x, x]].
    const auto c = cloner::sixstate_coefficients(fb);
    const double off = (c.v - c.x) / 2.0;
    return {(c.v + 3.0 * c.x) / 2.0, off, off};
}

cloner::AmplitudeMatrix tensor_cloner(const TensorCoefficients& c, int qubits) {
    Eigen::Matrix2cd base;
    base << c.v, c.x, c.x, c.y;
    return cloner::tensor_power(base, qubits);
}

std::optional<TensorCoefficients> tensor_factor(const cloner::AmplitudeMatrix& a, Protocol protocol, double tol) {
    const Eigen::MatrixXcd& e = a.entries();
    if (e.imag().cwiseAbs().maxCoeff() > tol) {
        return std::nullopt;
    }
    const int n = a.qubits();
    const Eigen::Index top = Eigen::Index{1} << (n - 1);
    const double a00 = e(0, 0).real();
    if (a00 <= 0.0) {
        return std::nullopt;
    }
    const double v = std::pow(a00, 1.0 / n);
    const double scale = std::pow(v, n - 1);
    const double e01 = e(0, top).real() / scale;
    const double e10 = e(top, 0).real() / scale;
    const double e11 = e(top, top).real() / scale;
    if (std::abs(e01 - e10) > tol) {
        return std::nullopt;
    }
    if (protocol == Protocol::SixState && std::abs(e11 - e01) > tol) {
        return std::nullopt;
    }
    const TensorCoefficients c{v, e01, e11};
    Eigen::Matrix2cd base;
    base << c.v, c.x, c.x, c.y;
    Eigen::MatrixXcd rebuilt = base;
    for (int q = 1; q < n; ++q) {
        const Eigen::MatrixXcd prev = rebuilt;
        rebuilt.resize(prev.rows() * 2, prev.cols() * 2);
        for (Eigen::Index i = 0; i < prev.rows(); ++i) {
            for (Eigen::Index j = 0; j < prev.cols(); ++j) {
                rebuilt.block<2, 2>(2 * i, 2 * j) = prev(i, j) * base;
            }
        }
    }
    if ((rebuilt - e).cwiseAbs().maxCoeff() > tol) {
        return std::nullopt;
    }
    return c;
}

LagrangianFit printed_lagrangian_fit(Protocol protocol, int qubits, const TensorCoefficients& c) {
    if (qubits < 1) {
        throw std::invalid_argument("printed_lagrangian_fit: N must be positive");
    }
    const double v = c.v;
    const double x = c.x;
    Eigen::VectorXd grad_a;
    Eigen::VectorXd grad_b;
    Eigen::VectorXd grad_p;
    Eigen::VectorXd grad_s;
    double big_a = 0.0;
    double big_b = 0.0;
    double big_p = 0.0;
    double big_s = 0.0;
    if (protocol == Protocol::BB84) {
        const double y = c.y;
        big_a = v * v + x * x;
        big_b = x * x + y * y;
        big_p = 0.5 + v * x + x * y;
        big_s = v * v + 2 * x * x + y * y;
        grad_a = Eigen::Vector3d(2 * v, 2 * x, 0.0);
        grad_b = Eigen::Vector3d(0.0, 2 * x, 2 * y);
        grad_p = Eigen::Vector3d(x, v + y, x);
        grad_s = Eigen::Vector3d(2 * v, 4 * x, 2 * y);
    } else {
        big_a = v * v + x * x;
        big_b = 2 * x * x;
        big_p = 0.5 + v * x + x * x;
        big_s = v * v + 3 * x * x;
        grad_a = Eigen::Vector2d(2 * v, 2 * x);
        grad_b = Eigen::Vector2d(0.0, 4 * x);
        grad_p = Eigen::Vector2d(x, v + 2 * x);
        grad_s = Eigen::Vector2d(2 * v, 6 * x);
    }
    const double big_q = 1.0 - big_p;
    const Eigen::VectorXd grad_q = -grad_p;

    const Eigen::VectorXd g_fe = weighted_sum_gradient(qubits, big_a, big_b, grad_a, grad_b);
    const Eigen::VectorXd g_fb = weighted_sum_gradient(qubits, big_p, big_q, grad_p, grad_q);
    const Eigen::VectorXd g_norm = qubits * std::pow(big_s, qubits - 1) * grad_s;

    Eigen::MatrixXd basis(g_fe.size(), 2);
    basis.col(0) = g_fb;
    basis.col(1) = g_norm;
    // grad F_E + l1 grad F_B + l2 grad G = 0
    const Eigen::VectorXd lambda = least_squares(basis, -g_fe);
    const double residual = (g_fe + basis * lambda).norm();
    return {residual, lambda[0], lambda[1]};
}

double lagrangian_residual(const cloner::AmplitudeMatrix& a, Protocol protocol) {
    const auto c = tensor_factor(a, protocol);
    if (!c) {
        throw std::invalid_argument("lagrangian_residual: amplitudes are not a tensor power of the protocol's shape");
    }
    return printed_lagrangian_fit(protocol, a.qubits(), *c).residual;
}

double kkt_residual(const cloner::AmplitudeMatrix& a, Protocol protocol) {
    if (a.entries().imag().cwiseAbs().maxCoeff() > 1e-12) {
        throw std::invalid_argument("kkt_residual: amplitudes must be real");
    }
    const Eigen::MatrixXd real = a.entries().real();
    const Eigen::Index d = a.dim();
    Eigen::VectorXd flat(d * d);
    for (Eigen::Index m = 0; m < d; ++m) {
        for (Eigen::Index n = 0; n < d; ++n) {
            flat[m * d + n] = real(m, n);
        }
    }
    const CloningObjective probe(protocol, a.qubits(), BasisMode::Correlated, 0.0);
    const double fb = probe.average(flat, Clone::B);
    return CloningObjective(protocol, a.qubits(), BasisMode::Correlated, fb).kkt_residual(flat);
}

TensorCoefficients perturb_on_constraint_curve(const TensorCoefficients& c, double relative) {
    const double v = c.v * (1.0 + relative);
    const double p_target = 0.5 + c.v * c.x + c.x * c.y;
    double x = c.x;
    double y = c.y;
    for (int it = 0; it < 100; ++it) {
        const Eigen::Vector2d f(v * v + 2 * x * x + y * y - 1.0, 0.5 + v * x + x * y - p_target);
        if (f.cwiseAbs().maxCoeff() < 1e-15) {
            break;
        }
        Eigen::Matrix2d j;
        j << 4 * x, 2 * y, v + y, x;
        const Eigen::Vector2d step = j.fullPivLu().solve(f);
        x -= step[0];
        y -= step[1];
    }
    const double s_res = std::abs(v * v + 2 * x * x + y * y - 1.0);
    const double p_res = std::abs(0.5 + v * x + x * y - p_target);
    if (!(s_res < 1e-12 && p_res < 1e-12)) {
        throw std::runtime_error("perturb_on_constraint_curve: no nearby point on the constraint surface");
    }
    return {v, x, y};
}

Eigen::VectorXd perturbed_feasible_point(const CloningObjective& objective, const Eigen::VectorXd& a,
                                         double relative, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::VectorXd dir(a.size());
    for (Eigen::Index i = 0; i < dir.size(); ++i) {
        dir[i] = normal(rng);
    }
    const Eigen::MatrixXd jac = objective.kkt_constraints(a).jacobian;
    dir -= least_squares(jac, jac * dir);
    dir *= relative * a.norm() / dir.norm();

    Eigen::VectorXd p = a + dir;
    for (int it = 0; it < 50; ++it) {
        const ConstraintValues c = objective.kkt_constraints(p);
        if (c.values.cwiseAbs().maxCoeff() < 1e-14) {
            break;
        }
        p -= least_squares(c.jacobian, c.values);
    }
    if (objective.residuals(p).max() > 1e-12) {
        throw std::runtime_error("perturbed_feasible_point: projection did not reach the constraint set");
    }
    return p;
}

} // namespace seqclone::opt
