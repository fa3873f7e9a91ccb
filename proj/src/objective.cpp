#include "seqclone/objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "seqclone/cloner.hpp"
#include "seqclone/qkit.hpp"

namespace seqclone::opt {

double ResidualSummary::max() const {
    return std::max({normalization, target, eve_spread, bob_spread});
}

Eigen::VectorXd least_squares(const Eigen::MatrixXd& m, const Eigen::VectorXd& rhs, double threshold) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
    cod.setThreshold(threshold);
    cod.compute(m);
    return cod.solve(rhs);
}

void walsh_hadamard(Eigen::VectorXd& v) {
    const Eigen::Index n = v.size();
    for (Eigen::Index h = 1; h < n; h <<= 1) {
        for (Eigen::Index i = 0; i < n; i += 2 * h) {
            for (Eigen::Index j = i; j < i + h; ++j) {
                const double x = v[j];
                const double y = v[j + h];
                v[j] = x + y;
                v[j + h] = x - y;
            }
        }
    }
}

CloningObjective::CloningObjective(Protocol protocol, int qubits, BasisMode mode, double target_fb)
    : protocol_(protocol), qubits_(qubits), mode_(mode), target_(target_fb) {
    if (qubits < 1 || qubits > cloner::kMaxTensorQubits) {
        throw std::invalid_argument("CloningObjective: qubit count out of range");
    }
    const Eigen::Index d = Eigen::Index{1} << qubits;
    size_ = d * d;

    const auto assignments = qkit::basis_assignments(protocol, qubits, mode);
    const double values_per_assignment = static_cast<double>(d);
    for (int q = 0; q < qubits; ++q) {
        const int shift = qubits - 1 - q;
        for (Basis basis : protocol_bases(protocol)) {
            double count = 0.0;
            for (const auto& assignment : assignments) {
                if (assignment[static_cast<std::size_t>(q)] == basis) {
                    count += values_per_assignment;
                }
            }
            if (count == 0.0) {
                continue;
            }
            Eigen::VectorXd mask(size_);
            for (Eigen::Index m = 0; m < d; ++m) {
                for (Eigen::Index n = 0; n < d; ++n) {
                    const int mq = static_cast<int>((m >> shift) & 1);
                    const int nq = static_cast<int>((n >> shift) & 1);
                    mask[m * d + n] = cloner::basis_delta(basis, mq, nq) ? 1.0 : 0.0;
                }
            }
            classes_.push_back({q, basis, count, std::move(mask)});
            total_multiplicity_ += count;
        }
    }
}

Eigen::VectorXd CloningObjective::dual(const Eigen::VectorXd& a) const {
    if (a.size() != size_) {
        throw std::invalid_argument("CloningObjective::dual: size mismatch");
    }
    const Eigen::Index d = Eigen::Index{1} << qubits_;
    Eigen::VectorXd t(size_);
    for (Eigen::Index m = 0; m < d; ++m) {
        for (Eigen::Index n = 0; n < d; ++n) {
            t[n * d + m] = a[m * d + n];
        }
    }
    walsh_hadamard(t);
    return t / static_cast<double>(d);
}

Eigen::VectorXd CloningObjective::class_values(const Eigen::VectorXd& a, Clone which) const {
    const Eigen::VectorXd amp = which == Clone::E ? a : dual(a);
    const Eigen::VectorXd sq = amp.cwiseAbs2();
    Eigen::VectorXd out(static_cast<Eigen::Index>(classes_.size()));
    for (std::size_t c = 0; c < classes_.size(); ++c) {
        out[static_cast<Eigen::Index>(c)] = classes_[c].mask.dot(sq);
    }
    return out;
}

double CloningObjective::average(const Eigen::VectorXd& a, Clone which) const {
    const Eigen::VectorXd values = class_values(a, which);
    double acc = 0.0;
    for (std::size_t c = 0; c < classes_.size(); ++c) {
        acc += classes_[c].multiplicity * values[static_cast<Eigen::Index>(c)];
    }
    return acc / total_multiplicity_;
}

Eigen::VectorXd CloningObjective::class_gradient(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                                 std::size_t cls, Clone which) const {
    const Eigen::VectorXd& mask = classes_[cls].mask;
    if (which == Clone::E) {
        return 2.0 * mask.cwiseProduct(a);
    }
    return 2.0 * dual(mask.cwiseProduct(b));
}

Eigen::VectorXd CloningObjective::average_gradient(const Eigen::VectorXd& a, Clone which) const {
    Eigen::VectorXd weighted = Eigen::VectorXd::Zero(size_);
    for (const auto& cls : classes_) {
        weighted += (cls.multiplicity / total_multiplicity_) * cls.mask;
    }
    if (which == Clone::E) {
        return 2.0 * weighted.cwiseProduct(a);
    }
    return 2.0 * dual(weighted.cwiseProduct(dual(a)));
}

ConstraintValues CloningObjective::penalty_constraints(const Eigen::VectorXd& a) const {
    const Eigen::VectorXd b = dual(a);
    const auto rows = static_cast<Eigen::Index>(1 + 2 * (classes_.size() - 1));
    ConstraintValues out{Eigen::VectorXd(rows), Eigen::MatrixXd(rows, size_)};
    out.values[0] = average(a, Clone::B) - target_;
    out.jacobian.row(0) = average_gradient(a, Clone::B).transpose();

    Eigen::Index row = 1;
    for (Clone which : {Clone::E, Clone::B}) {
        const Eigen::VectorXd values = class_values(a, which);
        const Eigen::VectorXd g0 = class_gradient(a, b, 0, which);
        for (std::size_t c = 1; c < classes_.size(); ++c) {
            const double w = std::sqrt(classes_[c].multiplicity);
            out.values[row] = w * (values[static_cast<Eigen::Index>(c)] - values[0]);
            out.jacobian.row(row) = w * (class_gradient(a, b, c, which) - g0).transpose();
            ++row;
        }
    }
    return out;
}

Eigen::VectorXd CloningObjective::penalty_values(const Eigen::VectorXd& a) const {
    const Eigen::VectorXd e = class_values(a, Clone::E);
    const Eigen::VectorXd b = class_values(a, Clone::B);
    const auto nc = static_cast<Eigen::Index>(classes_.size());
    Eigen::VectorXd out(1 + 2 * (nc - 1));
    double avg = 0.0;
    for (Eigen::Index c = 0; c < nc; ++c) {
        avg += classes_[static_cast<std::size_t>(c)].multiplicity * b[c];
    }
    out[0] = avg / total_multiplicity_ - target_;
    for (Eigen::Index c = 1; c < nc; ++c) {
        const double w = std::sqrt(classes_[static_cast<std::size_t>(c)].multiplicity);
        out[c] = w * (e[c] - e[0]);
        out[nc - 1 + c] = w * (b[c] - b[0]);
    }
    return out;
}

Eigen::VectorXd CloningObjective::penalty_vjp(const Eigen::VectorXd& a, const Eigen::VectorXd& y) const {
    const auto nc = static_cast<Eigen::Index>(classes_.size());
    if (y.size() != 1 + 2 * (nc - 1)) {
        throw std::invalid_argument("penalty_vjp: cotangent size mismatch");
    }
    // Every row is a combination of mask-weighted squares, so J^T y collapses
    // to one combined mask per clone.
    Eigen::VectorXd eve_mask = Eigen::VectorXd::Zero(size_);
    Eigen::VectorXd bob_mask = Eigen::VectorXd::Zero(size_);
    for (Eigen::Index c = 0; c < nc; ++c) {
        const auto& cls = classes_[static_cast<std::size_t>(c)];
        bob_mask += (y[0] * cls.multiplicity / total_multiplicity_) * cls.mask;
        if (c == 0) {
            continue;
        }
        const double w = std::sqrt(cls.multiplicity);
        const double ye = w * y[c];
        const double yb = w * y[nc - 1 + c];
        eve_mask += ye * (cls.mask - classes_[0].mask);
        bob_mask += yb * (cls.mask - classes_[0].mask);
    }
    return 2.0 * eve_mask.cwiseProduct(a) + 2.0 * dual(bob_mask.cwiseProduct(dual(a)));
}

ConstraintValues CloningObjective::kkt_constraints(const Eigen::VectorXd& a) const {
    const Eigen::VectorXd b = dual(a);
    const auto rows = static_cast<Eigen::Index>(2 + 2 * (classes_.size() - 1));
    ConstraintValues out{Eigen::VectorXd(rows), Eigen::MatrixXd(rows, size_)};
    out.values[0] = a.squaredNorm() - 1.0;
    out.jacobian.row(0) = 2.0 * a.transpose();
    out.values[1] = average(a, Clone::B) - target_;
    out.jacobian.row(1) = average_gradient(a, Clone::B).transpose();

    Eigen::Index row = 2;
    for (Clone which : {Clone::E, Clone::B}) {
        const Eigen::VectorXd values = class_values(a, which);
        const Eigen::VectorXd g0 = class_gradient(a, b, 0, which);
        for (std::size_t c = 1; c < classes_.size(); ++c) {
            out.values[row] = values[static_cast<Eigen::Index>(c)] - values[0];
            out.jacobian.row(row) = (class_gradient(a, b, c, which) - g0).transpose();
            ++row;
        }
    }
    return out;
}

ResidualSummary CloningObjective::residuals(const Eigen::VectorXd& a) const {
    ResidualSummary r;
    r.normalization = std::abs(a.squaredNorm() - 1.0);
    r.target = std::abs(average(a, Clone::B) - target_);
    const Eigen::VectorXd e = class_values(a, Clone::E);
    const Eigen::VectorXd b = class_values(a, Clone::B);
    r.eve_spread = e.maxCoeff() - e.minCoeff();
    r.bob_spread = b.maxCoeff() - b.minCoeff();
    return r;
}

double CloningObjective::kkt_residual(const Eigen::VectorXd& a) const {
    const Eigen::VectorXd grad = average_gradient(a, Clone::E);
    const ConstraintValues c = kkt_constraints(a);
    const Eigen::MatrixXd jt = c.jacobian.transpose();
    const Eigen::VectorXd lambda = least_squares(jt, grad);
    return (grad - jt * lambda).norm();
}

Eigen::MatrixXd CloningObjective::objective_form() const {
    if (qubits_ > kMaxDenseQubits) {
        throw std::invalid_argument("objective_form: too many qubits for dense forms");
    }
    Eigen::VectorXd weighted = Eigen::VectorXd::Zero(size_);
    for (const auto& cls : classes_) {
        weighted += (cls.multiplicity / total_multiplicity_) * cls.mask;
    }
    return weighted.asDiagonal();
}

std::vector<QuadraticConstraint> CloningObjective::constraint_forms() const {
    if (qubits_ > kMaxDenseQubits) {
        throw std::invalid_argument("constraint_forms: too many qubits for dense forms");
    }
    Eigen::MatrixXd t(size_, size_);
    for (Eigen::Index k = 0; k < size_; ++k) {
        t.col(k) = dual(Eigen::VectorXd::Unit(size_, k));
    }
    const auto eve_form = [](const ConstraintClass& cls) -> Eigen::MatrixXd { return cls.mask.asDiagonal(); };
    const auto bob_form = [&t](const ConstraintClass& cls) -> Eigen::MatrixXd {
        return t * cls.mask.asDiagonal() * t;
    };

    std::vector<QuadraticConstraint> out;
    out.push_back({Eigen::MatrixXd::Identity(size_, size_), -1.0});
    Eigen::MatrixXd bob_avg = Eigen::MatrixXd::Zero(size_, size_);
    for (const auto& cls : classes_) {
        bob_avg += (cls.multiplicity / total_multiplicity_) * bob_form(cls);
    }
    out.push_back({bob_avg, -target_});
    const Eigen::MatrixXd e0 = eve_form(classes_[0]);
    for (std::size_t c = 1; c < classes_.size(); ++c) {
        out.push_back({eve_form(classes_[c]) - e0, 0.0});
    }
    const Eigen::MatrixXd b0 = bob_form(classes_[0]);
    for (std::size_t c = 1; c < classes_.size(); ++c) {
        out.push_back({bob_form(classes_[c]) - b0, 0.0});
    }
    return out;
}

} // namespace seqclone::opt
