// Eve's average single-qubit fidelity and the cloning constraints, expressed
// as functions of a real flattened amplitude vector a (index m * 2^N + n).
//
// Every (ensemble entry, qubit) pair has a single-qubit fidelity that only
// depends on the qubit position and the basis the entry uses there, so the
// constraints are evaluated per (qubit, basis) class and weighted by how many
// ensemble rows fall into each class.

#pragma once

#include <vector>

#include <Eigen/Dense>

#include "seqclone/types.hpp"

namespace seqclone::opt {

struct ConstraintClass {
    int qubit;
    Basis basis;
    // number of (entry, qubit) rows of the ensemble in this class
    double multiplicity;
    // 0/1 indicator of the Pauli labels that leave the class invariant
    Eigen::VectorXd mask;
};

/// c(a) = a^T Q a + offset
struct QuadraticConstraint {
    Eigen::MatrixXd form;
    double offset;
};

struct ConstraintValues {
    Eigen::VectorXd values;
    // one gradient per row
    Eigen::MatrixXd jacobian;
};

struct ResidualSummary {
    double normalization = 0.0;
    double target = 0.0;
    double eve_spread = 0.0;
    double bob_spread = 0.0;

    double max() const;
    std::vector<double> as_vector() const { return {normalization, target, eve_spread, bob_spread}; }
};

inline constexpr int kMaxDenseQubits = 3;
inline constexpr double kKktRankThreshold = 1e-10;

class CloningObjective {
  public:
    CloningObjective(Protocol protocol, int qubits, BasisMode mode, double target_fb);

    Protocol protocol() const { return protocol_; }
    int qubits() const { return qubits_; }
    BasisMode mode() const { return mode_; }
    double target() const { return target_; }
    Eigen::Index size() const { return size_; }
    const std::vector<ConstraintClass>& classes() const { return classes_; }

    /// Flattened Fourier dual; symmetric and an involution.
    Eigen::VectorXd dual(const Eigen::VectorXd& a) const;

    Eigen::VectorXd class_values(const Eigen::VectorXd& a, Clone which) const;
    /// Multiplicity-weighted mean of the class values.
    double average(const Eigen::VectorXd& a, Clone which) const;
    Eigen::VectorXd average_gradient(const Eigen::VectorXd& a, Clone which) const;

    /// Penalty rows: Bob's average minus the target, then for each clone the
    /// difference between every class and the first one, scaled by the square
    /// root of the class multiplicity.
    ConstraintValues penalty_constraints(const Eigen::VectorXd& a) const;

    /// Values of penalty_constraints without the Jacobian.
    Eigen::VectorXd penalty_values(const Eigen::VectorXd& a) const;
    /// J^T y for the penalty Jacobian J at a, at the cost of one dual transform.
    Eigen::VectorXd penalty_vjp(const Eigen::VectorXd& a, const Eigen::VectorXd& y) const;

    /// Unweighted class-level rows including normalization |a|^2 - 1.
    ConstraintValues kkt_constraints(const Eigen::VectorXd& a) const;

    ResidualSummary residuals(const Eigen::VectorXd& a) const;

    /// Norm of grad F_E - J^T lambda with lambda fitted by least squares over
    /// kkt_constraints.
    double kkt_residual(const Eigen::VectorXd& a) const;

    /// Dense forms, only for qubits <= kMaxDenseQubits. F_E = a^T P a.
    Eigen::MatrixXd objective_form() const;
    /// Same rows as kkt_constraints.
    std::vector<QuadraticConstraint> constraint_forms() const;

  private:
    Eigen::VectorXd class_gradient(const Eigen::VectorXd& a, const Eigen::VectorXd& b, std::size_t cls,
                                   Clone which) const;

    Protocol protocol_;
    int qubits_;
    BasisMode mode_;
    double target_;
    Eigen::Index size_;
    std::vector<ConstraintClass> classes_;
    double total_multiplicity_ = 0.0;
};

/// Minimum-norm least-squares solution of m x = rhs, treating singular values
/// below threshold * (largest) as zero. Constraints that hold identically
/// leave Jacobian rows at rounding level, which must count as rank loss.
Eigen::VectorXd least_squares(const Eigen::MatrixXd& m, const Eigen::VectorXd& rhs,
                              double threshold = kKktRankThreshold);

/// In-place Walsh-Hadamard transform (unnormalized) of a vector of length 2^k.
void walsh_hadamard(Eigen::VectorXd& v);

} // namespace seqclone::opt
