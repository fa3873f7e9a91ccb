// Numerical maximization of Eve's average single-qubit fidelity over real
// nonnegative cloners at fixed Bob fidelity, with the equal-fidelity
// constraints for both clones.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "seqclone/cloner.hpp"
#include "seqclone/objective.hpp"
#include "seqclone/types.hpp"

namespace seqclone::opt {

// GeneralReal searches all 4^N amplitudes; TensorPower searches the N-fold
// tensor powers of a symmetric 2x2 base ([[v,x],[x,y]] for BB84, [[v,x],[x,x]]
// for six-state).
enum class Parameterization { TensorPower, GeneralReal };

std::string_view to_string(Parameterization p);
Parameterization parse_parameterization(std::string_view s);

inline constexpr int kMaxGeneralQubits = 3;

struct Tolerances {
    double constraint = 1e-10;
    double objective = 1e-10;
};

struct OptimizationProblem {
    Protocol protocol = Protocol::BB84;
    int qubits = 1;
    BasisMode mode = BasisMode::Correlated;
    double target_fb = 0.85;
    Parameterization parameterization = Parameterization::GeneralReal;
    Tolerances tolerances{};
    int restarts = 32;
    std::uint64_t seed = 0;
};

enum class OptimizationStatus { Converged, NotConverged, Infeasible };

std::string_view to_string(OptimizationStatus s);

struct OptimizationResult {
    std::optional<cloner::AmplitudeMatrix> a;
    double fe = 0.0;
    double fb_achieved = 0.0;
    // normalization, |F_B - target|, Eve spread, Bob spread
    std::vector<double> constraint_residuals;
    double stationarity = 0.0;
    bool converged = false;
    int restarts_used = 0;
    OptimizationStatus status = OptimizationStatus::NotConverged;
    std::string message;
};

/// Multi-start augmented-Lagrangian search followed by a feasibility polish.
/// Deterministic given problem.seed. Targets outside the protocol's fidelity
/// domain come back with status Infeasible and no cloner.
OptimizationResult optimize(const OptimizationProblem& problem);

struct MinimizeOptions {
    double gradient_tol = 1e-10;
    int max_iterations = 1000;
};

struct MinimizeResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

using ValueAndGradient = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// BFGS with Armijo backtracking.
MinimizeResult minimize_bfgs(const ValueAndGradient& f, Eigen::VectorXd x0, const MinimizeOptions& options = {});

struct OptimalityPoint {
    double fb;
    double closed_form;
    // one entry per requested mode
    std::vector<double> fe;
    bool converged;
};

struct TensorOptimalityReport {
    Protocol protocol;
    int qubits;
    std::vector<BasisMode> modes;
    std::vector<OptimalityPoint> points;
    double max_deviation = 0.0;
    // max over points of the spread of F_E across modes
    double max_mode_gap = 0.0;
    bool all_converged = true;
};

/// Runs GeneralReal optimize at every grid point for each mode and compares
/// with the closed-form curve.
TensorOptimalityReport verify_tensor_optimality(Protocol protocol, int qubits, const std::vector<double>& fb_grid,
                                                const std::vector<BasisMode>& modes = {BasisMode::Independent,
                                                                                      BasisMode::Correlated},
                                                int restarts = 32, std::uint64_t seed = 0);

/// n evenly spaced points on [lo, hi] (both ends included).
std::vector<double> linear_grid(double lo, double hi, int n);

} // namespace seqclone::opt
