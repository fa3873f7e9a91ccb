#include "seqclone/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <random>
#include <stdexcept>
#include <string>

#include "seqclone/curves.hpp"

namespace seqclone::opt {

namespace {

constexpr int kMaxOuterIterations = 40;
constexpr double kInitialPenalty = 10.0;
constexpr double kMaxPenalty = 1e10;
constexpr double kHandoffViolation = 1e-10;
constexpr double kPolishFeasibility = 1e-13;
constexpr double kNegativeAmplitudeTol = 1e-12;
constexpr double kPolishMaxStep = 1e-3;
constexpr double kPolishMaxObjectiveDrop = 1e-8;

// Maps search coordinates u to a normalized nonnegative amplitude vector.
class Model {
  public:
    virtual ~Model() = default;
    virtual Eigen::Index parameters() const = 0;
    virtual Eigen::VectorXd amplitudes(const Eigen::VectorXd& u) const = 0;
    // gradient with respect to u of a function whose a-gradient is grad_a
    virtual Eigen::VectorXd pullback(const Eigen::VectorXd& u, const Eigen::VectorXd& grad_a) const = 0;
};

// a = (u o u) / |u o u|
class GeneralModel final : public Model {
  public:
    explicit GeneralModel(Eigen::Index size) : size_(size) {}

    Eigen::Index parameters() const override { return size_; }

    Eigen::VectorXd amplitudes(const Eigen::VectorXd& u) const override {
        const Eigen::VectorXd s = u.cwiseAbs2();
        return s / s.norm();
    }

    Eigen::VectorXd pullback(const Eigen::VectorXd& u, const Eigen::VectorXd& grad_a) const override {
        const Eigen::VectorXd s = u.cwiseAbs2();
        const double norm = s.norm();
        const Eigen::VectorXd a = s / norm;
        const Eigen::VectorXd grad_s = (grad_a - a * a.dot(grad_a)) / norm;
        return 2.0 * u.cwiseProduct(grad_s);
    }

  private:
    Eigen::Index size_;
};

// Tensor power of a symmetric 2x2 base whose entries (e00, e01, e10, e11) are
// squared coordinates: (u0^2, u1^2, u1^2, u2^2) for BB84 and
// (u0^2, u1^2, u1^2, u1^2) for six-state.
class TensorModel final : public Model {
  public:
    TensorModel(Protocol protocol, int qubits) : qubits_(qubits) {
        const int p = protocol == Protocol::BB84 ? 3 : 2;
        owner_ = Eigen::Vector4i(0, 1, 1, protocol == Protocol::BB84 ? 2 : 1);
        params_ = p;
    }

    Eigen::Index parameters() const override { return params_; }

    Eigen::VectorXd amplitudes(const Eigen::VectorXd& u) const override { return expand(base(u)); }

    Eigen::VectorXd pullback(const Eigen::VectorXd& u, const Eigen::VectorXd& grad_a) const override {
        const Eigen::Vector4d s = squares(u);
        const double norm = s.norm();
        const Eigen::Vector4d e = s / norm;
        const Eigen::Index d = Eigen::Index{1} << qubits_;

        Eigen::Vector4d grad_e = Eigen::Vector4d::Zero();
        if (e.minCoeff() > 0.0) {
            // d a_k / d e_t = count_t(k) a_k / e_t
            const Eigen::VectorXd a = expand(e);
            for (Eigen::Index m = 0; m < d; ++m) {
                for (Eigen::Index n = 0; n < d; ++n) {
                    const double ga = grad_a[m * d + n] * a[m * d + n];
                    for (int q = 0; q < qubits_; ++q) {
                        grad_e[factor_index(m, n, q)] += ga;
                    }
                }
            }
            grad_e = grad_e.cwiseQuotient(e);
        } else {
            for (Eigen::Index m = 0; m < d; ++m) {
                for (Eigen::Index n = 0; n < d; ++n) {
                    const double g = grad_a[m * d + n];
                    for (int q = 0; q < qubits_; ++q) {
                        double partial = 1.0;
                        for (int r = 0; r < qubits_; ++r) {
                            if (r != q) {
                                partial *= e[factor_index(m, n, r)];
                            }
                        }
                        grad_e[factor_index(m, n, q)] += g * partial;
                    }
                }
            }
        }
        const Eigen::Vector4d grad_s = (grad_e - e * e.dot(grad_e)) / norm;
        Eigen::VectorXd grad_u = Eigen::VectorXd::Zero(params_);
        for (int t = 0; t < 4; ++t) {
            grad_u[owner_[t]] += 2.0 * u[owner_[t]] * grad_s[t];
        }
        return grad_u;
    }

  private:
    Eigen::Vector4d squares(const Eigen::VectorXd& u) const {
        Eigen::Vector4d s;
        for (int t = 0; t < 4; ++t) {
            s[t] = u[owner_[t]] * u[owner_[t]];
        }
        return s;
    }

    Eigen::Vector4d base(const Eigen::VectorXd& u) const {
        const Eigen::Vector4d s = squares(u);
        return s / s.norm();
    }

    int factor_index(Eigen::Index m, Eigen::Index n, int q) const {
        const int shift = qubits_ - 1 - q;
        return static_cast<int>(2 * ((m >> shift) & 1) + ((n >> shift) & 1));
    }

    Eigen::VectorXd expand(const Eigen::Vector4d& e) const {
        const Eigen::Index d = Eigen::Index{1} << qubits_;
        Eigen::VectorXd a(d * d);
        for (Eigen::Index m = 0; m < d; ++m) {
            for (Eigen::Index n = 0; n < d; ++n) {
                double v = 1.0;
                for (int q = 0; q < qubits_; ++q) {
                    v *= e[factor_index(m, n, q)];
                }
                a[m * d + n] = v;
            }
        }
        return a;
    }

    int qubits_;
    Eigen::Index params_;
    Eigen::Vector4i owner_;
};

struct StartOutcome {
    Eigen::VectorXd a;
    double fe = -std::numeric_limits<double>::infinity();
    ResidualSummary residuals;
    bool feasible = false;
};

Eigen::VectorXd augmented_lagrangian(const CloningObjective& obj, const Model& model, Eigen::VectorXd u) {
    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(obj.penalty_values(model.amplitudes(u)).size());
    double mu = kInitialPenalty;
    double previous_violation = std::numeric_limits<double>::infinity();

    for (int outer = 0; outer < kMaxOuterIterations; ++outer) {
        const auto phi = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
            const Eigen::VectorXd a = model.amplitudes(x);
            const Eigen::VectorXd c = obj.penalty_values(a);
            const double value = -obj.average(a, Clone::E) - lambda.dot(c) + 0.5 * mu * c.squaredNorm();
            const Eigen::VectorXd grad_a = obj.penalty_vjp(a, mu * c - lambda) - obj.average_gradient(a, Clone::E);
            grad = model.pullback(x, grad_a);
            return value;
        };
        u = minimize_bfgs(phi, u, {1e-10, 500}).x;

        const Eigen::VectorXd c = obj.penalty_values(model.amplitudes(u));
        const double violation = c.cwiseAbs().maxCoeff();
        // the polish finishes the job from here
        if (violation < kHandoffViolation) {
            break;
        }
        lambda -= mu * c;
        if (violation > 0.25 * previous_violation) {
            mu = std::min(mu * 10.0, kMaxPenalty);
        }
        previous_violation = violation;
    }
    return u;
}

// Gauss-Newton projection of u onto the constraint set.
Eigen::VectorXd project_parameters(const CloningObjective& obj, const Model& model, Eigen::VectorXd u) {
    for (int it = 0; it < 30; ++it) {
        const Eigen::VectorXd a = model.amplitudes(u);
        const ConstraintValues c = obj.penalty_constraints(a);
        if (c.values.cwiseAbs().maxCoeff() < 1e-15) {
            break;
        }
        Eigen::MatrixXd ju(c.values.size(), model.parameters());
        for (Eigen::Index r = 0; r < c.values.size(); ++r) {
            ju.row(r) = model.pullback(u, c.jacobian.row(r).transpose()).transpose();
        }
        const Eigen::VectorXd step = least_squares(ju, c.values);
        const Eigen::VectorXd candidate = u - step;
        if (obj.penalty_values(model.amplitudes(candidate)).norm() >= c.values.norm()) {
            break;
        }
        u = candidate;
    }
    return u;
}

// Newton iteration on the KKT system of the class-level constraints in
// amplitude space. Returns nothing when the iterate leaves the neighbourhood
// of the starting point or the nonnegative orthant.
std::optional<Eigen::VectorXd> newton_kkt(const CloningObjective& obj, const Eigen::VectorXd& a0) {
    const Eigen::MatrixXd p = obj.objective_form();
    const std::vector<QuadraticConstraint> forms = obj.constraint_forms();
    const auto k = static_cast<Eigen::Index>(forms.size());
    const Eigen::Index n = obj.size();

    Eigen::VectorXd a = a0;
    Eigen::MatrixXd jac(k, n);
    Eigen::VectorXd cval(k);
    const auto evaluate = [&](const Eigen::VectorXd& x) {
        for (Eigen::Index j = 0; j < k; ++j) {
            const Eigen::VectorXd qa = forms[static_cast<std::size_t>(j)].form * x;
            cval[j] = x.dot(qa) + forms[static_cast<std::size_t>(j)].offset;
            jac.row(j) = 2.0 * qa.transpose();
        }
    };

    evaluate(a);
    Eigen::VectorXd lambda = least_squares(jac.transpose(), 2.0 * p * a);
    for (int it = 0; it < 25; ++it) {
        const Eigen::VectorXd grad = 2.0 * p * a;
        const Eigen::VectorXd stationarity = grad - jac.transpose() * lambda;
        if (cval.cwiseAbs().maxCoeff() < 1e-15 && stationarity.norm() < 1e-14) {
            break;
        }
        Eigen::MatrixXd h = 2.0 * p;
        for (Eigen::Index j = 0; j < k; ++j) {
            h -= 2.0 * lambda[j] * forms[static_cast<std::size_t>(j)].form;
        }
        Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
        kkt.topLeftCorner(n, n) = h;
        kkt.topRightCorner(n, k) = -jac.transpose();
        kkt.bottomLeftCorner(k, n) = jac;
        Eigen::VectorXd rhs(n + k);
        rhs << -stationarity, -cval;
        const Eigen::VectorXd step = least_squares(kkt, rhs);
        a += step.head(n);
        lambda += step.tail(k);
        evaluate(a);
        if ((a - a0).norm() > kPolishMaxStep) {
            return std::nullopt;
        }
    }
    if (a.minCoeff() < -kNegativeAmplitudeTol) {
        return std::nullopt;
    }
    a = a.cwiseMax(0.0);
    a /= a.norm();
    return a;
}

// The search runs on (search_obj, search_model); the reported cloner is
// model.amplitudes(u), checked against obj.
struct SearchSpace {
    const CloningObjective& search_obj;
    const Model& search_model;
    const CloningObjective& obj;
    const Model& model;
};

StartOutcome run_start(const SearchSpace& space, const OptimizationProblem& problem, Eigen::VectorXd u) {
    const CloningObjective& obj = space.obj;
    const Model& model = space.model;
    u = augmented_lagrangian(space.search_obj, space.search_model, std::move(u));
    u = project_parameters(space.search_obj, space.search_model, std::move(u));

    StartOutcome out;
    out.a = model.amplitudes(u);
    if (problem.parameterization == Parameterization::GeneralReal) {
        if (auto polished = newton_kkt(obj, out.a)) {
            const ResidualSummary r = obj.residuals(*polished);
            const bool improves_stationarity = obj.kkt_residual(*polished) <= obj.kkt_residual(out.a);
            if (r.max() <= kPolishFeasibility && improves_stationarity &&
                obj.average(*polished, Clone::E) >= obj.average(out.a, Clone::E) - kPolishMaxObjectiveDrop) {
                out.a = *polished;
            }
        }
    }
    out.fe = obj.average(out.a, Clone::E);
    out.residuals = obj.residuals(out.a);
    out.feasible = out.residuals.max() <= problem.tolerances.constraint;
    return out;
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

} // namespace

std::string_view to_string(Parameterization p) {
    return p == Parameterization::TensorPower ? "tensor-power" : "general-real";
}

Parameterization parse_parameterization(std::string_view s) {
    if (s == "tensor-power") {
        return Parameterization::TensorPower;
    }
    if (s == "general-real") {
        return Parameterization::GeneralReal;
    }
    throw std::invalid_argument("unknown parameterization '" + std::string(s) +
                                "' (expected tensor-power or general-real)");
}

std::string_view to_string(OptimizationStatus s) {
    switch (s) {
    case OptimizationStatus::Converged:
        return "converged";
    case OptimizationStatus::NotConverged:
        return "not-converged";
    case OptimizationStatus::Infeasible:
        return "infeasible";
    }
    return "unknown";
}

MinimizeResult minimize_bfgs(const ValueAndGradient& f, Eigen::VectorXd x, const MinimizeOptions& options) {
    const Eigen::Index n = x.size();
    Eigen::VectorXd g(n);
    double fx = f(x, g);
    Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);
    bool scaled = false;

    MinimizeResult result;
    int stalls = 0;
    int it = 0;
    for (; it < options.max_iterations; ++it) {
        if (g.cwiseAbs().maxCoeff() <= options.gradient_tol) {
            result.converged = true;
            break;
        }
        Eigen::VectorXd p = -hinv * g;
        double slope = g.dot(p);
        if (slope >= 0.0) {
            hinv.setIdentity();
            p = -g;
            slope = -g.squaredNorm();
        }

        double t = 1.0;
        Eigen::VectorXd x_new(n);
        Eigen::VectorXd g_new(n);
        double f_new = 0.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            x_new = x + t * p;
            f_new = f(x_new, g_new);
            if (std::isfinite(f_new) && f_new <= fx + 1e-4 * t * slope) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            // no descent possible at working precision
            result.converged = g.cwiseAbs().maxCoeff() <= std::sqrt(options.gradient_tol);
            break;
        }

        // decrease at the rounding floor of f
        if (fx - f_new <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(fx))) {
            if (++stalls >= 3) {
                x = std::move(x_new);
                fx = f_new;
                result.converged = true;
                break;
            }
        } else {
            stalls = 0;
        }

        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-300) {
            if (!scaled) {
                hinv *= sy / y.squaredNorm();
                scaled = true;
            }
            const double rho = 1.0 / sy;
            const Eigen::VectorXd hy = hinv * y;
            hinv += ((sy + y.dot(hy)) * rho * rho) * (s * s.transpose()) - rho * (hy * s.transpose() + s * hy.transpose());
        }
        x = std::move(x_new);
        g = std::move(g_new);
        fx = f_new;
    }
    result.x = std::move(x);
    result.value = fx;
    result.iterations = it;
    return result;
}

OptimizationResult optimize(const OptimizationProblem& problem) {
    if (problem.restarts < 1) {
        throw std::invalid_argument("optimize: restarts must be positive");
    }
    const int cap = problem.parameterization == Parameterization::GeneralReal ? kMaxGeneralQubits
                                                                              : cloner::kMaxTensorQubits;
    if (problem.qubits < 1 || problem.qubits > cap) {
        throw std::invalid_argument("optimize: N must lie in [1, " + std::to_string(cap) + "] for " +
                                    std::string(to_string(problem.parameterization)));
    }

    OptimizationResult result;
    if (!std::isfinite(problem.target_fb) || !in_fidelity_domain(problem.protocol, problem.target_fb)) {
        result.status = OptimizationStatus::Infeasible;
        result.message = "infeasible: target F_B = " + format_number(problem.target_fb) + " outside [" +
                         format_number(min_bob_fidelity(problem.protocol)) + ", 1] for " +
                         std::string(seqclone::to_string(problem.protocol));
        return result;
    }

    const CloningObjective obj(problem.protocol, problem.qubits, problem.mode, problem.target_fb);
    std::unique_ptr<Model> model;
    // On a tensor power every (qubit, basis) class takes the value the base
    // factor gets as a one-qubit cloner, so that search runs at N = 1.
    std::optional<CloningObjective> factor_obj;
    std::unique_ptr<Model> factor_model;
    if (problem.parameterization == Parameterization::GeneralReal) {
        model = std::make_unique<GeneralModel>(obj.size());
    } else {
        model = std::make_unique<TensorModel>(problem.protocol, problem.qubits);
        factor_obj.emplace(problem.protocol, 1, problem.mode, problem.target_fb);
        factor_model = std::make_unique<TensorModel>(problem.protocol, 1);
    }
    const SearchSpace space{factor_obj ? *factor_obj : obj, factor_model ? *factor_model : *model, obj, *model};

    std::optional<StartOutcome> best;
    for (int r = 0; r < problem.restarts; ++r) {
        std::seed_seq seq{static_cast<std::uint32_t>(problem.seed), static_cast<std::uint32_t>(problem.seed >> 32),
                          static_cast<std::uint32_t>(r)};
        std::mt19937_64 rng(seq);
        std::uniform_real_distribution<double> dist(0.3, 1.0);
        Eigen::VectorXd u(model->parameters());
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            u[i] = dist(rng);
        }
        StartOutcome outcome = run_start(space, problem, std::move(u));
        const bool better = !best || (outcome.feasible && !best->feasible) ||
                            (outcome.feasible == best->feasible &&
                             (outcome.feasible ? outcome.fe > best->fe
                                               : outcome.residuals.max() < best->residuals.max()));
        if (better) {
            best = std::move(outcome);
        }
        result.restarts_used = r + 1;
    }

    result.a = cloner::AmplitudeMatrix::from_flat(problem.qubits, best->a);
    result.fe = best->fe;
    result.fb_achieved = obj.average(best->a, Clone::B);
    result.constraint_residuals = best->residuals.as_vector();
    result.stationarity = obj.kkt_residual(best->a);
    result.converged = best->feasible;
    result.status = best->feasible ? OptimizationStatus::Converged : OptimizationStatus::NotConverged;
    result.message = best->feasible ? "converged"
                                    : "no start reached constraint tolerance; max residual " +
                                          format_number(best->residuals.max());
    return result;
}

std::vector<double> linear_grid(double lo, double hi, int n) {
    if (n < 1) {
        throw std::invalid_argument("linear_grid: need at least one point");
    }
    std::vector<double> grid(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        grid[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    }
    return grid;
}

TensorOptimalityReport verify_tensor_optimality(Protocol protocol, int qubits, const std::vector<double>& fb_grid,
                                                const std::vector<BasisMode>& modes, int restarts,
                                                std::uint64_t seed) {
    if (modes.empty()) {
        throw std::invalid_argument("verify_tensor_optimality: no modes requested");
    }
    TensorOptimalityReport report{protocol, qubits, modes, {}};
    for (double fb : fb_grid) {
        OptimalityPoint point{fb, optimal_fe(protocol, fb), {}, true};
        for (BasisMode mode : modes) {
            OptimizationProblem problem;
            problem.protocol = protocol;
            problem.qubits = qubits;
            problem.mode = mode;
            problem.target_fb = fb;
            problem.parameterization = Parameterization::GeneralReal;
            problem.restarts = restarts;
            problem.seed = seed;
            const OptimizationResult r = optimize(problem);
            point.fe.push_back(r.fe);
            point.converged = point.converged && r.converged;
            report.max_deviation = std::max(report.max_deviation, std::abs(r.fe - point.closed_form));
        }
        const auto [lo, hi] = std::minmax_element(point.fe.begin(), point.fe.end());
        report.max_mode_gap = std::max(report.max_mode_gap, *hi - *lo);
        report.all_converged = report.all_converged && point.converged;
        report.points.push_back(std::move(point));
    }
    return report;
}

} // namespace seqclone::opt
