#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <stdexcept>

#include <CLI11.hpp>

#include "seqclone/cli.hpp"
#include "seqclone/cloner.hpp"
#include "seqclone/curves.hpp"
#include "seqclone/infotheory.hpp"
#include "seqclone/lagrangian.hpp"
#include "seqclone/optimizer.hpp"
#include "seqclone/qkit.hpp"
#include "seqclone/simulator.hpp"

namespace seqclone::cli {

namespace {

enum class Format { Csv, Json };

struct CommonOptions {
    std::string protocol = "bb84";
    int qubits = 1;
    std::string mode = "correlated";
    std::string format = "csv";
    std::string out_path;
};

struct ExitStatus {
    int code = 0;
};

void emit(const OutputRecord& record, const CommonOptions& common, std::ostream& out) {
    const std::string text = common.format == "json" ? to_json(record) : to_csv(record);
    if (common.out_path.empty()) {
        out << text;
        return;
    }
    std::ofstream file(common.out_path, std::ios::binary);
    if (!file) {
        throw std::runtime_error("cannot open output file '" + common.out_path + "'");
    }
    file << text;
    if (!file) {
        throw std::runtime_error("failed writing output file '" + common.out_path + "'");
    }
}

OutputRecord make_record(std::string command, const CommonOptions& common) {
    OutputRecord r;
    r.command = std::move(command);
    r.parameters.emplace_back("protocol", common.protocol);
    return r;
}

// --- threshold -------------------------------------------------------------------

int cmd_threshold(const CommonOptions& common, std::ostream& out) {
    const Protocol protocol = parse_protocol(common.protocol);
    OutputRecord record = make_record("threshold", common);
    record.columns = {"protocol", "threshold"};
    record.add_row({common.protocol, info::threshold(protocol)});
    emit(record, common, out);
    return 0;
}

// --- sweep -------------------------------------------------------------------------

struct SweepOptions {
    std::optional<double> from;
    double to = 1.0;
    double step = 0.05;
};

std::vector<double> sweep_grid(double from, double to, double step) {
    if (!(step > 0.0) || !(to >= from)) {
        throw std::invalid_argument("sweep: empty range (need --step > 0 and --to >= --from)");
    }
    const auto count = static_cast<long>(std::floor((to - from) / step + 1e-9)) + 1;
    std::vector<double> grid;
    for (long i = 0; i < count; ++i) {
        grid.push_back(std::min(from + static_cast<double>(i) * step, to));
    }
    return grid;
}

int cmd_sweep(const CommonOptions& common, const SweepOptions& opts, std::ostream& out) {
    const Protocol protocol = parse_protocol(common.protocol);
    const double from = opts.from.value_or(opt::min_bob_fidelity(protocol));
    const std::vector<double> grid = sweep_grid(from, opts.to, opts.step);
    for (double fb : grid) {
        if (!opt::in_fidelity_domain(protocol, fb)) {
            throw std::invalid_argument("sweep: F_B = " + format_real(fb) + " outside the " + common.protocol +
                                        " fidelity domain");
        }
    }

    OutputRecord record = make_record("sweep", common);
    record.parameters.emplace_back("n", std::to_string(common.qubits));
    record.parameters.emplace_back("mode", common.mode);
    record.parameters.emplace_back("from", format_real(from));
    record.parameters.emplace_back("to", format_real(opts.to));
    record.parameters.emplace_back("step", format_real(opts.step));
    record.columns = {"F_B", "F_E", "I_AB", "I_AE", "rate"};
    for (double fb : grid) {
        // Eve's fidelity comes from the explicit N-qubit product cloner rather
        // than the closed-form curve.
        const auto a = cloner::product_ansatz(protocol, fb, common.qubits);
        const double fe = std::clamp(cloner::mean_qubit_fidelity(a, protocol, Clone::E), 0.0, 1.0);
        const double i_ab = info::info_ab(fb);
        const double i_ae = protocol == Protocol::BB84 ? info::info_ae_bb84(fe) : info::info_ae_six(fb, fe);
        record.add_row({fb, fe, i_ab, i_ae, info::ck_rate(i_ab, i_ae, i_ae)});
    }
    emit(record, common, out);
    return 0;
}

// --- optimize ---------------------------------------------------------------------

struct OptimizeOptions {
    std::optional<double> fb;
    std::string parameterization = "general-real";
    std::uint64_t seed = 0;
    int restarts = 32;
    bool amplitudes = false;
};

std::string bit_string(Eigen::Index value, int width) {
    std::string s(static_cast<std::size_t>(width), '0');
    for (int i = 0; i < width; ++i) {
        if ((value >> (width - 1 - i)) & 1) {
            s[static_cast<std::size_t>(i)] = '1';
        }
    }
    return s;
}

int cmd_optimize(const CommonOptions& common, const OptimizeOptions& opts, std::ostream& out, std::ostream& err) {
    opt::OptimizationProblem problem;
    problem.protocol = parse_protocol(common.protocol);
    problem.qubits = common.qubits;
    problem.mode = parse_mode(common.mode);
    problem.target_fb = *opts.fb;
    problem.parameterization = opt::parse_parameterization(opts.parameterization);
    problem.seed = opts.seed;
    problem.restarts = opts.restarts;

    const opt::OptimizationResult result = opt::optimize(problem);
    if (result.status == opt::OptimizationStatus::Infeasible) {
        err << result.message << '\n';
        return 2;
    }

    OutputRecord record = make_record("optimize", common);
    record.parameters.emplace_back("n", std::to_string(common.qubits));
    record.parameters.emplace_back("mode", common.mode);
    record.parameters.emplace_back("fb", format_real(problem.target_fb));
    record.parameters.emplace_back("parameterization", opts.parameterization);
    record.parameters.emplace_back("seed", std::to_string(opts.seed));
    record.parameters.emplace_back("restarts", std::to_string(opts.restarts));

    if (opts.amplitudes) {
        record.columns = {"m", "n", "a"};
        const auto& a = *result.a;
        for (Eigen::Index m = 0; m < a.dim(); ++m) {
            for (Eigen::Index n = 0; n < a.dim(); ++n) {
                record.add_row({bit_string(m, a.qubits()), bit_string(n, a.qubits()), a(m, n).real()});
            }
        }
    } else {
        const double closed = opt::optimal_fe(problem.protocol, problem.target_fb);
        record.columns = {"status",         "F_B_target",           "F_B_achieved",    "F_E",
                          "F_E_closed_form", "deviation",           "normalization_residual",
                          "target_residual", "eve_spread",          "bob_spread",      "stationarity",
                          "restarts_used"};
        const auto& r = result.constraint_residuals;
        record.add_row({std::string(opt::to_string(result.status)), problem.target_fb, result.fb_achieved, result.fe,
                        closed, result.fe - closed, r[0], r[1], r[2], r[3], result.stationarity,
                        static_cast<std::int64_t>(result.restarts_used)});
    }
    emit(record, common, out);
    if (!result.converged) {
        err << result.message << '\n';
        return 1;
    }
    return 0;
}

// --- simulate ---------------------------------------------------------------------

struct SimulateOptions {
    std::optional<double> fb;
    std::uint64_t rounds = 100000;
    std::uint64_t seed = 0;
};

int cmd_simulate(const CommonOptions& common, const SimulateOptions& opts, std::ostream& out) {
    if (opts.rounds == 0) {
        throw std::invalid_argument("simulate: --rounds must be at least 1");
    }
    const Protocol protocol = parse_protocol(common.protocol);
    const auto config =
        sim::closed_form_config(protocol, common.qubits, parse_mode(common.mode), *opts.fb, opts.rounds, opts.seed);
    const auto rows = sim::empirical_vs_analytic(config);

    OutputRecord record = make_record("simulate", common);
    record.parameters.emplace_back("n", std::to_string(common.qubits));
    record.parameters.emplace_back("mode", common.mode);
    record.parameters.emplace_back("fb", format_real(*opts.fb));
    record.parameters.emplace_back("rounds", std::to_string(opts.rounds));
    record.parameters.emplace_back("seed", std::to_string(opts.seed));
    record.columns = {"quantity", "empirical", "std_error", "analytic", "z"};
    for (const auto& r : rows) {
        record.add_row({r.quantity, r.empirical, r.std_error, r.analytic, r.z});
    }
    emit(record, common, out);
    return 0;
}

// --- verify -----------------------------------------------------------------------

struct VerifyOptions {
    std::string suite = "all";
    std::optional<int> qubits;
    int grid_points = 11;
    int restarts = 32;
    bool tamper = false;
};

class CheckTable {
  public:
    explicit CheckTable(OutputRecord& record) : record_(record) {
        record_.columns = {"check", "value", "tolerance", "relation", "status"};
    }

    void at_most(const std::string& name, double value, double tol) { add(name, value, tol, "<=", value <= tol); }
    void at_least(const std::string& name, double value, double tol) { add(name, value, tol, ">=", value >= tol); }

    bool all_passed() const { return failures_ == 0; }

  private:
    void add(const std::string& name, double value, double tol, const char* relation, bool ok) {
        if (!std::isfinite(value)) {
            ok = false;
            value = 1e300;
        }
        record_.add_row({name, value, tol, std::string(relation), std::string(ok ? "PASS" : "FAIL")});
        failures_ += ok ? 0 : 1;
    }

    OutputRecord& record_;
    int failures_ = 0;
};

constexpr double kTamperShift = 1e-3;
const std::vector<double> kCheckFidelities = {0.8, 0.8536, 0.9};

std::string label(Protocol p, int n, double fb) {
    return std::string("[") + std::string(to_string(p)) + "/N=" + std::to_string(n) + "/F_B=" + format_real(fb) + "]";
}

opt::TensorCoefficients check_coefficients(Protocol protocol, double fb, bool tamper) {
    opt::TensorCoefficients c = opt::optimal_tensor_coefficients(protocol, fb);
    if (tamper) {
        c.v += kTamperShift;
        const double norm = std::sqrt(c.v * c.v + 2 * c.x * c.x + c.y * c.y);
        c = {c.v / norm, c.x / norm, c.y / norm};
    }
    return c;
}

void ansatz_suite(CheckTable& table, int max_qubits, bool tamper) {
    for (Protocol protocol : {Protocol::BB84, Protocol::SixState}) {
        for (int n = 1; n <= max_qubits; ++n) {
            for (BasisMode mode : {BasisMode::Independent, BasisMode::Correlated}) {
                const auto ensemble = qkit::enumerate_ensemble(protocol, n, mode);
                double bob_dev = 0.0;
                double eve_dev = 0.0;
                double spread = 0.0;
                double identity = 0.0;
                for (double fb : kCheckFidelities) {
                    const auto a = opt::tensor_cloner(check_coefficients(protocol, fb, tamper), n);
                    const auto bob = cloner::fidelity_report(a, ensemble, Clone::B);
                    const auto eve = cloner::fidelity_report(a, ensemble, Clone::E);
                    bob_dev = std::max(bob_dev, std::abs(bob.average_fidelity - fb));
                    eve_dev = std::max(eve_dev, std::abs(eve.average_fidelity - opt::optimal_fe(protocol, fb)));
                    spread = std::max({spread, bob.spread, eve.spread});
                    for (const auto* report : {&bob, &eve}) {
                        for (const auto& entry : report->entries) {
                            for (std::size_t q = 0; q < entry.per_qubit_fidelity.size(); ++q) {
                                identity = std::max(identity, std::abs(entry.per_qubit_fidelity[q] - entry.full_fidelity -
                                                                       entry.per_qubit_disturbance[q]));
                            }
                        }
                    }
                }
                const std::string tag = std::string("[") + std::string(to_string(protocol)) +
                                        "/N=" + std::to_string(n) + "/" + std::string(to_string(mode)) + "]";
                table.at_most("ansatz.bob_fidelity" + tag, bob_dev, 1e-12);
                table.at_most("ansatz.eve_fidelity" + tag, eve_dev, 1e-12);
                table.at_most("ansatz.equal_fidelity_spread" + tag, spread, 1e-12);
                table.at_most("ansatz.disturbance_identity" + tag, identity, 1e-12);
            }
        }
    }
}

void lagrangian_suite(CheckTable& table, const std::vector<int>& sizes, bool tamper) {
    for (int n : sizes) {
        for (Protocol protocol : {Protocol::BB84, Protocol::SixState}) {
            for (double fb : kCheckFidelities) {
                const auto c = check_coefficients(protocol, fb, tamper);
                const std::string tag = label(protocol, n, fb);
                table.at_most("lagrangian.printed" + tag, opt::printed_lagrangian_fit(protocol, n, c).residual, 1e-8);
                if (protocol == Protocol::BB84) {
                    const auto moved = opt::perturb_on_constraint_curve(c, -0.05);
                    table.at_least("lagrangian.printed_perturbed" + tag,
                                   opt::printed_lagrangian_fit(protocol, n, moved).residual, 1e-3);
                }
                const auto a = opt::tensor_cloner(c, n);
                table.at_most("lagrangian.kkt" + tag, opt::kkt_residual(a, protocol), 1e-8);

                const opt::CloningObjective objective(protocol, n, BasisMode::Correlated, fb);
                Eigen::VectorXd flat(a.dim() * a.dim());
                for (Eigen::Index m = 0; m < a.dim(); ++m) {
                    for (Eigen::Index k = 0; k < a.dim(); ++k) {
                        flat[m * a.dim() + k] = a(m, k).real();
                    }
                }
                if (!tamper) {
                    const Eigen::VectorXd moved = opt::perturbed_feasible_point(objective, flat, 0.05, 1);
                    table.at_least("lagrangian.kkt_perturbed" + tag, objective.kkt_residual(moved), 1e-3);
                }
            }
        }
    }
}

void optimality_suite(CheckTable& table, int n, int grid_points, int restarts) {
    const auto grid = opt::linear_grid(0.75, 0.95, grid_points);
    for (Protocol protocol : {Protocol::BB84, Protocol::SixState}) {
        const auto report = opt::verify_tensor_optimality(protocol, n, grid,
                                                          {BasisMode::Independent, BasisMode::Correlated}, restarts);
        const std::string tag = std::string("[") + std::string(to_string(protocol)) + "/N=" + std::to_string(n) + "]";
        table.at_most("optimality.max_deviation" + tag, report.max_deviation, 1e-5);
        table.at_most("optimality.mode_gap" + tag, report.max_mode_gap, 1e-8);
        table.at_least("optimality.converged" + tag, report.all_converged ? 1.0 : 0.0, 1.0);
    }
}

int cmd_verify(const CommonOptions& common, const VerifyOptions& opts, std::ostream& out, std::ostream& err) {
    OutputRecord record;
    record.command = "verify";
    record.parameters.emplace_back("suite", opts.suite);
    if (opts.qubits) {
        record.parameters.emplace_back("n", std::to_string(*opts.qubits));
    }
    record.parameters.emplace_back("grid_points", std::to_string(opts.grid_points));
    record.parameters.emplace_back("restarts", std::to_string(opts.restarts));
    if (opts.tamper) {
        record.parameters.emplace_back("tamper", "true");
    }
    CheckTable table(record);

    const bool all = opts.suite == "all";
    if (all || opts.suite == "ansatz") {
        ansatz_suite(table, opts.qubits.value_or(2), opts.tamper);
    }
    if (all || opts.suite == "optimality") {
        const int n = opts.qubits.value_or(2);
        optimality_suite(table, n, opts.grid_points, opts.restarts);
        lagrangian_suite(table, {n}, opts.tamper);
    }
    if (all || opts.suite == "lagrangian") {
        const std::vector<int> sizes = opts.qubits ? std::vector<int>{*opts.qubits} : std::vector<int>{2, 3};
        lagrangian_suite(table, sizes, opts.tamper);
    }
    emit(record, common, out);
    if (!table.all_passed()) {
        err << "verify: one or more checks FAILED\n";
        return 1;
    }
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sequence cloning attacks on BB84 and six-state key distribution"};
    app.require_subcommand(1);

    CommonOptions common;
    const auto add_format = [&common](CLI::App* sub) {
        sub->add_option("--format", common.format, "Output format")
            ->check(CLI::IsMember({"csv", "json"}))
            ->capture_default_str();
        sub->add_option("--out", common.out_path, "Output file (default: standard output)");
    };
    const auto add_protocol = [&common](CLI::App* sub) {
        sub->add_option("--protocol", common.protocol, "bb84 or six-state")
            ->check(CLI::IsMember({"bb84", "six-state"}))
            ->capture_default_str();
    };
    const auto add_sequence = [&common](CLI::App* sub, int max_qubits) {
        sub->add_option("--n", common.qubits, "Qubits per sequence")
            ->check(CLI::Range(1, max_qubits))
            ->capture_default_str();
        sub->add_option("--mode", common.mode, "independent or correlated")
            ->check(CLI::IsMember({"independent", "correlated"}))
            ->capture_default_str();
    };

    CLI::App* threshold = app.add_subcommand("threshold", "Bob fidelity where I_AB = I_AE");
    add_protocol(threshold);
    add_format(threshold);

    SweepOptions sweep_opts;
    CLI::App* sweep = app.add_subcommand("sweep", "Fidelity and information curves over a F_B grid");
    add_protocol(sweep);
    add_sequence(sweep, cloner::kMaxTensorQubits);
    sweep->add_option("--from", sweep_opts.from, "First F_B (default: lower end of the domain)");
    sweep->add_option("--to", sweep_opts.to, "Last F_B")->capture_default_str();
    sweep->add_option("--step", sweep_opts.step, "Grid step")->capture_default_str();
    add_format(sweep);

    OptimizeOptions optimize_opts;
    CLI::App* optimize = app.add_subcommand("optimize", "Numerically maximize Eve's fidelity at fixed F_B");
    add_protocol(optimize);
    add_sequence(optimize, cloner::kMaxTensorQubits);
    optimize->add_option("--fb", optimize_opts.fb, "Target Bob fidelity")->required();
    optimize->add_option("--parameterization", optimize_opts.parameterization, "general-real or tensor-power")
        ->check(CLI::IsMember({"general-real", "tensor-power"}))
        ->capture_default_str();
    optimize->add_option("--seed", optimize_opts.seed, "Seed for the starting points")->capture_default_str();
    optimize->add_option("--restarts", optimize_opts.restarts, "Number of starting points")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    optimize->add_flag("--amplitudes", optimize_opts.amplitudes, "Print the amplitude table instead of the summary");
    add_format(optimize);

    SimulateOptions simulate_opts;
    CLI::App* simulate = app.add_subcommand("simulate", "Monte-Carlo protocol rounds against the optimal cloner");
    add_protocol(simulate);
    add_sequence(simulate, cloner::kMaxTensorQubits);
    simulate->add_option("--fb", simulate_opts.fb, "Bob fidelity of the cloner")->required();
    simulate->add_option("--rounds", simulate_opts.rounds, "Protocol rounds")->capture_default_str();
    simulate->add_option("--seed", simulate_opts.seed, "Random seed")->capture_default_str();
    add_format(simulate);

    VerifyOptions verify_opts;
    CLI::App* verify = app.add_subcommand("verify", "Run the consistency checks");
    verify->add_option("--suite", verify_opts.suite, "ansatz, optimality, lagrangian or all")
        ->check(CLI::IsMember({"ansatz", "optimality", "lagrangian", "all"}))
        ->capture_default_str();
    verify->add_option("--n", verify_opts.qubits, "Sequence length for the checks")->check(CLI::Range(1, 3));
    verify->add_option("--grid-points", verify_opts.grid_points, "F_B grid size for the optimality suite")
        ->check(CLI::Range(1, 1000))
        ->capture_default_str();
    verify->add_option("--restarts", verify_opts.restarts, "Starting points per optimization")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    // negative control: shifts the cloner coefficients so the checks must fail
    verify->add_flag("--tamper", verify_opts.tamper)->group("");
    add_format(verify);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (threshold->parsed()) {
            return cmd_threshold(common, out);
        }
        if (sweep->parsed()) {
            return cmd_sweep(common, sweep_opts, out);
        }
        if (optimize->parsed()) {
            return cmd_optimize(common, optimize_opts, out, err);
        }
        if (simulate->parsed()) {
            return cmd_simulate(common, simulate_opts, out);
        }
        if (verify->parsed()) {
            return cmd_verify(common, verify_opts, out, err);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

} // namespace seqclone::cli
