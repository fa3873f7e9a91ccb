#include "seqclone/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "seqclone/qkit.hpp"

namespace seqclone::sim {

namespace {

struct Tally {
    std::uint64_t sifted = 0;
    std::uint64_t bob_hits = 0;
    std::uint64_t eve_hits = 0;
    std::vector<std::uint64_t> sifted_at;
    std::vector<std::uint64_t> bob_hits_at;
    std::vector<std::uint64_t> eve_hits_at;

    explicit Tally(int qubits)
        : sifted_at(static_cast<std::size_t>(qubits)), bob_hits_at(static_cast<std::size_t>(qubits)),
          eve_hits_at(static_cast<std::size_t>(qubits)) {}
};

// floor(u * count) for a uniform u in [0, 1)
int draw_index(std::mt19937_64& rng, int count) {
    return std::min(count - 1, static_cast<int>(uniform_from_bits(rng()) * count));
}

void draw_bases(std::mt19937_64& rng, std::span<const Basis> bases, BasisMode mode, std::vector<Basis>& out) {
    const int nb = static_cast<int>(bases.size());
    if (mode == BasisMode::Correlated) {
        std::fill(out.begin(), out.end(), bases[static_cast<std::size_t>(draw_index(rng, nb))]);
        return;
    }
    for (auto& b : out) {
        b = bases[static_cast<std::size_t>(draw_index(rng, nb))];
    }
}

} // namespace

double uniform_from_bits(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

PatternSampler::PatternSampler(const Eigen::MatrixXd& weights) {
    const Eigen::Index d = weights.rows();
    cumulative_.reserve(static_cast<std::size_t>(weights.size()));
    double acc = 0.0;
    for (Eigen::Index m = 0; m < d; ++m) {
        for (Eigen::Index n = 0; n < weights.cols(); ++n) {
            const double w = weights(m, n);
            if (w < 0.0) {
                throw std::invalid_argument("PatternSampler: negative weight");
            }
            acc += w;
            cumulative_.push_back(acc);
        }
    }
    if (!(acc > 0.0)) {
        throw std::invalid_argument("PatternSampler: weights sum to zero");
    }
    for (double& c : cumulative_) {
        c /= acc;
    }
    cumulative_.back() = 1.0;
}

std::uint32_t PatternSampler::sample(double uniform) const {
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), uniform);
    const auto idx = static_cast<std::size_t>(it - cumulative_.begin());
    return static_cast<std::uint32_t>(std::min(idx, cumulative_.size() - 1));
}

Estimate binomial_estimate(std::uint64_t hits, std::uint64_t trials) {
    if (trials == 0) {
        return {0.5, 0.5};
    }
    const double n = static_cast<double>(trials);
    const double f = static_cast<double>(hits) / n;
    return {f, std::max(std::sqrt(f * (1.0 - f) / n), 0.5 / n)};
}

SimConfig closed_form_config(Protocol protocol, int qubits, BasisMode mode, double fb, std::uint64_t rounds,
                             std::uint64_t seed) {
    return SimConfig{protocol, qubits, mode, cloner::product_ansatz(protocol, fb, qubits), rounds, seed};
}

SimReport run(const SimConfig& config) {
    if (config.rounds == 0) {
        throw std::invalid_argument("simulate: rounds must be at least 1");
    }
    if (config.cloner.qubits() != config.qubits) {
        throw std::invalid_argument("simulate: cloner acts on " + std::to_string(config.cloner.qubits()) +
                                    " qubits but the sequence has " + std::to_string(config.qubits));
    }
    const int nq = config.qubits;
    const Eigen::Index d = config.cloner.dim();
    const PatternSampler eve(config.cloner.weights());
    const PatternSampler bob(cloner::fourier_dual(config.cloner).weights());
    const auto bases = protocol_bases(config.protocol);

    Tally tally(nq);
    std::vector<Basis> alice_bases(static_cast<std::size_t>(nq));
    std::vector<Basis> bob_bases(static_cast<std::size_t>(nq));
    std::vector<int> bits(static_cast<std::size_t>(nq));

    const std::uint64_t chunks = (config.rounds + kChunkRounds - 1) / kChunkRounds;
    for (std::uint64_t chunk = 0; chunk < chunks; ++chunk) {
        std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                          static_cast<std::uint32_t>(chunk), static_cast<std::uint32_t>(chunk >> 32)};
        std::mt19937_64 rng(seq);
        const std::uint64_t begin = chunk * kChunkRounds;
        const std::uint64_t end = std::min(config.rounds, begin + kChunkRounds);
        for (std::uint64_t round = begin; round < end; ++round) {
            draw_bases(rng, bases, config.mode, alice_bases);
            draw_bases(rng, bases, config.mode, bob_bases);
            for (int& b : bits) {
                b = static_cast<int>(rng() >> 63);
            }
            const std::uint32_t ke = eve.sample(uniform_from_bits(rng()));
            const std::uint32_t kb = bob.sample(uniform_from_bits(rng()));
            const auto me = static_cast<std::uint32_t>(ke / d);
            const auto ne = static_cast<std::uint32_t>(ke % d);
            const auto mb = static_cast<std::uint32_t>(kb / d);
            const auto nb = static_cast<std::uint32_t>(kb % d);

            for (int q = 0; q < nq; ++q) {
                const auto qs = static_cast<std::size_t>(q);
                if (bob_bases[qs] != alice_bases[qs]) {
                    continue;
                }
                const int shift = nq - 1 - q;
                const Basis basis = alice_bases[qs];
                // an error pattern outside the basis's stabilizer flips the outcome
                const int bob_flip =
                    cloner::basis_delta(basis, static_cast<int>((mb >> shift) & 1U), static_cast<int>((nb >> shift) & 1U))
                        ? 0
                        : 1;
                const int eve_flip =
                    cloner::basis_delta(basis, static_cast<int>((me >> shift) & 1U), static_cast<int>((ne >> shift) & 1U))
                        ? 0
                        : 1;
                const int bob_bit = bits[qs] ^ bob_flip;
                const int eve_guess = bits[qs] ^ eve_flip;
                ++tally.sifted;
                ++tally.sifted_at[qs];
                if (bob_bit == bits[qs]) {
                    ++tally.bob_hits;
                    ++tally.bob_hits_at[qs];
                }
                if (eve_guess == bits[qs]) {
                    ++tally.eve_hits;
                    ++tally.eve_hits_at[qs];
                }
            }
        }
    }

    SimReport report;
    report.rounds = config.rounds;
    report.sifted_bits = tally.sifted;
    report.fb = binomial_estimate(tally.bob_hits, tally.sifted);
    report.fe = binomial_estimate(tally.eve_hits, tally.sifted);
    report.qber = tally.sifted == 0 ? 0.5
                                    : static_cast<double>(tally.sifted - tally.bob_hits) /
                                          static_cast<double>(tally.sifted);
    for (int q = 0; q < nq; ++q) {
        const auto qs = static_cast<std::size_t>(q);
        report.sifted_by_position.push_back(tally.sifted_at[qs]);
        report.fb_by_position.push_back(binomial_estimate(tally.bob_hits_at[qs], tally.sifted_at[qs]));
        report.fe_by_position.push_back(binomial_estimate(tally.eve_hits_at[qs], tally.sifted_at[qs]));
    }
    return report;
}

std::vector<ComparisonRow> empirical_vs_analytic(const SimConfig& config) {
    const SimReport report = run(config);
    const auto ensemble = qkit::enumerate_ensemble(config.protocol, config.qubits, config.mode);
    const auto bob = cloner::fidelity_report(config.cloner, ensemble, Clone::B);
    const auto eve = cloner::fidelity_report(config.cloner, ensemble, Clone::E);

    const auto position_mean = [](const cloner::EnsembleFidelityReport& r, int q) {
        double acc = 0.0;
        for (const auto& e : r.entries) {
            acc += e.per_qubit_fidelity[static_cast<std::size_t>(q)];
        }
        return acc / static_cast<double>(r.entries.size());
    };
    const auto row = [](std::string name, const Estimate& est, double analytic, std::uint64_t trials) {
        const double n = static_cast<double>(trials);
        const double se = trials == 0 ? 0.5 : std::max(std::sqrt(analytic * (1.0 - analytic) / n), 0.5 / n);
        return ComparisonRow{std::move(name), est.value, est.std_error, analytic, (est.value - analytic) / se};
    };

    std::vector<ComparisonRow> rows;
    rows.push_back(row("F_B", report.fb, bob.average_fidelity, report.sifted_bits));
    rows.push_back(row("F_E", report.fe, eve.average_fidelity, report.sifted_bits));
    rows.push_back(row("QBER", {report.qber, report.fb.std_error}, 1.0 - bob.average_fidelity, report.sifted_bits));
    for (int q = 0; q < config.qubits; ++q) {
        const auto qs = static_cast<std::size_t>(q);
        const std::string suffix = "[" + std::to_string(q) + "]";
        const std::uint64_t trials = report.sifted_by_position[qs];
        rows.push_back(row("F_B" + suffix, report.fb_by_position[qs], position_mean(bob, q), trials));
        rows.push_back(row("F_E" + suffix, report.fe_by_position[qs], position_mean(eve, q), trials));
    }
    return rows;
}

} // namespace seqclone::sim
