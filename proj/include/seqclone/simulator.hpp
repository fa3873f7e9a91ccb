// Monte-Carlo rounds of the prepare-and-measure protocol with Eve's cloner
// realized as two independently sampled Pauli channels: Bob's clone sees
// error patterns drawn from |b|^2 and Eve's from |a|^2. Joint correlations
// between the two clones are not modelled.
//
// Random numbers: the rounds are cut into chunks of kChunkRounds; chunk c uses
// std::mt19937_64 seeded with std::seed_seq{seed_lo, seed_hi, c}, where
// seed_lo/seed_hi are the low and high 32 bits of the seed. Uniform doubles
// take the top 53 bits of one draw. Tallies are integers, so merging chunks
// in any order gives the same report.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "seqclone/cloner.hpp"
#include "seqclone/types.hpp"

namespace seqclone::sim {

inline constexpr std::uint64_t kChunkRounds = 8192;

struct SimConfig {
    Protocol protocol = Protocol::BB84;
    int qubits = 1;
    BasisMode mode = BasisMode::Correlated;
    cloner::AmplitudeMatrix cloner = cloner::AmplitudeMatrix::identity(1);
    std::uint64_t rounds = 1;
    std::uint64_t seed = 0;
};

/// Config for the protocol's closed-form optimal cloner at Bob fidelity fb.
SimConfig closed_form_config(Protocol protocol, int qubits, BasisMode mode, double fb, std::uint64_t rounds,
                             std::uint64_t seed);

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
};

/// Binomial estimate from `hits` out of `trials`; the standard error is
/// sqrt(F(1-F)/n) floored at 0.5/n, and zero trials give 0.5 +- 0.5.
Estimate binomial_estimate(std::uint64_t hits, std::uint64_t trials);

struct SimReport {
    Estimate fb;
    Estimate fe;
    double qber = 0.0;
    std::uint64_t rounds = 0;
    // qubit positions where Bob's basis matched Alice's
    std::uint64_t sifted_bits = 0;
    std::vector<std::uint64_t> sifted_by_position;
    std::vector<Estimate> fb_by_position;
    std::vector<Estimate> fe_by_position;
};

/// Throws std::invalid_argument for rounds == 0 or a cloner whose qubit count
/// differs from config.qubits.
SimReport run(const SimConfig& config);

struct ComparisonRow {
    std::string quantity;
    double empirical;
    double std_error;
    double analytic;
    double z;
};

/// Runs the simulation and sets each empirical fidelity beside the ensemble
/// average from cloner::fidelity_report. z uses the binomial standard error of
/// the analytic value over the same number of trials.
std::vector<ComparisonRow> empirical_vs_analytic(const SimConfig& config);

/// Pattern index m * 2^N + n drawn from the given weights with one uniform
/// double; exposed for distribution tests.
class PatternSampler {
  public:
    explicit PatternSampler(const Eigen::MatrixXd& weights);
    std::uint32_t sample(double uniform) const;
    std::size_t size() const { return cumulative_.size(); }

  private:
    std::vector<double> cumulative_;
};

/// Top 53 bits of one 64-bit draw as a double in [0, 1).
double uniform_from_bits(std::uint64_t bits);

} // namespace seqclone::sim
