// Thresholded-singular-value rank of magnitude spectrograms and corpus-level
// rank-difference statistics.

#ifndef SBRIDGE_RANK_HPP
#define SBRIDGE_RANK_HPP

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sbridge/dsp.hpp"

namespace sbridge {

struct RankConfig {
    double eta = 0.5;        // absolute singular-value threshold
    std::size_t n_fft = 512;
    std::size_t hop = 256;

    void validate() const;
};

struct RankReport {
    std::vector<int> method_ranks;
    std::vector<int> reference_ranks;
    std::vector<int> differences;  // method - reference, per aligned pair
    double mean = 0.0;
    double median = 0.0;
    double variance = 0.0;  // population variance of the differences
};

// Count of singular values strictly greater than eta. Singular values below
// the numerical-zero level max(L,F) * s_max * machine-epsilon are treated as
// zero, so eta = 0 gives the numerical matrix rank.
int thresholded_rank(const RealGrid& magnitude_grid, double eta);

// Normalize the signal to unit RMS in the time domain, take the magnitude
// STFT at the configured resolution and threshold its singular values.
// Throws on an all-zero (silent) signal.
int rank_of_wave(const Waveform& wave, const RankConfig& config);

RankReport rank_diff_stats(const std::vector<Waveform>& method_waves,
                           const std::vector<Waveform>& reference_waves,
                           const RankConfig& config);

struct SubadditivityAudit {
    std::size_t checked = 0;
    std::size_t violations = 0;  // rank(A+B) > rank(A) + rank(B) under eta
};

// Random nonnegative low-rank instances; with eta = 0 exact-rank
// subadditivity guarantees zero violations, under a positive threshold
// violations are possible and only counted.
SubadditivityAudit subadditivity_audit(std::size_t n_instances, std::size_t rows,
                                       std::size_t cols, double eta,
                                       std::uint64_t seed);

}  // namespace sbridge

#endif  // SBRIDGE_RANK_HPP
