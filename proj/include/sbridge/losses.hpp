// Loss suite over spectrograms, waveforms and pluggable waveform scorers:
// complex MSE, mel and multi-scale mel, anti-wrapping phase losses, hinge
// adversarial losses and feature matching, plus their weighted combination.
//
// Scorers stand in for discriminator networks: deterministic maps from a
// waveform to a scalar score and per-layer feature vectors, so the adversarial
// and feature-matching losses are executable without any training.

#ifndef SBRIDGE_LOSSES_HPP
#define SBRIDGE_LOSSES_HPP

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "sbridge/dsp.hpp"

namespace sbridge {

struct LossWeights {
    double lambda_mel = 0.1;
    double lambda_p = 0.01;
    double lambda_g = 10.0;
    double lambda_fm = 10.0;
};

struct MultiMelConfig {
    // (n_fft, n_mels) per scale; window = n_fft, hop = n_fft/4.
    std::vector<std::pair<std::size_t, std::size_t>> scales = {
        {32, 5}, {64, 10}, {128, 20}, {256, 40}, {512, 80}, {1024, 160}, {2048, 210}};
};

struct ScorerOutput {
    double score = 0.0;
    std::vector<std::vector<double>> layers;
};

// One sub-scorer of a discriminator family.
using Scorer = std::function<ScorerOutput(const Waveform&)>;

// Period-reshaping energy scorers, one per period in {2, 3, 5, 7, 11}.
// Layers: per-row and per-column mean absolute value of the reshaped grid.
std::vector<Scorer> mpd_energy_scorers();

// Multi-resolution spectrogram scorers at (512,128,512), (1024,256,1024),
// (2048,512,2048) as {n_fft, hop, window}. One layer per scorer: the
// flattened magnitude grid.
std::vector<Scorer> mrsd_feature_scorers();

std::vector<double> score_all(const std::vector<Scorer>& scorers, const Waveform& wave);
std::vector<std::vector<std::vector<double>>> features_all(
    const std::vector<Scorer>& scorers, const Waveform& wave);

// (1/LF) sum |est - ref|^2 over complex entries.
double mse_loss(const ComplexSpectrogram& est, const ComplexSpectrogram& ref);

// (1/(L F_mel)) sum |mel(est) - mel(ref)| with mel(X) = |X| A.
double mel_loss(const ComplexSpectrogram& est, const ComplexSpectrogram& ref,
                const MelFilterbank& fb);

// Sum of mel losses over the configured scales, each at its own STFT size.
double multi_mel_loss(const Waveform& est, const Waveform& ref,
                      const MultiMelConfig& config, int sample_rate);

// |x - 2 pi round(x / 2 pi)|: 2-pi-periodic, even, range [0, pi].
double anti_wrap(double x);

struct PhaseLoss {
    double total = 0.0;
    double ip = 0.0;  // instantaneous phase
    double gd = 0.0;  // group delay (frequency-axis differences)
    double if_ = 0.0; // instantaneous frequency (time-axis differences)
};

// Anti-wrapped L1 phase losses; differences are forward first differences
// dropping the last index along the differenced axis, all normalized by L*F.
PhaseLoss phase_loss(const RealGrid& est_phase, const RealGrid& ref_phase);

// (1/Q) sum max(0, 1 - D(x)) + max(0, 1 + D(x~)).
double hinge_d_loss(const std::vector<double>& real_scores,
                    const std::vector<double>& fake_scores);

// (1/Q) sum max(0, 1 - D(x~)).
double hinge_g_loss(const std::vector<double>& fake_scores);

// Mean absolute feature difference averaged over all (scorer, layer) pairs.
double feature_matching_loss(
    const std::vector<std::vector<std::vector<double>>>& est_features,
    const std::vector<std::vector<std::vector<double>>>& ref_features);

struct LossComponents {
    double mse = 0.0;
    double mel = 0.0;
    double phase = 0.0;
    double hinge_g = 0.0;
    double feature_matching = 0.0;
};

// mse + lambda_mel * mel + lambda_p * phase + lambda_g * g + lambda_fm * fm.
double generator_loss(const LossComponents& components, const LossWeights& weights);

}  // namespace sbridge

#endif  // SBRIDGE_LOSSES_HPP
