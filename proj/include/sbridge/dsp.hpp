// STFT analysis/synthesis, mel filterbank, phase extraction and the
// period-reshaping used by the waveform scorers.

#ifndef SBRIDGE_DSP_HPP
#define SBRIDGE_DSP_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace sbridge {

struct Waveform {
    std::vector<double> samples;
    int sample_rate = 16000;
};

struct StftConfig {
    std::size_t n_fft = 1024;  // power of two, Hann window of this length
    std::size_t hop = 256;

    void validate() const;
    std::size_t n_bins() const { return n_fft / 2 + 1; }
};

// Row-major L x F complex grid (frames by frequency bins).
struct ComplexSpectrogram {
    std::vector<std::complex<double>> data;
    std::size_t frames = 0;
    std::size_t bins = 0;

    std::complex<double>& at(std::size_t l, std::size_t f) { return data[l * bins + f]; }
    const std::complex<double>& at(std::size_t l, std::size_t f) const {
        return data[l * bins + f];
    }
};

// Real magnitude/phase grid with the same layout.
struct RealGrid {
    std::vector<double> data;
    std::size_t frames = 0;
    std::size_t bins = 0;

    double& at(std::size_t l, std::size_t f) { return data[l * bins + f]; }
    double at(std::size_t l, std::size_t f) const { return data[l * bins + f]; }
};

struct MelFilterbank {
    // F x F_mel column-major weights: weight(bin f, mel m) = data[m * bins + f].
    std::vector<double> data;
    std::size_t bins = 0;
    std::size_t n_mels = 0;

    double at(std::size_t f, std::size_t m) const { return data[m * bins + f]; }
};

// Centered STFT: the signal is reflect-padded by n_fft/2 on both sides, framed
// at hop intervals and windowed with a periodic Hann window. Requires
// len(samples) >= n_fft.
ComplexSpectrogram stft(const Waveform& wave, const StftConfig& config);

// Weighted overlap-add inverse with squared-window normalization; exact
// round-trip (up to round-off) for hop <= n_fft/2. out_len trims the result to
// the original signal length.
Waveform istft(const ComplexSpectrogram& spec, const StftConfig& config,
               std::size_t out_len, int sample_rate);

RealGrid magnitude(const ComplexSpectrogram& spec);

// Element-wise argument in (-pi, pi]; arg(0) defined as 0.
RealGrid phase(const ComplexSpectrogram& spec);

// Triangular filters evenly spaced on the HTK mel scale
// mel(f) = 2595 log10(1 + f/700) between 0 and sample_rate/2.
MelFilterbank mel_filterbank(int sample_rate, std::size_t n_fft, std::size_t n_mels);

// Apply the filterbank to a magnitude grid: (L x F) * (F x F_mel).
RealGrid apply_mel(const RealGrid& mag, const MelFilterbank& fb);

// Zero-pad to a multiple of `period` and reshape to (len/period) x period.
RealGrid mpd_reshape(const std::vector<double>& wave, std::size_t period);

}  // namespace sbridge

#endif  // SBRIDGE_DSP_HPP
