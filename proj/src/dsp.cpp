#include "sbridge/dsp.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace sbridge {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::vector<double> hann_periodic(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) /
                                    static_cast<double>(n));
    return w;
}

// FFTW plan creation is not thread-safe; executions on caller-owned buffers
// are. One lock shared by both transform helpers.
std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

struct FftwBuffers {
    double* real = nullptr;
    fftw_complex* cpx = nullptr;
    fftw_plan plan = nullptr;

    ~FftwBuffers() {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        if (plan) fftw_destroy_plan(plan);
        if (real) fftw_free(real);
        if (cpx) fftw_free(cpx);
    }
};

}  // namespace

void StftConfig::validate() const {
    if (!is_pow2(n_fft)) throw std::invalid_argument("stft: n_fft must be a power of two");
    if (hop == 0 || hop > n_fft)
        throw std::invalid_argument("stft: hop must lie in [1, n_fft]");
}

ComplexSpectrogram stft(const Waveform& wave, const StftConfig& config) {
    config.validate();
    const std::size_t n = wave.samples.size();
    const std::size_t n_fft = config.n_fft;
    if (n < n_fft) throw std::invalid_argument("stft: input shorter than n_fft");

    const std::size_t pad = n_fft / 2;
    std::vector<double> padded(n + 2 * pad);
    for (std::size_t i = 0; i < pad; ++i) padded[i] = wave.samples[pad - i];
    std::copy(wave.samples.begin(), wave.samples.end(), padded.begin() + pad);
    for (std::size_t i = 0; i < pad; ++i)
        padded[pad + n + i] = wave.samples[n - 2 - i];

    const std::size_t frames = 1 + (padded.size() - n_fft) / config.hop;
    const std::size_t bins = config.n_bins();
    const std::vector<double> window = hann_periodic(n_fft);

    FftwBuffers buf;
    {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        buf.real = fftw_alloc_real(n_fft);
        buf.cpx = fftw_alloc_complex(bins);
        buf.plan = fftw_plan_dft_r2c_1d(static_cast<int>(n_fft), buf.real, buf.cpx,
                                        FFTW_ESTIMATE);
    }

    ComplexSpectrogram spec;
    spec.frames = frames;
    spec.bins = bins;
    spec.data.resize(frames * bins);
    for (std::size_t l = 0; l < frames; ++l) {
        const double* src = padded.data() + l * config.hop;
        for (std::size_t i = 0; i < n_fft; ++i) buf.real[i] = src[i] * window[i];
        fftw_execute(buf.plan);
        for (std::size_t f = 0; f < bins; ++f)
            spec.at(l, f) = {buf.cpx[f][0], buf.cpx[f][1]};
    }
    return spec;
}

Waveform istft(const ComplexSpectrogram& spec, const StftConfig& config,
               std::size_t out_len, int sample_rate) {
    config.validate();
    const std::size_t n_fft = config.n_fft;
    const std::size_t bins = config.n_bins();
    if (spec.bins != bins || spec.frames == 0)
        throw std::invalid_argument("istft: spectrogram shape does not match config");

    const std::size_t total = (spec.frames - 1) * config.hop + n_fft;
    const std::vector<double> window = hann_periodic(n_fft);
    std::vector<double> acc(total, 0.0);
    std::vector<double> norm(total, 0.0);

    FftwBuffers buf;
    {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        buf.real = fftw_alloc_real(n_fft);
        buf.cpx = fftw_alloc_complex(bins);
        buf.plan = fftw_plan_dft_c2r_1d(static_cast<int>(n_fft), buf.cpx, buf.real,
                                        FFTW_ESTIMATE);
    }

    for (std::size_t l = 0; l < spec.frames; ++l) {
        for (std::size_t f = 0; f < bins; ++f) {
            buf.cpx[f][0] = spec.at(l, f).real();
            buf.cpx[f][1] = spec.at(l, f).imag();
        }
        fftw_execute(buf.plan);  // unnormalized: scale by 1/n_fft below
        double* dst = acc.data() + l * config.hop;
        double* nrm = norm.data() + l * config.hop;
        for (std::size_t i = 0; i < n_fft; ++i) {
            dst[i] += buf.real[i] / static_cast<double>(n_fft) * window[i];
            nrm[i] += window[i] * window[i];
        }
    }

    const std::size_t pad = n_fft / 2;
    if (out_len + pad > total)
        throw std::invalid_argument("istft: out_len longer than synthesized signal");
    Waveform out;
    out.sample_rate = sample_rate;
    out.samples.resize(out_len);
    for (std::size_t i = 0; i < out_len; ++i) {
        const double d = norm[pad + i];
        out.samples[i] = d > 1e-12 ? acc[pad + i] / d : 0.0;
    }
    return out;
}

RealGrid magnitude(const ComplexSpectrogram& spec) {
    RealGrid g;
    g.frames = spec.frames;
    g.bins = spec.bins;
    g.data.resize(spec.data.size());
    for (std::size_t i = 0; i < spec.data.size(); ++i) g.data[i] = std::abs(spec.data[i]);
    return g;
}

RealGrid phase(const ComplexSpectrogram& spec) {
    RealGrid g;
    g.frames = spec.frames;
    g.bins = spec.bins;
    g.data.resize(spec.data.size());
    for (std::size_t i = 0; i < spec.data.size(); ++i) {
        const auto& z = spec.data[i];
        g.data[i] = (z.real() == 0.0 && z.imag() == 0.0) ? 0.0 : std::arg(z);
    }
    return g;
}

namespace {
double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }
}  // namespace

MelFilterbank mel_filterbank(int sample_rate, std::size_t n_fft, std::size_t n_mels) {
    const std::size_t bins = n_fft / 2 + 1;
    if (sample_rate <= 0) throw std::invalid_argument("mel: sample_rate must be > 0");
    if (!is_pow2(n_fft)) throw std::invalid_argument("mel: n_fft must be a power of two");
    if (n_mels == 0 || n_mels >= bins)
        throw std::invalid_argument("mel: requires 0 < n_mels < n_fft/2 + 1");

    const double f_max = sample_rate / 2.0;
    const double mel_max = hz_to_mel(f_max);
    // n_mels triangles need n_mels + 2 edge points on the mel axis.
    std::vector<double> edges_hz(n_mels + 2);
    for (std::size_t i = 0; i < edges_hz.size(); ++i)
        edges_hz[i] = mel_to_hz(mel_max * static_cast<double>(i) /
                                static_cast<double>(n_mels + 1));

    MelFilterbank fb;
    fb.bins = bins;
    fb.n_mels = n_mels;
    fb.data.assign(bins * n_mels, 0.0);
    const double hz_per_bin = f_max / static_cast<double>(n_fft / 2);
    for (std::size_t m = 0; m < n_mels; ++m) {
        const double lo = edges_hz[m], mid = edges_hz[m + 1], hi = edges_hz[m + 2];
        for (std::size_t f = 0; f < bins; ++f) {
            const double hz = hz_per_bin * static_cast<double>(f);
            double w = 0.0;
            if (hz >= lo && hz <= mid && mid > lo)
                w = (hz - lo) / (mid - lo);
            else if (hz > mid && hz <= hi && hi > mid)
                w = (hi - hz) / (hi - mid);
            if (w > 0.0) fb.data[m * bins + f] = w;
        }
        // narrow filters can fall between bins; keep at least the center bin
        bool any = false;
        for (std::size_t f = 0; f < bins; ++f) any = any || fb.data[m * bins + f] > 0.0;
        if (!any) {
            const auto center =
                static_cast<std::size_t>(std::min(std::round(mid / hz_per_bin),
                                                  static_cast<double>(bins - 1)));
            fb.data[m * bins + center] = 1.0;
        }
    }
    return fb;
}

RealGrid apply_mel(const RealGrid& mag, const MelFilterbank& fb) {
    if (mag.bins != fb.bins)
        throw std::invalid_argument("apply_mel: filterbank does not match bin count");
    RealGrid out;
    out.frames = mag.frames;
    out.bins = fb.n_mels;
    out.data.assign(mag.frames * fb.n_mels, 0.0);
    for (std::size_t l = 0; l < mag.frames; ++l)
        for (std::size_t m = 0; m < fb.n_mels; ++m) {
            double acc = 0.0;
            const double* w = fb.data.data() + m * fb.bins;
            const double* x = mag.data.data() + l * mag.bins;
            for (std::size_t f = 0; f < fb.bins; ++f) acc += x[f] * w[f];
            out.at(l, m) = acc;
        }
    return out;
}

RealGrid mpd_reshape(const std::vector<double>& wave, std::size_t period) {
    if (period == 0) throw std::invalid_argument("mpd_reshape: period must be >= 1");
    RealGrid g;
    g.bins = period;
    g.frames = (wave.size() + period - 1) / period;
    g.data.assign(g.frames * period, 0.0);
    std::copy(wave.begin(), wave.end(), g.data.begin());
    return g;
}

}  // namespace sbridge
