#include "sbridge/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sbridge {

namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

double rms(const std::vector<double>& x) {
    if (x.empty()) return 0.0;
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return std::sqrt(acc / static_cast<double>(x.size()));
}

Waveform padded_to(const Waveform& wave, std::size_t min_len) {
    if (wave.samples.size() >= min_len) return wave;
    Waveform out = wave;
    out.samples.resize(min_len, 0.0);
    return out;
}

}  // namespace

std::vector<Scorer> mpd_energy_scorers() {
    static const std::size_t periods[] = {2, 3, 5, 7, 11};
    std::vector<Scorer> scorers;
    for (std::size_t p : periods) {
        scorers.push_back([p](const Waveform& wave) {
            const RealGrid g = mpd_reshape(wave.samples, p);
            ScorerOutput out;
            std::vector<double> rows(g.frames, 0.0), cols(g.bins, 0.0);
            for (std::size_t r = 0; r < g.frames; ++r)
                for (std::size_t c = 0; c < g.bins; ++c) {
                    const double a = std::fabs(g.at(r, c));
                    rows[r] += a / static_cast<double>(g.bins);
                    cols[c] += a / static_cast<double>(std::max<std::size_t>(g.frames, 1));
                }
            out.score = 1.0 - 2.0 * rms(g.data);
            out.layers = {std::move(rows), std::move(cols)};
            return out;
        });
    }
    return scorers;
}

std::vector<Scorer> mrsd_feature_scorers() {
    struct Res { std::size_t n_fft, hop; };
    static const Res res[] = {{512, 128}, {1024, 256}, {2048, 512}};
    std::vector<Scorer> scorers;
    for (const Res& r : res) {
        scorers.push_back([r](const Waveform& wave) {
            StftConfig cfg;
            cfg.n_fft = r.n_fft;
            cfg.hop = r.hop;
            const RealGrid mag = magnitude(stft(padded_to(wave, r.n_fft), cfg));
            double mean = 0.0;
            for (double v : mag.data) mean += v;
            mean /= static_cast<double>(mag.data.size());
            ScorerOutput out;
            out.score = 1.0 - 2.0 * mean;
            out.layers = {mag.data};
            return out;
        });
    }
    return scorers;
}

std::vector<double> score_all(const std::vector<Scorer>& scorers, const Waveform& wave) {
    std::vector<double> out;
    out.reserve(scorers.size());
    for (const auto& s : scorers) out.push_back(s(wave).score);
    return out;
}

std::vector<std::vector<std::vector<double>>> features_all(
    const std::vector<Scorer>& scorers, const Waveform& wave) {
    std::vector<std::vector<std::vector<double>>> out;
    out.reserve(scorers.size());
    for (const auto& s : scorers) out.push_back(s(wave).layers);
    return out;
}

double mse_loss(const ComplexSpectrogram& est, const ComplexSpectrogram& ref) {
    if (est.frames != ref.frames || est.bins != ref.bins)
        throw std::invalid_argument("mse_loss: shape mismatch");
    if (est.data.empty()) throw std::invalid_argument("mse_loss: empty grid");
    double acc = 0.0;
    for (std::size_t i = 0; i < est.data.size(); ++i)
        acc += std::norm(est.data[i] - ref.data[i]);
    return acc / static_cast<double>(est.data.size());
}

double mel_loss(const ComplexSpectrogram& est, const ComplexSpectrogram& ref,
                const MelFilterbank& fb) {
    if (est.frames != ref.frames || est.bins != ref.bins)
        throw std::invalid_argument("mel_loss: shape mismatch");
    const RealGrid me = apply_mel(magnitude(est), fb);
    const RealGrid mr = apply_mel(magnitude(ref), fb);
    double acc = 0.0;
    for (std::size_t i = 0; i < me.data.size(); ++i)
        acc += std::fabs(me.data[i] - mr.data[i]);
    return acc / static_cast<double>(me.data.size());
}

double multi_mel_loss(const Waveform& est, const Waveform& ref,
                      const MultiMelConfig& config, int sample_rate) {
    if (est.samples.size() != ref.samples.size())
        throw std::invalid_argument("multi_mel_loss: length mismatch");
    double total = 0.0;
    for (const auto& [n_fft, n_mels] : config.scales) {
        StftConfig cfg;
        cfg.n_fft = n_fft;
        cfg.hop = std::max<std::size_t>(n_fft / 4, 1);
        const MelFilterbank fb = mel_filterbank(sample_rate, n_fft, n_mels);
        total += mel_loss(stft(est, cfg), stft(ref, cfg), fb);
    }
    return total;
}

double anti_wrap(double x) {
    return std::fabs(x - kTwoPi * std::round(x / kTwoPi));
}

PhaseLoss phase_loss(const RealGrid& est_phase, const RealGrid& ref_phase) {
    if (est_phase.frames != ref_phase.frames || est_phase.bins != ref_phase.bins)
        throw std::invalid_argument("phase_loss: shape mismatch");
    const std::size_t L = est_phase.frames, F = est_phase.bins;
    if (L == 0 || F == 0) throw std::invalid_argument("phase_loss: empty grid");
    const double norm = static_cast<double>(L * F);

    PhaseLoss out;
    for (std::size_t i = 0; i < est_phase.data.size(); ++i)
        out.ip += anti_wrap(est_phase.data[i] - ref_phase.data[i]);
    out.ip /= norm;

    for (std::size_t l = 0; l < L; ++l)
        for (std::size_t f = 0; f + 1 < F; ++f) {
            const double de = est_phase.at(l, f + 1) - est_phase.at(l, f);
            const double dr = ref_phase.at(l, f + 1) - ref_phase.at(l, f);
            out.gd += anti_wrap(de - dr);
        }
    out.gd /= norm;

    for (std::size_t l = 0; l + 1 < L; ++l)
        for (std::size_t f = 0; f < F; ++f) {
            const double de = est_phase.at(l + 1, f) - est_phase.at(l, f);
            const double dr = ref_phase.at(l + 1, f) - ref_phase.at(l, f);
            out.if_ += anti_wrap(de - dr);
        }
    out.if_ /= norm;

    out.total = out.ip + out.gd + out.if_;
    return out;
}

double hinge_d_loss(const std::vector<double>& real_scores,
                    const std::vector<double>& fake_scores) {
    if (real_scores.empty() || real_scores.size() != fake_scores.size())
        throw std::invalid_argument("hinge_d_loss: score lists empty or mismatched");
    double acc = 0.0;
    for (std::size_t q = 0; q < real_scores.size(); ++q)
        acc += std::max(0.0, 1.0 - real_scores[q]) + std::max(0.0, 1.0 + fake_scores[q]);
    return acc / static_cast<double>(real_scores.size());
}

double hinge_g_loss(const std::vector<double>& fake_scores) {
    if (fake_scores.empty()) throw std::invalid_argument("hinge_g_loss: empty score list");
    double acc = 0.0;
    for (double s : fake_scores) acc += std::max(0.0, 1.0 - s);
    return acc / static_cast<double>(fake_scores.size());
}

double feature_matching_loss(
    const std::vector<std::vector<std::vector<double>>>& est_features,
    const std::vector<std::vector<std::vector<double>>>& ref_features) {
    if (est_features.size() != ref_features.size() || est_features.empty())
        throw std::invalid_argument("feature_matching_loss: scorer count mismatch");
    double acc = 0.0;
    std::size_t n_layers = 0;
    for (std::size_t q = 0; q < est_features.size(); ++q) {
        if (est_features[q].size() != ref_features[q].size())
            throw std::invalid_argument("feature_matching_loss: layer count mismatch");
        for (std::size_t i = 0; i < est_features[q].size(); ++i) {
            const auto& fe = est_features[q][i];
            const auto& fr = ref_features[q][i];
            if (fe.size() != fr.size())
                throw std::invalid_argument("feature_matching_loss: feature shape mismatch");
            if (fe.empty()) continue;
            double layer = 0.0;
            for (std::size_t j = 0; j < fe.size(); ++j) layer += std::fabs(fe[j] - fr[j]);
            acc += layer / static_cast<double>(fe.size());
            ++n_layers;
        }
    }
    if (n_layers == 0) throw std::invalid_argument("feature_matching_loss: no features");
    return acc / static_cast<double>(n_layers);
}

double generator_loss(const LossComponents& c, const LossWeights& w) {
    const double total = c.mse + w.lambda_mel * c.mel + w.lambda_p * c.phase +
                         w.lambda_g * c.hinge_g + w.lambda_fm * c.feature_matching;
    if (!std::isfinite(total))
        throw std::invalid_argument("generator_loss: non-finite component");
    return total;
}

}  // namespace sbridge
