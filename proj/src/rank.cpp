#include "sbridge/rank.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sbridge/rng.hpp"

namespace sbridge {

void RankConfig::validate() const {
    if (!(eta >= 0.0)) throw std::invalid_argument("rank: eta must be >= 0");
    StftConfig cfg;
    cfg.n_fft = n_fft;
    cfg.hop = hop;
    cfg.validate();
}

namespace {

Eigen::VectorXd singular_values(const RealGrid& grid) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(grid.frames),
                      static_cast<Eigen::Index>(grid.bins));
    for (std::size_t l = 0; l < grid.frames; ++l)
        for (std::size_t f = 0; f < grid.bins; ++f)
            m(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(f)) = grid.at(l, f);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues();
}

}  // namespace

int thresholded_rank(const RealGrid& grid, double eta) {
    if (grid.frames == 0 || grid.bins == 0 || grid.data.empty())
        throw std::invalid_argument("thresholded_rank: empty grid");
    if (!(eta >= 0.0)) throw std::invalid_argument("thresholded_rank: eta must be >= 0");
    const Eigen::VectorXd sv = singular_values(grid);
    const double numeric_zero = static_cast<double>(std::max(grid.frames, grid.bins)) *
                                (sv.size() > 0 ? sv(0) : 0.0) *
                                std::numeric_limits<double>::epsilon();
    const double cut = std::max(eta, numeric_zero);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) ++rank;
    return rank;
}

int rank_of_wave(const Waveform& wave, const RankConfig& config) {
    config.validate();
    double energy = 0.0;
    for (double s : wave.samples) energy += s * s;
    if (!(energy > 0.0)) throw std::invalid_argument("rank_of_wave: silent signal");
    const double scale =
        1.0 / std::sqrt(energy / static_cast<double>(wave.samples.size()));

    Waveform normed = wave;
    for (double& s : normed.samples) s *= scale;

    StftConfig cfg;
    cfg.n_fft = config.n_fft;
    cfg.hop = config.hop;
    return thresholded_rank(magnitude(stft(normed, cfg)), config.eta);
}

RankReport rank_diff_stats(const std::vector<Waveform>& method_waves,
                           const std::vector<Waveform>& reference_waves,
                           const RankConfig& config) {
    if (method_waves.size() != reference_waves.size())
        throw std::invalid_argument("rank_diff_stats: corpus length mismatch");
    if (method_waves.empty())
        throw std::invalid_argument("rank_diff_stats: empty corpus");

    RankReport report;
    for (std::size_t i = 0; i < method_waves.size(); ++i) {
        report.method_ranks.push_back(rank_of_wave(method_waves[i], config));
        report.reference_ranks.push_back(rank_of_wave(reference_waves[i], config));
        report.differences.push_back(report.method_ranks[i] - report.reference_ranks[i]);
    }

    const auto n = static_cast<double>(report.differences.size());
    double mean = 0.0;
    for (int d : report.differences) mean += d;
    mean /= n;
    double var = 0.0;
    for (int d : report.differences) var += (d - mean) * (d - mean);
    var /= n;

    std::vector<int> sorted = report.differences;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    const double median = sorted.size() % 2 == 1
                              ? sorted[mid]
                              : 0.5 * (sorted[mid - 1] + sorted[mid]);

    report.mean = mean;
    report.median = median;
    report.variance = var;
    return report;
}

SubadditivityAudit subadditivity_audit(std::size_t n_instances, std::size_t rows,
                                       std::size_t cols, double eta,
                                       std::uint64_t seed) {
    SubadditivityAudit audit;
    RngStream rng(seed, 0);
    for (std::size_t it = 0; it < n_instances; ++it) {
        // random nonnegative low-rank matrices: sums of r outer products
        auto make = [&](std::size_t r) {
            RealGrid g;
            g.frames = rows;
            g.bins = cols;
            g.data.assign(rows * cols, 0.0);
            for (std::size_t k = 0; k < r; ++k) {
                std::vector<double> u(rows), v(cols);
                for (auto& x : u) x = rng.uniform();
                for (auto& x : v) x = rng.uniform();
                for (std::size_t i = 0; i < rows; ++i)
                    for (std::size_t j = 0; j < cols; ++j) g.at(i, j) += u[i] * v[j];
            }
            return g;
        };
        const std::size_t max_rank = std::min(rows, cols);
        const auto ra = 1 + static_cast<std::size_t>(rng.uniform() * (max_rank / 2));
        const auto rb = 1 + static_cast<std::size_t>(rng.uniform() * (max_rank / 2));
        const RealGrid a = make(ra);
        const RealGrid b = make(rb);
        RealGrid sum = a;
        for (std::size_t i = 0; i < sum.data.size(); ++i) sum.data[i] += b.data[i];

        const int lhs = thresholded_rank(sum, eta);
        const int rhs = thresholded_rank(a, eta) + thresholded_rank(b, eta);
        ++audit.checked;
        if (lhs > rhs) ++audit.violations;
    }
    return audit;
}

}  // namespace sbridge
