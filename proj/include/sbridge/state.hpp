// State of the diffusion process: a flat vector of real values or a complex
// time-frequency grid. Samplers treat both uniformly; the layout only matters
// for noise injection (real vs circularly-symmetric complex) and file I/O.

#ifndef SBRIDGE_STATE_HPP
#define SBRIDGE_STATE_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace sbridge {

class StateVector {
public:
    StateVector() = default;

    static StateVector real(std::vector<double> values) {
        StateVector s;
        s.data_.reserve(values.size());
        for (double v : values) s.data_.emplace_back(v, 0.0);
        s.frames_ = 0;
        s.bins_ = values.size();
        s.complex_ = false;
        return s;
    }

    static StateVector real_filled(std::size_t n, double value) {
        return real(std::vector<double>(n, value));
    }

    static StateVector complex_grid(std::vector<std::complex<double>> values,
                                    std::size_t frames, std::size_t bins) {
        if (values.size() != frames * bins)
            throw std::invalid_argument("StateVector: grid size mismatch");
        StateVector s;
        s.data_ = std::move(values);
        s.frames_ = frames;
        s.bins_ = bins;
        s.complex_ = true;
        return s;
    }

    std::size_t size() const { return data_.size(); }
    bool is_complex() const { return complex_; }
    std::size_t frames() const { return frames_; }
    std::size_t bins() const { return bins_; }

    std::complex<double>& operator[](std::size_t i) { return data_[i]; }
    const std::complex<double>& operator[](std::size_t i) const { return data_[i]; }

    std::vector<std::complex<double>>& values() { return data_; }
    const std::vector<std::complex<double>>& values() const { return data_; }

    bool same_shape(const StateVector& other) const {
        return complex_ == other.complex_ && frames_ == other.frames_ &&
               bins_ == other.bins_ && data_.size() == other.data_.size();
    }

    bool all_finite() const {
        for (const auto& z : data_)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
        return true;
    }

    std::vector<double> to_real() const {
        std::vector<double> out(data_.size());
        for (std::size_t i = 0; i < data_.size(); ++i) out[i] = data_[i].real();
        return out;
    }

private:
    std::vector<std::complex<double>> data_;
    std::size_t frames_ = 0;  // 0 for flat real vectors
    std::size_t bins_ = 0;
    bool complex_ = false;
};

}  // namespace sbridge

#endif  // SBRIDGE_STATE_HPP
