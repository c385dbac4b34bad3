#include "sbridge/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace sbridge {

namespace {

struct Reader {
    std::ifstream in;
    std::string path;

    explicit Reader(const std::string& p) : in(p, std::ios::binary), path(p) {
        if (!in) throw std::runtime_error("wav: cannot open " + p);
    }

    void bytes(void* dst, std::size_t n) {
        in.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
        if (!in) throw std::runtime_error("wav: truncated file " + path);
    }

    std::uint32_t u32() {
        std::uint8_t b[4];
        bytes(b, 4);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) |
               (static_cast<std::uint32_t>(b[3]) << 24);
    }

    std::uint16_t u16() {
        std::uint8_t b[2];
        bytes(b, 2);
        return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
    }

    std::string tag() {
        char t[5] = {};
        bytes(t, 4);
        return t;
    }

    void skip(std::uint32_t n) { in.seekg(n, std::ios::cur); }
};

void put_u32(std::ofstream& out, std::uint32_t v) {
    char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8),
                 static_cast<char>(v >> 16), static_cast<char>(v >> 24)};
    out.write(b, 4);
}

void put_u16(std::ofstream& out, std::uint16_t v) {
    char b[2] = {static_cast<char>(v), static_cast<char>(v >> 8)};
    out.write(b, 2);
}

}  // namespace

Waveform read_wav(const std::string& path) {
    Reader r(path);
    if (r.tag() != "RIFF") throw std::runtime_error("wav: not a RIFF file: " + path);
    r.u32();  // riff size
    if (r.tag() != "WAVE") throw std::runtime_error("wav: not a WAVE file: " + path);

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    bool have_fmt = false;

    while (true) {
        char t[5] = {};
        r.in.read(t, 4);
        if (!r.in) break;
        const std::uint32_t size = r.u32();
        const std::string chunk(t, 4);
        if (chunk == "fmt ") {
            format = r.u16();
            channels = r.u16();
            rate = r.u32();
            r.u32();  // byte rate
            r.u16();  // block align
            bits = r.u16();
            if (size > 16) r.skip(size - 16);
            have_fmt = true;
        } else if (chunk == "data") {
            if (!have_fmt) throw std::runtime_error("wav: data before fmt: " + path);
            if (channels != 1)
                throw std::runtime_error("wav: only mono supported: " + path);
            Waveform w;
            w.sample_rate = static_cast<int>(rate);
            if (format == 1 && bits == 16) {
                const std::size_t n = size / 2;
                std::vector<std::int16_t> raw(n);
                r.bytes(raw.data(), size);
                w.samples.resize(n);
                for (std::size_t i = 0; i < n; ++i)
                    w.samples[i] = static_cast<double>(raw[i]) / 32768.0;
            } else if (format == 3 && bits == 32) {
                const std::size_t n = size / 4;
                std::vector<float> raw(n);
                r.bytes(raw.data(), size);
                w.samples.resize(n);
                for (std::size_t i = 0; i < n; ++i) w.samples[i] = raw[i];
            } else {
                throw std::runtime_error("wav: unsupported encoding (want PCM16 or float32): " +
                                         path);
            }
            return w;
        } else {
            r.skip(size + (size % 2));  // chunks are word-aligned
        }
    }
    throw std::runtime_error("wav: no data chunk: " + path);
}

void write_wav(const std::string& path, const Waveform& wave, WavEncoding encoding) {
    if (wave.sample_rate <= 0) throw std::invalid_argument("wav: sample_rate must be > 0");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("wav: cannot write " + path);

    const std::size_t n = wave.samples.size();
    const bool f32 = encoding == WavEncoding::Float32;
    const std::uint16_t bytes_per = f32 ? 4 : 2;
    const std::uint32_t data_size = static_cast<std::uint32_t>(n * bytes_per);

    out.write("RIFF", 4);
    put_u32(out, 36 + data_size);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    put_u32(out, 16);
    put_u16(out, f32 ? 3 : 1);
    put_u16(out, 1);
    put_u32(out, static_cast<std::uint32_t>(wave.sample_rate));
    put_u32(out, static_cast<std::uint32_t>(wave.sample_rate) * bytes_per);
    put_u16(out, bytes_per);
    put_u16(out, f32 ? 32 : 16);
    out.write("data", 4);
    put_u32(out, data_size);

    if (f32) {
        for (double s : wave.samples) {
            const float v = static_cast<float>(s);
            out.write(reinterpret_cast<const char*>(&v), 4);
        }
    } else {
        for (double s : wave.samples) {
            const double clamped = std::clamp(s, -1.0, 1.0);
            const auto v = static_cast<std::int16_t>(std::lrint(clamped * 32767.0));
            put_u16(out, static_cast<std::uint16_t>(v));
        }
    }
    if (!out) throw std::runtime_error("wav: write failed: " + path);
}

}  // namespace sbridge
