// Minimal RIFF/WAVE I/O: mono, PCM 16-bit or IEEE float 32-bit. No
// resampling; callers that require a specific rate must check it.

#ifndef SBRIDGE_WAV_HPP
#define SBRIDGE_WAV_HPP

#include <string>

#include "sbridge/dsp.hpp"

namespace sbridge {

enum class WavEncoding { Pcm16, Float32 };

Waveform read_wav(const std::string& path);

void write_wav(const std::string& path, const Waveform& wave,
               WavEncoding encoding = WavEncoding::Float32);

}  // namespace sbridge

#endif  // SBRIDGE_WAV_HPP
