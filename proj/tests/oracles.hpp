#pragma once

// Reference implementations written as plain nested loops, straight from the layer
// definitions. Accumulation order matches the library (bias first, then channel, then
// tap) so results can be compared bit-for-bit.

#include "hifnet/tensor.hpp"

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace oracle {

inline std::vector<double> conv(const std::vector<double>& x, std::size_t in_ch, std::size_t len,
                                const std::vector<double>& w, const std::vector<double>& b, std::size_t out_ch,
                                std::size_t k) {
    const std::size_t out_len = len - k + 1;
    std::vector<double> y(out_ch * out_len);
    for (std::size_t o = 0; o < out_ch; ++o) {
        for (std::size_t t = 0; t < out_len; ++t) {
            double acc = b[o];
            for (std::size_t c = 0; c < in_ch; ++c) {
                for (std::size_t i = 0; i < k; ++i) {
                    acc += w[(o * in_ch + c) * k + i] * x[c * len + t + i];
                }
            }
            y[o * out_len + t] = acc;
        }
    }
    return y;
}

struct Pooled {
    std::vector<double> values;
    std::vector<std::size_t> argmax;
};

inline Pooled maxpool(const std::vector<double>& x, std::size_t ch, std::size_t len, std::size_t width,
                      std::size_t stride) {
    const std::size_t out_len = (len - width) / stride + 1;
    Pooled p{std::vector<double>(ch * out_len), std::vector<std::size_t>(ch * out_len)};
    for (std::size_t c = 0; c < ch; ++c) {
        for (std::size_t t = 0; t < out_len; ++t) {
            std::size_t best = t * stride;
            for (std::size_t j = t * stride; j < t * stride + width; ++j) {
                if (x[c * len + j] > x[c * len + best]) {
                    best = j;
                }
            }
            p.values[c * out_len + t] = x[c * len + best];
            p.argmax[c * out_len + t] = best;
        }
    }
    return p;
}

/// Scratch directory that is removed on destruction.
class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("hifnet-test-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

} // namespace oracle
