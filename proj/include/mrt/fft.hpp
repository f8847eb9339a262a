#pragma once

#include <memory>
#include <vector>

namespace mrt {

// Real-input DFT of a fixed size, returning magnitudes for the non-redundant
// bins 0..size/2. One instance holds a reusable plan and buffers; create once
// and call many times. Not thread-safe per instance.
class RealDft {
public:
    explicit RealDft(int size);
    ~RealDft();

    RealDft(const RealDft&) = delete;
    RealDft& operator=(const RealDft&) = delete;
    RealDft(RealDft&&) noexcept;
    RealDft& operator=(RealDft&&) noexcept;

    int size() const;
    int bins() const;  // size/2 + 1

    // input must hold size() reals; out must hold bins() entries.
    void magnitude(const double* input, double* out) const;
    std::vector<double> magnitude(const std::vector<double>& input) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace mrt
