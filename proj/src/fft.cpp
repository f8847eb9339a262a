#include "mrt/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace mrt {

struct RealDft::Impl {
    int size = 0;
    double* in = nullptr;
    fftw_complex* out = nullptr;
    fftw_plan plan = nullptr;

    explicit Impl(int n) : size(n) {
        in = fftw_alloc_real(static_cast<std::size_t>(n));
        out = fftw_alloc_complex(static_cast<std::size_t>(n) / 2 + 1);
        if (!in || !out) {
            throw std::runtime_error("RealDft: allocation failed");
        }
        // FFTW_ESTIMATE picks the plan deterministically (no runtime timing),
        // which keeps outputs bit-identical across runs.
        plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
        if (!plan) {
            throw std::runtime_error("RealDft: plan creation failed");
        }
    }

    ~Impl() {
        if (plan) fftw_destroy_plan(plan);
        if (in) fftw_free(in);
        if (out) fftw_free(out);
    }
};

RealDft::RealDft(int size) {
    if (size <= 0) {
        throw std::runtime_error("RealDft: size must be positive");
    }
    impl_ = std::make_unique<Impl>(size);
}

RealDft::~RealDft() = default;
RealDft::RealDft(RealDft&&) noexcept = default;
RealDft& RealDft::operator=(RealDft&&) noexcept = default;

int RealDft::size() const { return impl_->size; }
int RealDft::bins() const { return impl_->size / 2 + 1; }

void RealDft::magnitude(const double* input, double* out) const {
    std::memcpy(impl_->in, input, sizeof(double) * static_cast<std::size_t>(impl_->size));
    fftw_execute(impl_->plan);
    const int n_bins = bins();
    for (int k = 0; k < n_bins; ++k) {
        out[k] = std::hypot(impl_->out[k][0], impl_->out[k][1]);
    }
}

std::vector<double> RealDft::magnitude(const std::vector<double>& input) const {
    if (static_cast<int>(input.size()) != impl_->size) {
        throw std::runtime_error("RealDft: input length does not match transform size");
    }
    std::vector<double> result(static_cast<std::size_t>(bins()));
    magnitude(input.data(), result.data());
    return result;
}

}  // namespace mrt
