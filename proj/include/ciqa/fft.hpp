#pragma once

#include <complex>

namespace ciqa::fft {

// Minimal 2-D complex FFT interface. Both directions are unitary
// (scaled by 1/sqrt(rows*cols)), so forward followed by inverse is the
// identity and both preserve the l2 norm.
class Fft2d {
public:
    virtual ~Fft2d() = default;
    virtual void forward(std::complex<double>* data, int rows, int cols) const = 0;
    virtual void inverse(std::complex<double>* data, int rows, int cols) const = 0;
};

// FFTW-backed implementation. Plans are cached per (rows, cols,
// direction) behind a mutex; plan execution is safe from any thread.
const Fft2d& default_fft2d();

}  // namespace ciqa::fft
