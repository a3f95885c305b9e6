#include "ciqa/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace ciqa::fft {

namespace {

class FftwFft2d final : public Fft2d {
public:
    ~FftwFft2d() override {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    void forward(std::complex<double>* data, int rows, int cols) const override {
        execute(data, rows, cols, FFTW_FORWARD);
    }

    void inverse(std::complex<double>* data, int rows, int cols) const override {
        execute(data, rows, cols, FFTW_BACKWARD);
    }

private:
    void execute(std::complex<double>* data, int rows, int cols, int sign) const {
        fftw_plan plan;
        {
            std::lock_guard lock(mutex_);
            auto key = std::make_tuple(rows, cols, sign);
            auto it = plans_.find(key);
            if (it == plans_.end()) {
                // Planned with FFTW_UNALIGNED so the cached plan can run on
                // any caller buffer via the new-array interface.
                plan = fftw_plan_dft_2d(rows, cols, nullptr, nullptr, sign,
                                        FFTW_ESTIMATE | FFTW_UNALIGNED);
                plans_.emplace(key, plan);
            } else {
                plan = it->second;
            }
        }
        auto* raw = reinterpret_cast<fftw_complex*>(data);
        fftw_execute_dft(plan, raw, raw);
        const double scale = 1.0 / std::sqrt(static_cast<double>(rows) * cols);
        const std::size_t n = static_cast<std::size_t>(rows) * cols;
        for (std::size_t i = 0; i < n; ++i) data[i] *= scale;
    }

    mutable std::mutex mutex_;
    mutable std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

}  // namespace

const Fft2d& default_fft2d() {
    static FftwFft2d instance;
    return instance;
}

}  // namespace ciqa::fft
