#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "citysense/preprocess.hpp"

namespace citysense {

/// Periodic exogenous input u_t, defined for every integer t. at(t) reads
/// the profile slot that sample t of the attached series falls in.
struct CircularInput {
    std::vector<double> slots;
    long phase = 0;  // slot index of series sample 0

    double at(long t) const {
        const long n = static_cast<long>(slots.size());
        long i = (phase + t) % n;
        if (i < 0) i += n;
        return slots[static_cast<std::size_t>(i)];
    }

    static CircularInput from_profile(const TypicalProfile& profile,
                                      std::int64_t series_start, int utc_offset_minutes);
};

/// ARX(p,q): x_t = sum_i a_i x_{t-i} + sum_j b_j u_{t-j} + n_t, with the
/// exogenous part running j = 0..q-1.
struct ArxModel {
    int p = 0;
    int q = 0;
    std::vector<double> a;  // a_1..a_p
    std::vector<double> b;  // b_0..b_{q-1}

    /// Prediction errors for every row with a full regressor window,
    /// i.e. t in [max(p, q-1), n).
    std::vector<double> residuals;
    std::size_t first_residual_index = 0;
    double fit_rmse = 0;

    /// One-step prediction of x_t from history x (uses x[t-1]..x[t-p]).
    double predict_one(std::span<const double> x, const CircularInput& u, std::size_t t) const;
};

/// Least-squares ARX fit over the rows with a full regressor window, solved
/// with a rank-revealing QR factorization.
ArxModel fit_arx(std::span<const double> x, const CircularInput& u, int p, int q);

/// Rolls the difference equation forward for `horizon` steps. init_state
/// holds the last p outputs, oldest first; u is indexed so that the first
/// simulated step reads u.at(0); noise[t] is added at step t.
std::vector<double> simulate(const ArxModel& model, std::span<const double> init_state,
                             const CircularInput& u, std::span<const double> noise,
                             int horizon);

/// RMSE of one-step-ahead predictions over rows [begin, end).
double fit_rmse(const ArxModel& model, std::span<const double> x, const CircularInput& u,
                std::size_t begin, std::size_t end);

}  // namespace citysense
