#include "citysense/timeseries.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "citysense/timeutil.hpp"

namespace citysense {

CircularInput CircularInput::from_profile(const TypicalProfile& profile,
                                          std::int64_t series_start,
                                          int utc_offset_minutes) {
    CircularInput u;
    u.slots = profile.slots;
    u.phase = local_slot(series_start, utc_offset_minutes, profile.step_minutes);
    return u;
}

double ArxModel::predict_one(std::span<const double> x, const CircularInput& u,
                             std::size_t t) const {
    double pred = 0;
    for (int i = 1; i <= p; ++i) {
        pred += a[static_cast<std::size_t>(i - 1)] * x[t - static_cast<std::size_t>(i)];
    }
    for (int j = 0; j < q; ++j) {
        pred += b[static_cast<std::size_t>(j)] * u.at(static_cast<long>(t) - j);
    }
    return pred;
}

ArxModel fit_arx(std::span<const double> x, const CircularInput& u, int p, int q) {
    if (p < 0 || q < 0 || p + q < 1) throw std::invalid_argument("fit_arx: need p+q >= 1");
    if (u.slots.empty()) throw std::invalid_argument("fit_arx: empty exogenous profile");
    const std::size_t n = x.size();
    const std::size_t t0 = static_cast<std::size_t>(std::max(p, q - 1));
    const int dim = p + q;
    if (n <= 2 * static_cast<std::size_t>(dim) || n <= t0) {
        throw Error("fit_arx: series too short for the requested orders");
    }
    for (double v : x) {
        if (is_missing(v)) throw Error("fit_arx: series still has missing values");
    }

    const std::size_t rows = n - t0;
    Eigen::MatrixXd A(rows, dim);
    Eigen::VectorXd y(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = t0 + r;
        y(static_cast<Eigen::Index>(r)) = x[t];
        for (int i = 1; i <= p; ++i) {
            A(static_cast<Eigen::Index>(r), i - 1) = x[t - static_cast<std::size_t>(i)];
        }
        for (int j = 0; j < q; ++j) {
            A(static_cast<Eigen::Index>(r), p + j) = u.at(static_cast<long>(t) - j);
        }
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < dim) {
        throw Error("fit_arx: degenerate data (rank-deficient regressor matrix)");
    }
    const Eigen::VectorXd theta = qr.solve(y);

    ArxModel model;
    model.p = p;
    model.q = q;
    model.a.assign(theta.data(), theta.data() + p);
    model.b.assign(theta.data() + p, theta.data() + dim);
    model.first_residual_index = t0;
    model.residuals.resize(rows);
    double ss = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t t = t0 + r;
        const double eps = x[t] - model.predict_one(x, u, t);
        model.residuals[r] = eps;
        ss += eps * eps;
    }
    model.fit_rmse = std::sqrt(ss / static_cast<double>(rows));
    return model;
}

std::vector<double> simulate(const ArxModel& model, std::span<const double> init_state,
                             const CircularInput& u, std::span<const double> noise,
                             int horizon) {
    if (static_cast<int>(init_state.size()) != model.p) {
        throw std::invalid_argument("simulate: init_state must hold the last p outputs");
    }
    if (static_cast<int>(noise.size()) != horizon) {
        throw std::invalid_argument("simulate: noise length must equal horizon");
    }
    // Work buffer: [x_{-p} .. x_{-1} | x_0 .. x_{horizon-1}]
    std::vector<double> buf(init_state.begin(), init_state.end());
    buf.resize(static_cast<std::size_t>(model.p) + static_cast<std::size_t>(horizon));
    for (int t = 0; t < horizon; ++t) {
        double v = noise[static_cast<std::size_t>(t)];
        for (int i = 1; i <= model.p; ++i) {
            v += model.a[static_cast<std::size_t>(i - 1)] *
                 buf[static_cast<std::size_t>(model.p + t - i)];
        }
        for (int j = 0; j < model.q; ++j) {
            v += model.b[static_cast<std::size_t>(j)] * u.at(t - j);
        }
        buf[static_cast<std::size_t>(model.p + t)] = v;
    }
    return std::vector<double>(buf.begin() + model.p, buf.end());
}

double fit_rmse(const ArxModel& model, std::span<const double> x, const CircularInput& u,
                std::size_t begin, std::size_t end) {
    const std::size_t lo =
        std::max(begin, static_cast<std::size_t>(std::max(model.p, model.q - 1)));
    if (lo >= end || end > x.size()) throw Error("fit_rmse: empty or invalid range");
    double ss = 0;
    std::size_t count = 0;
    for (std::size_t t = lo; t < end; ++t) {
        const double eps = x[t] - model.predict_one(x, u, t);
        ss += eps * eps;
        ++count;
    }
    return std::sqrt(ss / static_cast<double>(count));
}

}  // namespace citysense
