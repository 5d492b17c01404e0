#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>

#include "asflow/autoscaling.hpp"

namespace asflow::policy {

namespace {

// Least-squares polynomial of the given degree through (t, demand), evaluated
// at `at`. Abscissae are shifted to the newest sample and scaled to [-1, 0]
// to keep the normal equations well conditioned.
std::optional<double> polynomial_forecast(std::span<const MonitoringSample> h, int degree, SimTime at,
                                          ScaleCounters& counters) {
    const int m = degree + 1;
    std::set<std::int64_t> distinct;
    for (const auto& s : h)
        distinct.insert(s.t.ms());
    if (static_cast<int>(distinct.size()) < m)
        return std::nullopt;

    const long double ref = static_cast<long double>(h.back().t.ms());
    long double scale = 1.0L;
    for (const auto& s : h)
        scale = std::max(scale, std::fabs(static_cast<long double>(s.t.ms()) - ref));

    std::array<std::array<long double, 4>, 3> a{};  // augmented normal matrix, m <= 3
    for (const auto& s : h) {
        counters.count_instructions(1);
        const long double x = (static_cast<long double>(s.t.ms()) - ref) / scale;
        std::array<long double, 3> pw{1.0L, x, x * x};
        for (int r = 0; r < m; ++r) {
            for (int c = 0; c < m; ++c)
                a[r][c] += pw[r] * pw[c];
            a[r][m] += pw[r] * static_cast<long double>(s.demand_vms);
        }
    }

    for (int col = 0; col < m; ++col) {
        int pivot = col;
        for (int r = col + 1; r < m; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col]))
                pivot = r;
        if (std::fabs(a[pivot][col]) < 1e-18L)
            return std::nullopt;
        std::swap(a[col], a[pivot]);
        for (int r = 0; r < m; ++r) {
            if (r == col)
                continue;
            const long double f = a[r][col] / a[col][col];
            for (int c = col; c <= m; ++c)
                a[r][c] -= f * a[col][c];
        }
    }

    const long double x = (static_cast<long double>(at.ms()) - ref) / scale;
    long double y = 0.0L, pw = 1.0L;
    for (int k = 0; k < m; ++k) {
        y += a[k][m] / a[k][k] * pw;
        pw *= x;
    }
    return static_cast<double>(y);
}

std::optional<double> predict(Predictor p, std::span<const MonitoringSample> h, SimTime at, double alpha,
                              ScaleCounters& counters) {
    counters.count_instructions(1);
    if (h.empty())
        return std::nullopt;
    switch (p) {
    case Predictor::LastValue:
        return static_cast<double>(h.back().demand_vms);
    case Predictor::Linear:
        return polynomial_forecast(h, 1, at, counters);
    case Predictor::Quadratic:
        return polynomial_forecast(h, 2, at, counters);
    case Predictor::Smoothing: {
        double level = static_cast<double>(h.front().demand_vms);
        for (const auto& s : h.subspan(1)) {
            counters.count_instructions(1);
            level = alpha * static_cast<double>(s.demand_vms) + (1.0 - alpha) * level;
        }
        return level;
    }
    }
    return std::nullopt;
}

} // namespace

std::optional<double> quadratic_forecast(std::span<const MonitoringSample> history, SimTime at,
                                         ScaleCounters& counters) {
    return polynomial_forecast(history, 2, at, counters);
}

std::optional<double> demand_slope(std::span<const MonitoringSample> h, ScaleCounters& counters) {
    if (h.size() < 2)
        return std::nullopt;
    long double mean_t = 0, mean_d = 0;
    for (const auto& s : h) {
        mean_t += s.t.seconds();
        mean_d += static_cast<long double>(s.demand_vms);
    }
    mean_t /= static_cast<long double>(h.size());
    mean_d /= static_cast<long double>(h.size());
    long double sxx = 0, sxy = 0;
    for (const auto& s : h) {
        counters.count_instructions(1);
        const long double dt = s.t.seconds() - mean_t;
        sxx += dt * dt;
        sxy += dt * (static_cast<long double>(s.demand_vms) - mean_d);
    }
    if (sxx <= 0)
        return std::nullopt;
    return static_cast<double>(sxy / sxx);
}

std::optional<std::int64_t> histogram_percentile(const std::map<std::int64_t, std::int64_t>& histogram,
                                                 double percentile) {
    std::int64_t total = 0;
    for (const auto& [value, count] : histogram)
        total += count;
    if (total == 0)
        return std::nullopt;
    auto rank = static_cast<std::int64_t>(std::ceil(percentile / 100.0 * static_cast<double>(total)));
    rank = std::clamp<std::int64_t>(rank, 1, total);
    std::int64_t seen = 0;
    for (const auto& [value, count] : histogram) {
        seen += count;
        if (seen >= rank)
            return value;
    }
    return histogram.rbegin()->first;
}

std::string to_string(Predictor p) {
    switch (p) {
    case Predictor::LastValue: return "last";
    case Predictor::Linear: return "linear";
    case Predictor::Quadratic: return "quadratic";
    case Predictor::Smoothing: return "smoothing";
    }
    return "last";
}

ForecastChoice best_forecast(std::span<const MonitoringSample> h, SimTime at, int depth, double alpha,
                             ScaleCounters& counters) {
    ForecastChoice choice;
    if (h.empty())
        return choice;
    choice.forecast = static_cast<double>(h.back().demand_vms);
    if (h.size() < 2)
        return choice;

    constexpr std::array predictors{Predictor::LastValue, Predictor::Linear, Predictor::Quadratic,
                                    Predictor::Smoothing};
    const std::size_t first = h.size() > static_cast<std::size_t>(depth) ? h.size() - depth : 1;
    double best_err = std::numeric_limits<double>::infinity();
    for (auto p : predictors) {
        double err = 0.0;
        int scored = 0;
        for (std::size_t j = std::max<std::size_t>(first, 1); j < h.size(); ++j) {
            auto f = predict(p, h.first(j), h[j].t, alpha, counters);
            if (!f)
                continue;
            err += std::fabs(*f - static_cast<double>(h[j].demand_vms));
            ++scored;
        }
        if (scored == 0)
            continue;
        err /= scored;
        if (err < best_err) {
            auto f = predict(p, h, at, alpha, counters);
            if (!f)
                continue;
            best_err = err;
            choice = {p, *f, err};
        }
    }
    return choice;
}

} // namespace asflow::policy
