#include "skycast/stats/arima.hpp"

#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <sstream>

#include "skycast/core/error.hpp"

namespace skycast::stats {

namespace {

std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

// 1 + sign * sum coef_k B^(stride * k)
std::vector<double> lag_poly(std::span<const double> coef, int stride, double sign) {
    std::vector<double> p(coef.size() * static_cast<std::size_t>(stride) + 1, 0.0);
    p[0] = 1.0;
    for (std::size_t k = 0; k < coef.size(); ++k) p[(k + 1) * static_cast<std::size_t>(stride)] = sign * coef[k];
    return p;
}

struct Problem {
    ArimaOrder order;
    SeasonalOrder seasonal;
    bool constant = false;
    const std::vector<double>* w = nullptr;

    int n_params() const { return order.p + seasonal.P + order.q + seasonal.Q + (constant ? 1 : 0); }

    struct Unpacked {
        std::vector<double> ar, sar, ma, sma;
        double mu = 0.0;
    };

    Unpacked unpack(std::span<const double> x) const {
        Unpacked u;
        std::size_t at = 0;
        auto take = [&](std::vector<double>& dst, int count) {
            dst.assign(x.begin() + static_cast<std::ptrdiff_t>(at), x.begin() + static_cast<std::ptrdiff_t>(at + count));
            at += static_cast<std::size_t>(count);
        };
        take(u.ar, order.p);
        take(u.sar, seasonal.P);
        take(u.ma, order.q);
        take(u.sma, seasonal.Q);
        u.mu = constant ? x[at] : 0.0;
        return u;
    }

    // Maps unconstrained optimizer coordinates onto coefficients: each
    // polynomial block gets tanh partial autocorrelations run through the
    // Durbin-Levinson recursion, so AR sides stay stationary and MA sides
    // invertible. The constant passes through.
    std::vector<double> constrain(std::span<const double> z) const {
        std::vector<double> x(z.begin(), z.end());
        std::size_t at = 0;
        auto block = [&](int count, double sign) {
            std::vector<double> phi;
            for (int k = 0; k < count; ++k) {
                const double r = std::tanh(z[at + static_cast<std::size_t>(k)]);
                std::vector<double> next(phi.size() + 1);
                for (std::size_t j = 0; j < phi.size(); ++j) next[j] = phi[j] - r * phi[phi.size() - 1 - j];
                next.back() = r;
                phi = std::move(next);
            }
            for (int k = 0; k < count; ++k) x[at + static_cast<std::size_t>(k)] = sign * phi[static_cast<std::size_t>(k)];
            at += static_cast<std::size_t>(count);
        };
        block(order.p, 1.0);
        block(seasonal.P, 1.0);
        block(order.q, -1.0);
        block(seasonal.Q, -1.0);
        return x;
    }

    // Returns lag coefficients (index 0 unused) of the expanded AR and MA sides.
    static void expand(const Unpacked& u, int s, std::vector<double>& ar_full, std::vector<double>& ma_full) {
        const int stride = s > 0 ? s : 1;
        auto ar_poly = poly_mul(lag_poly(u.ar, 1, -1.0), lag_poly(u.sar, stride, -1.0));
        auto ma_poly = poly_mul(lag_poly(u.ma, 1, 1.0), lag_poly(u.sma, stride, 1.0));
        ar_full.assign(ar_poly.size(), 0.0);
        for (std::size_t m = 1; m < ar_poly.size(); ++m) ar_full[m] = -ar_poly[m];
        ma_full = ma_poly;
        ma_full[0] = 0.0;
    }

    double css(std::span<const double> x, std::vector<double>* residuals = nullptr) const {
        const Unpacked u = unpack(x);
        std::vector<double> ar_full, ma_full;
        expand(u, seasonal.s, ar_full, ma_full);
        const auto& series = *w;
        const std::size_t n = series.size();
        const std::size_t start = ar_full.size() - 1;
        std::vector<double> e(n, 0.0);
        double ssr = 0.0;
        for (std::size_t t = start; t < n; ++t) {
            double v = series[t] - u.mu;
            for (std::size_t m = 1; m < ar_full.size(); ++m) v -= ar_full[m] * (series[t - m] - u.mu);
            for (std::size_t m = 1; m < ma_full.size() && m <= t; ++m) v -= ma_full[m] * e[t - m];
            e[t] = v;
            ssr += v * v;
            if (!std::isfinite(ssr)) return std::numeric_limits<double>::max();
        }
        if (residuals) *residuals = std::move(e);
        return ssr;
    }
};

double gsl_objective(const gsl_vector* v, void* params) {
    const auto* prob = static_cast<const Problem*>(params);
    std::vector<double> x(v->size);
    for (std::size_t i = 0; i < v->size; ++i) x[i] = gsl_vector_get(v, i);
    return prob->css(prob->constrain(x));
}

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

SimplexResult run_simplex(const Problem& prob, std::vector<double> start, int max_iter, double tol) {
    const std::size_t n = start.size();
    gsl_multimin_function fn{&gsl_objective, n, const_cast<Problem*>(&prob)};
    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(n), &gsl_vector_free);
    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> step(gsl_vector_alloc(n), &gsl_vector_free);
    for (std::size_t i = 0; i < n; ++i) gsl_vector_set(x.get(), i, start[i]);
    gsl_vector_set_all(step.get(), 0.1);
    std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> s(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n), &gsl_multimin_fminimizer_free);
    gsl_multimin_fminimizer_set(s.get(), &fn, x.get(), step.get());

    // A simplex crawling along a flat ridge (near AR/MA cancellation) may never
    // shrink; it counts as converged once the objective stops improving.
    constexpr int kStallWindow = 500;
    constexpr double kStallRelTol = 1e-10;
    double anchor = std::numeric_limits<double>::infinity();
    SimplexResult r;
    for (r.iterations = 0; r.iterations < max_iter; ++r.iterations) {
        if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), tol) == GSL_SUCCESS) {
            r.converged = true;
            break;
        }
        if ((r.iterations + 1) % kStallWindow == 0) {
            const double f = s->fval;
            if (std::isfinite(f) && anchor - f <= kStallRelTol * (std::abs(f) + kStallRelTol)) {
                r.converged = true;
                break;
            }
            anchor = f;
        }
    }
    r.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) r.x[i] = gsl_vector_get(s->x, i);
    r.value = s->fval;
    return r;
}

}  // namespace

std::vector<double> difference(std::span<const double> y, int d, int D, int s) {
    std::vector<double> w(y.begin(), y.end());
    for (int k = 0; k < D; ++k) {
        if (w.size() <= static_cast<std::size_t>(s)) return {};
        std::vector<double> next(w.size() - static_cast<std::size_t>(s));
        for (std::size_t t = 0; t < next.size(); ++t) next[t] = w[t + static_cast<std::size_t>(s)] - w[t];
        w = std::move(next);
    }
    for (int k = 0; k < d; ++k) {
        if (w.size() <= 1) return {};
        std::vector<double> next(w.size() - 1);
        for (std::size_t t = 0; t < next.size(); ++t) next[t] = w[t + 1] - w[t];
        w = std::move(next);
    }
    return w;
}

ArimaModel ArimaModel::fit(std::span<const double> series, ArimaOrder order, SeasonalOrder seasonal,
                           const ArimaOptions& options) {
    if (order.p < 0 || order.d < 0 || order.q < 0 || seasonal.P < 0 || seasonal.D < 0 || seasonal.Q < 0 ||
        seasonal.s < 0)
        throw DomainError("ARIMA orders must be non-negative");
    if ((seasonal.P || seasonal.D || seasonal.Q) && seasonal.s < 2)
        throw DomainError("seasonal terms need a period of at least 2");
    const int terms = order.p + order.d + order.q + seasonal.P + seasonal.D + seasonal.Q;
    const int s = seasonal.s;
    const std::size_t lost = static_cast<std::size_t>(order.d + s * seasonal.D);
    const std::size_t max_lag = static_cast<std::size_t>(order.p + s * seasonal.P + order.q + s * seasonal.Q);
    if (series.size() < static_cast<std::size_t>(10 * terms) || series.size() < lost + max_lag + 2)
        throw DomainError("series of length " + std::to_string(series.size()) + " is too short for the order");

    ArimaModel m;
    m.order_ = order;
    m.seasonal_ = seasonal;
    m.constant_ = options.include_constant;
    m.y_.assign(series.begin(), series.end());
    m.w_ = difference(series, order.d, seasonal.D, s);

    Problem prob{order, seasonal, options.include_constant, &m.w_};
    const double mean_w = std::accumulate(m.w_.begin(), m.w_.end(), 0.0) / static_cast<double>(m.w_.size());
    const int n_arma = prob.n_params() - (options.include_constant ? 1 : 0);

    std::vector<double> best;
    if (n_arma == 0) {
        if (options.include_constant) best = {mean_w};
    } else {
        // Starting points alternate sign and grow in magnitude with the index.
        const int k = options.start_index;
        const double magnitude = 0.1 * ((k + 1) / 2);
        const double init = k % 2 == 1 ? magnitude : -magnitude;
        // AR blocks start at +init, MA blocks at -init in partial
        // autocorrelation terms, i.e. every lag-1 coefficient equals init.
        std::vector<double> start(static_cast<std::size_t>(prob.n_params()), std::atanh(std::clamp(init, -0.9, 0.9)));
        const auto n_ar = static_cast<std::size_t>(order.p + seasonal.P);
        for (std::size_t i = n_ar; i < static_cast<std::size_t>(n_arma); ++i) start[i] = -start[i];
        if (options.include_constant) start.back() = mean_w;

        SimplexResult r = run_simplex(prob, start, options.max_iterations, 1e-8);
        int total_iter = r.iterations;
        if (!r.converged) {
            std::ostringstream diag;
            diag << "iterations=" << r.iterations << " css=" << r.value;
            throw FitError("ARIMA optimizer did not converge", diag.str());
        }
        // Simplex restarts from the incumbent until the objective stalls.
        for (int restart = 0; restart < 8; ++restart) {
            SimplexResult again = run_simplex(prob, r.x, options.max_iterations, 1e-9);
            total_iter += again.iterations;
            const bool stalled = std::abs(again.value - r.value) <= options.tolerance * (1.0 + std::abs(r.value));
            if (again.value <= r.value) r = again;
            if (stalled) break;
        }
        m.iterations_ = total_iter;
        best = prob.constrain(r.x);
    }

    const auto u = prob.unpack(best);
    m.ar_ = u.ar;
    m.sar_ = u.sar;
    m.ma_ = u.ma;
    m.sma_ = u.sma;
    m.mu_ = u.mu;
    const double ssr = prob.css(best, &m.residuals_);
    std::vector<double> ar_full, ma_full;
    Problem::expand(u, s, ar_full, ma_full);
    const double n_eff = static_cast<double>(m.w_.size() - (ar_full.size() - 1));
    m.sigma2_ = ssr / n_eff;
    m.loglik_ = m.sigma2_ > 0.0 ? -0.5 * n_eff * (std::log(2.0 * std::numbers::pi * m.sigma2_) + 1.0)
                                : std::numeric_limits<double>::infinity();
    return m;
}

std::vector<double> ArimaModel::forecast(int horizon) const {
    if (horizon <= 0) return {};
    const auto h = static_cast<std::size_t>(horizon);
    Problem::Unpacked u{ar_, sar_, ma_, sma_, mu_};
    std::vector<double> ar_full, ma_full;
    Problem::expand(u, seasonal_.s, ar_full, ma_full);

    std::vector<double> z(w_.size());
    for (std::size_t t = 0; t < w_.size(); ++t) z[t] = w_[t] - mu_;
    std::vector<double> e = residuals_;
    for (std::size_t k = 0; k < h; ++k) {
        const std::size_t t = z.size();
        double v = 0.0;
        for (std::size_t m = 1; m < ar_full.size() && m <= t; ++m) v += ar_full[m] * z[t - m];
        for (std::size_t m = 1; m < ma_full.size() && m <= t; ++m) v += ma_full[m] * e[t - m];
        z.push_back(v);
        e.push_back(0.0);
    }

    // Undo differencing with delta(B) = (1 - B)^d (1 - B^s)^D = 1 + sum c_k B^k.
    std::vector<double> delta{1.0};
    for (int k = 0; k < seasonal_.D; ++k) delta = poly_mul(delta, lag_poly(std::vector<double>{1.0}, seasonal_.s, -1.0));
    for (int k = 0; k < order_.d; ++k) delta = poly_mul(delta, {1.0, -1.0});

    std::vector<double> y = y_;
    std::vector<double> out;
    out.reserve(h);
    for (std::size_t k = 0; k < h; ++k) {
        const std::size_t t = y.size();
        double v = z[w_.size() + k] + mu_;
        for (std::size_t c = 1; c < delta.size(); ++c) v -= delta[c] * y[t - c];
        y.push_back(v);
        out.push_back(v);
    }
    return out;
}

}  // namespace skycast::stats
