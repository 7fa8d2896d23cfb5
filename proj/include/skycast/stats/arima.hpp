#pragma once

#include <span>
#include <string>
#include <vector>

namespace skycast::stats {

struct ArimaOrder {
    int p = 0;
    int d = 0;
    int q = 0;
};

struct SeasonalOrder {
    int P = 0;
    int D = 0;
    int Q = 0;
    int s = 0;  // 0 disables the seasonal part
};

struct ArimaOptions {
    /// Mean when no differencing is applied, drift otherwise.
    bool include_constant = false;
    /// Selects the starting point of the simplex search (0, 1, 2, ...), so
    /// convergence can be checked from several initializations.
    int start_index = 0;
    int max_iterations = 20000;
    double tolerance = 1e-10;
};

/// Seasonal ARIMA fitted by conditional sum of squares:
///   phi(B) Phi(B^s) (w_t - mu) = theta(B) Theta(B^s) e_t,
///   w = (1 - B)^d (1 - B^s)^D y.
class ArimaModel {
public:
    /// Throws DomainError for series too short for the order and FitError when
    /// the optimizer does not converge.
    static ArimaModel fit(std::span<const double> series, ArimaOrder order, SeasonalOrder seasonal = {},
                          const ArimaOptions& options = {});

    std::vector<double> forecast(int horizon) const;

    const std::vector<double>& ar() const { return ar_; }
    const std::vector<double>& ma() const { return ma_; }
    const std::vector<double>& seasonal_ar() const { return sar_; }
    const std::vector<double>& seasonal_ma() const { return sma_; }
    double constant() const { return mu_; }
    double sigma2() const { return sigma2_; }
    /// Gaussian conditional log-likelihood at the optimum.
    double log_likelihood() const { return loglik_; }
    /// In-sample residuals of the differenced series (zeros before the first
    /// conditioned observation).
    const std::vector<double>& residuals() const { return residuals_; }
    int iterations() const { return iterations_; }

private:
    ArimaOrder order_;
    SeasonalOrder seasonal_;
    bool constant_ = false;
    std::vector<double> y_;
    std::vector<double> w_;
    std::vector<double> ar_, ma_, sar_, sma_;
    double mu_ = 0.0;
    double sigma2_ = 0.0;
    double loglik_ = 0.0;
    std::vector<double> residuals_;
    int iterations_ = 0;
};

/// Applies (1 - B)^d (1 - B^s)^D; the result is shorter by d + s*D.
std::vector<double> difference(std::span<const double> y, int d, int D, int s);

}  // namespace skycast::stats
