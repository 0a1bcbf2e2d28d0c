#pragma once

#include <cstdint>
#include <stdexcept>

namespace regemu::analytics {

/// Model parameters for the workload / delay analysis.
/// Rates are per second; derived quantities follow from them.
struct ModelParams {
  int n_clients = 5;     // N: one writer plus N-1 readers
  int n_replicas = 5;    // n
  double lambda = 10.0;  // operation arrival rate per client
  double mu = 10.0;      // operation service rate
  double lambda_r = 20.0;  // delay rate for read round-trips
  double lambda_w = 20.0;  // delay rate for write round-trips

  int quorum() const { return n_replicas / 2 + 1; }
  double alpha() const { return lambda_r / (lambda_w + lambda_r); }
  // Per-queue window-count coefficients: P(d departures) = p0 for d = 0,
  // r_coeff * s_coeff^d for d >= 1.
  double r_coeff() const {
    const double a = 2.0 * lambda + mu;
    const double b = mu + lambda;
    return a * a / (2.0 * b * b);
  }
  double s_coeff() const { return 0.5 * mu / (mu + lambda); }
  double p0() const {
    const double f = lambda / (mu + lambda);
    return 0.5 * (1.0 + f * f);
  }
  double read_write_lag() const { return 1.0 / lambda; }  // t
  double prior_read_write_lag() const {                   // t'
    return (2.0 * lambda - mu) / (2.0 * lambda * mu);
  }

  void validate() const;
};

struct QuadratureSpec {
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  int max_subdivisions = 4000;
};

/// Thrown when adaptive quadrature cannot reach the requested tolerance.
struct QuadratureError : std::runtime_error {
  QuadratureError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_tolerance(achieved) {}
  double achieved_tolerance;
};

/// Thrown when the prior-read/write time lag t' is negative (mu > 2*lambda)
/// and clamping was not requested.
struct NegativeLagError : std::domain_error {
  explicit NegativeLagError(double lag)
      : std::domain_error("prior-read/write lag t' is negative; the model "
                          "assumes t' >= 0 (pass clamp_negative_lag to force "
                          "t' = 0)"),
        lag_seconds(lag) {}
  double lag_seconds;
};

double beta_fn(double x, double y);

/// Binomial coefficient as a double; 0 when b < 0 or b > a.
double binom_coeff(long long a, long long b);

/// Distribution of the number of operations one client queue completes
/// inside a read/write overlap window.
double p_d(int d, double lambda, double mu);

/// P{CP | R' = m}: probability that exactly m reads finish inside the
/// window, across the N-1 reader queues.
double p_cp_given_m(int n_clients, int m, double lambda, double mu);

enum class CpMode { Closed, Truncated };

/// Aggregated concurrency-pattern probability. Closed form is
/// 1 - p0^(N-1); Truncated sums m = 1..m_max (default N-1).
double p_cp(int n_clients, double lambda, double mu, CpMode mode,
            int m_max = -1);

/// P{r != R(w)}: a read that starts inside a write's window misses it.
double p_r_neq_w(const ModelParams& params);

/// The three-term quorum-order integral for the prior-read case.
/// Requires n > 2 and t' >= 0 unless clamp_negative_lag is set.
double j1_integral(const ModelParams& params, const QuadratureSpec& quad,
                   bool clamp_negative_lag = false);

/// P{r' != R(w) | r != R(w)}; exactly 1 for n = 2, else J1 / B(q, n-q+1)
/// clamped to [0, 1].
double p_rprime_neq_w_given(const ModelParams& params,
                            const QuadratureSpec& quad,
                            bool clamp_negative_lag = false);

/// Upper bound on P{RWP | R' = m}; 0 for m = 0 and for n = 2.
double p_rwp_given_m(const ModelParams& params, int m,
                     const QuadratureSpec& quad,
                     bool clamp_negative_lag = false);

/// Sum of P{RWP | R' = m} over m = 1..m_max (default N-1).
double p_rwp_aggregate(const ModelParams& params, const QuadratureSpec& quad,
                       int m_max = -1, bool clamp_negative_lag = false);

/// Rate of old-new inversions: sum over m of
/// P{CP | R' = m} * P{RWP | R' = m}.
double p_oni(const ModelParams& params, const QuadratureSpec& quad,
             int m_max = -1, bool clamp_negative_lag = false);

double t_prime(double lambda, double mu);
/// E{r_st - r'_ft}, the expected gap between a read and its predecessor.
double expected_read_gap(double lambda);

enum class BinsRole {
  ReadVsWrite,      // oracle for p_r_neq_w
  PriorReadVsWrite  // oracle for p_rprime_neq_w_given
};

struct McEstimate {
  double p = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
};

/// Direct Monte-Carlo simulation of the timed balls-into-bins experiments.
/// With deterministic_delays every delay equals its mean, so the returned
/// probability is exactly 0 or 1.
McEstimate mc_balls_into_bins(const ModelParams& params, BinsRole role,
                              std::uint64_t samples, std::uint64_t seed,
                              bool deterministic_delays = false);

}  // namespace regemu::analytics
