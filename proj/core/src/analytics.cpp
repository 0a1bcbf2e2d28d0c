#include "regemu/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "regemu/quadrature.hpp"
#include "regemu/rng.hpp"

namespace regemu::analytics {

void ModelParams::validate() const {
  if (n_clients < 2) throw std::invalid_argument("n_clients must be >= 2");
  if (n_replicas < 2) throw std::invalid_argument("n_replicas must be >= 2");
  if (lambda <= 0 || mu <= 0) {
    throw std::invalid_argument("lambda and mu must be positive");
  }
  if (lambda_r <= 0 || lambda_w <= 0) {
    throw std::invalid_argument("lambda_r and lambda_w must be positive");
  }
}

double beta_fn(double x, double y) {
  if (x <= 0.0 || y <= 0.0) {
    throw std::domain_error("beta_fn requires positive arguments");
  }
  return std::exp(std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y));
}

double binom_coeff(long long a, long long b) {
  if (b < 0 || b > a) return 0.0;
  b = std::min(b, a - b);
  double res = 1.0;
  for (long long i = 1; i <= b; ++i) {
    res *= static_cast<double>(a - b + i);
    res /= static_cast<double>(i);
  }
  return res;
}

double p_d(int d, double lambda, double mu) {
  if (d < 0) throw std::domain_error("d must be non-negative");
  if (lambda <= 0 || mu <= 0) {
    throw std::invalid_argument("rates must be positive");
  }
  const double f = lambda / (mu + lambda);
  if (d == 0) return 0.5 * (1.0 + f * f);
  const double a = 2.0 * lambda + mu;
  const double b = mu + lambda;
  const double r = a * a / (2.0 * b * b);
  const double s = 0.5 * mu / b;
  return r * std::pow(s, d);
}

double p_cp_given_m(int n_clients, int m, double lambda, double mu) {
  if (n_clients < 2) throw std::invalid_argument("n_clients must be >= 2");
  if (m < 0) throw std::domain_error("m must be non-negative");
  const double p0 = p_d(0, lambda, mu);
  if (m == 0) return std::pow(p0, n_clients - 1);

  const double a = 2.0 * lambda + mu;
  const double b = mu + lambda;
  const double r = a * a / (2.0 * b * b);
  const double s = 0.5 * mu / b;
  const double sm = std::pow(s, m);

  double sum = 0.0;
  for (int k = 0; k <= n_clients - 2; ++k) {
    const double c = binom_coeff(n_clients - 1, k) *
                     binom_coeff(m - 1, n_clients - k - 2);
    if (c == 0.0) continue;
    sum += c * std::pow(p0, k) * std::pow(r, n_clients - k - 1) * sm;
  }
  return sum;
}

double p_cp(int n_clients, double lambda, double mu, CpMode mode, int m_max) {
  if (n_clients < 2) throw std::invalid_argument("n_clients must be >= 2");
  if (mode == CpMode::Closed) {
    return 1.0 - std::pow(p_d(0, lambda, mu), n_clients - 1);
  }
  if (m_max < 0) m_max = n_clients - 1;
  double sum = 0.0;
  for (int m = 1; m <= m_max; ++m) {
    sum += p_cp_given_m(n_clients, m, lambda, mu);
  }
  return sum;
}

double p_r_neq_w(const ModelParams& params) {
  params.validate();
  const int n = params.n_replicas;
  const int q = params.quorum();
  const double a = params.alpha();
  const double t = params.read_write_lag();
  return std::exp(-q * params.lambda_w * t) * std::pow(a, q) *
         beta_fn(q, a * (n - q) + 1.0) / beta_fn(q, n - q + 1.0);
}

namespace {

struct J1Terms {
  double lr, lw, tp;
  int n, q;
  double bracket_const;  // (1 - e^{-lr t'}) / lr
  double bracket_limit;  // value of bracket(s) as s -> inf

  double bracket(double s) const {
    return bracket_const + std::exp(lw * tp) *
                               (std::exp(-(lw + lr) * tp) -
                                std::exp(-(lw + lr) * s)) /
                               (lw + lr);
  }
};

double integrate_or_throw(const std::function<double(double)>& f, double a,
                          double b, const QuadratureSpec& quad,
                          const char* what) {
  const auto res =
      num::integrate(f, a, b, quad.abs_tol, quad.rel_tol, quad.max_subdivisions);
  if (!res.converged) {
    throw QuadratureError(std::string("quadrature did not converge in ") + what,
                          res.error_estimate);
  }
  return res.value;
}

// Upper cutoff for an integrand bounded by coeff * e^{-rate * s}: the
// discarded tail is below tail_budget.
double tail_cutoff(double from, double coeff, double rate, double tail_budget) {
  if (coeff <= 0.0) return from;
  const double t = std::log(coeff / (rate * tail_budget)) / rate;
  return std::max(from, t) + 1.0 / rate;
}

}  // namespace

double j1_integral(const ModelParams& params, const QuadratureSpec& quad,
                   bool clamp_negative_lag) {
  params.validate();
  const int n = params.n_replicas;
  if (n <= 2) throw std::domain_error("j1_integral requires n > 2");

  double tp = params.prior_read_write_lag();
  if (tp < 0.0) {
    if (!clamp_negative_lag) throw NegativeLagError(tp);
    tp = 0.0;
  }

  J1Terms c{params.lambda_r, params.lambda_w, tp, n, params.quorum(), 0.0, 0.0};
  c.bracket_const = (1.0 - std::exp(-c.lr * tp)) / c.lr;
  c.bracket_limit = c.bracket_const + std::exp(-c.lr * tp) / (c.lw + c.lr);

  const int q = c.q;
  const double lr = c.lr;
  const double lw = c.lw;
  const double tail_budget = quad.abs_tol / 10.0;

  double total = 0.0;

  // [0, t'] leg: all q prior-read balls land before the write sends.
  total += lr * integrate_or_throw(
                    [&](double s) {
                      return std::exp(-lr * (n - q + 1) * s) *
                             std::pow(1.0 - std::exp(-lr * s), q - 1);
                    },
                    0.0, tp, quad, "J1 [0,t'] term");

  const double denom = binom_coeff(n, n - q);
  for (int k = 0; k <= n - q; ++k) {
    // First family: the slowest prior-read ball lands in a bin the write
    // also targets.
    const double c1 =
        binom_coeff(q - 1, k - 1) * binom_coeff(n - q, n - q - k) / denom;
    if (c1 > 0.0) {
      auto f = [&, k](double s) {
        return std::exp(-(lw + lr) * s) * std::pow(c.bracket(s), k - 1) *
               std::pow((1.0 - std::exp(-lr * s)) / lr, q - k) *
               std::exp(-lr * (n - q) * s);
      };
      const double rate = lw + lr + lr * (n - q);
      const double coeff = std::pow(lr, q) * std::exp(lw * tp) *
                           std::pow(c.bracket_limit, k - 1) *
                           std::pow(1.0 / lr, q - k);
      const double hi = tail_cutoff(tp, coeff, rate, tail_budget);
      total += c1 * std::pow(lr, q) * std::exp(lw * tp) *
               integrate_or_throw(f, tp, hi, quad, "J1 first tail term");
    }

    // Second family: it lands in a bin the write misses.
    const double c2 =
        binom_coeff(q - 1, k) * binom_coeff(n - q, n - q - k) / denom;
    if (c2 > 0.0) {
      auto g = [&, k](double s) {
        return std::exp(-lr * s) * std::pow(c.bracket(s), k) *
               std::pow((1.0 - std::exp(-lr * s)) / lr, q - 1 - k) *
               std::exp(-lr * (n - q) * s);
      };
      const double rate = lr * (n - q + 1);
      const double coeff = std::pow(lr, q) * std::pow(c.bracket_limit, k) *
                           std::pow(1.0 / lr, q - 1 - k);
      const double hi = tail_cutoff(tp, coeff, rate, tail_budget);
      total += c2 * std::pow(lr, q) *
               integrate_or_throw(g, tp, hi, quad, "J1 second tail term");
    }
  }
  return total;
}

double p_rprime_neq_w_given(const ModelParams& params,
                            const QuadratureSpec& quad,
                            bool clamp_negative_lag) {
  params.validate();
  const int n = params.n_replicas;
  if (n == 2) return 1.0;
  const int q = params.quorum();
  const double raw =
      j1_integral(params, quad, clamp_negative_lag) / beta_fn(q, n - q + 1.0);
  if (raw < -1e-6 || raw > 1.0 + 1e-6) {
    throw QuadratureError("p_rprime_neq_w_given outside [0,1] beyond noise",
                          std::abs(raw < 0 ? raw : raw - 1.0));
  }
  return std::clamp(raw, 0.0, 1.0);
}

double p_rwp_given_m(const ModelParams& params, int m,
                     const QuadratureSpec& quad, bool clamp_negative_lag) {
  if (m < 0) throw std::domain_error("m must be non-negative");
  if (m == 0) return 0.0;
  if (params.n_replicas == 2) return 0.0;
  const double miss = p_r_neq_w(params);
  const double prior = p_rprime_neq_w_given(params, quad, clamp_negative_lag);
  return miss * (1.0 - std::pow(prior, m));
}

double p_rwp_aggregate(const ModelParams& params, const QuadratureSpec& quad,
                       int m_max, bool clamp_negative_lag) {
  params.validate();
  if (m_max < 0) m_max = params.n_clients - 1;
  if (params.n_replicas == 2) return 0.0;
  const double miss = p_r_neq_w(params);
  const double prior = p_rprime_neq_w_given(params, quad, clamp_negative_lag);
  double sum = 0.0;
  for (int m = 1; m <= m_max; ++m) {
    sum += miss * (1.0 - std::pow(prior, m));
  }
  return sum;
}

double p_oni(const ModelParams& params, const QuadratureSpec& quad, int m_max,
             bool clamp_negative_lag) {
  params.validate();
  if (m_max < 0) m_max = params.n_clients - 1;
  if (params.n_replicas == 2) return 0.0;
  const double miss = p_r_neq_w(params);
  const double prior = p_rprime_neq_w_given(params, quad, clamp_negative_lag);
  double sum = 0.0;
  for (int m = 1; m <= m_max; ++m) {
    sum += p_cp_given_m(params.n_clients, m, params.lambda, params.mu) * miss *
           (1.0 - std::pow(prior, m));
  }
  return sum;
}

double t_prime(double lambda, double mu) {
  if (lambda <= 0 || mu <= 0) {
    throw std::invalid_argument("rates must be positive");
  }
  return (2.0 * lambda - mu) / (2.0 * lambda * mu);
}

double expected_read_gap(double lambda) {
  if (lambda <= 0) throw std::invalid_argument("lambda must be positive");
  return 1.0 / (2.0 * lambda);
}

McEstimate mc_balls_into_bins(const ModelParams& params, BinsRole role,
                              std::uint64_t samples, std::uint64_t seed,
                              bool deterministic_delays) {
  params.validate();
  if (samples < 10000) {
    throw std::invalid_argument("mc_balls_into_bins needs >= 10^4 samples");
  }
  const int n = params.n_replicas;
  const int q = params.quorum();

  Rng rng = RngFactory(seed).stream("balls-into-bins");
  std::exponential_distribution<double> first_delay(
      role == BinsRole::ReadVsWrite ? params.lambda_w : params.lambda_r);
  std::exponential_distribution<double> second_delay(
      role == BinsRole::ReadVsWrite ? params.lambda_r : params.lambda_w);
  const double first_mean = 1.0 / (role == BinsRole::ReadVsWrite
                                       ? params.lambda_w
                                       : params.lambda_r);
  const double second_mean = 1.0 / (role == BinsRole::ReadVsWrite
                                        ? params.lambda_r
                                        : params.lambda_w);
  const double lag = role == BinsRole::ReadVsWrite
                         ? params.read_write_lag()
                         : params.prior_read_write_lag();

  std::vector<double> d1(n), d2(n);
  std::vector<int> order(n), targets(n);

  std::uint64_t hits = 0;
  for (std::uint64_t it = 0; it < samples; ++it) {
    for (int i = 0; i < n; ++i) {
      d1[i] = deterministic_delays ? first_mean : first_delay(rng);
      d2[i] = deterministic_delays ? second_mean : second_delay(rng);
    }

    if (role == BinsRole::ReadVsWrite) {
      // Robot 1 is the write at time 0; robot 2 is the read at time `lag`.
      // The read's quorum is the q bins whose read balls land first.
      std::iota(order.begin(), order.end(), 0);
      std::partial_sort(order.begin(), order.begin() + q, order.end(),
                        [&](int a, int b) { return d2[a] < d2[b]; });
      bool miss = true;
      for (int j = 0; j < q && miss; ++j) {
        const int bin = order[j];
        miss = d1[bin] > lag + d2[bin];
      }
      hits += miss ? 1 : 0;
    } else {
      // Robot 1 is the prior read at time 0; robot 2 is the write at time
      // `lag`, sending only n-q balls into distinct random bins (the other
      // q are known to arrive too late).
      std::iota(order.begin(), order.end(), 0);
      std::partial_sort(order.begin(), order.begin() + q, order.end(),
                        [&](int a, int b) { return d1[a] < d1[b]; });

      std::iota(targets.begin(), targets.end(), 0);
      const int p = n - q;
      for (int j = 0; j < p; ++j) {
        std::uniform_int_distribution<int> pick(j, n - 1);
        std::swap(targets[j], targets[pick(rng)]);
      }
      bool miss = true;
      for (int j = 0; j < q && miss; ++j) {
        const int bin = order[j];
        bool targeted = false;
        for (int u = 0; u < p && !targeted; ++u) {
          targeted = targets[u] == bin;
        }
        if (targeted) {
          miss = lag + d2[bin] > d1[bin];
        }
      }
      hits += miss ? 1 : 0;
    }
  }

  McEstimate est;
  est.samples = samples;
  est.p = static_cast<double>(hits) / static_cast<double>(samples);
  est.std_error = std::sqrt(est.p * (1.0 - est.p) / static_cast<double>(samples));
  return est;
}

}  // namespace regemu::analytics
