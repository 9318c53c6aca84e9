#include "seroprev/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "seroprev/rng.hpp"
#include "seroprev/testmodel.hpp"

namespace seroprev::kernels {

namespace {

// Evaluates a per-chunk partial sum in parallel, then combines chunks in
// index order so the result does not depend on the thread count.
template <typename ChunkFn>
double chunked_sum(std::size_t n, ChunkFn&& chunk_sum) {
  const std::size_t nchunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(nchunks, 0.0);
#pragma omp parallel for schedule(static)
  for (long long c = 0; c < static_cast<long long>(nchunks); ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * kChunk;
    const std::size_t hi = std::min(lo + kChunk, n);
    partial[static_cast<std::size_t>(c)] = chunk_sum(lo, hi);
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

double test_loglik_range(const std::vector<TestPanel>& panels,
                         const std::vector<std::uint8_t>& latent,
                         const TestParams& params, std::size_t lo,
                         std::size_t hi) {
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i)
    s += std::log(panel_likelihood(panels[i], latent[i], params));
  return s;
}

double bernoulli_range(const std::vector<double>& logits,
                       const std::vector<std::uint8_t>& latent, std::size_t lo,
                       std::size_t hi) {
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    const double pi = expit(logits[i]);
    s += latent[i] ? std::log(pi) : std::log1p(-pi);
  }
  return s;
}

double weighted_range(const std::vector<double>& values,
                      const std::vector<double>& weights, std::size_t lo,
                      std::size_t hi) {
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) s += values[i] * weights[i];
  return s;
}

}  // namespace

double test_loglik_serial(const std::vector<TestPanel>& panels,
                          const std::vector<std::uint8_t>& latent,
                          const TestParams& params) {
  double total = 0.0;
  for (std::size_t lo = 0; lo < panels.size(); lo += kChunk)
    total += test_loglik_range(panels, latent, params, lo,
                               std::min(lo + kChunk, panels.size()));
  return total;
}

double test_loglik(const std::vector<TestPanel>& panels,
                   const std::vector<std::uint8_t>& latent,
                   const TestParams& params) {
  return chunked_sum(panels.size(), [&](std::size_t lo, std::size_t hi) {
    return test_loglik_range(panels, latent, params, lo, hi);
  });
}

double bernoulli_loglik_serial(const std::vector<double>& logits,
                               const std::vector<std::uint8_t>& latent) {
  double total = 0.0;
  for (std::size_t lo = 0; lo < logits.size(); lo += kChunk)
    total += bernoulli_range(logits, latent, lo,
                             std::min(lo + kChunk, logits.size()));
  return total;
}

double bernoulli_loglik(const std::vector<double>& logits,
                        const std::vector<std::uint8_t>& latent) {
  return chunked_sum(logits.size(), [&](std::size_t lo, std::size_t hi) {
    return bernoulli_range(logits, latent, lo, hi);
  });
}

void update_latent_serial(const std::vector<TestPanel>& panels,
                          const std::vector<double>& pi,
                          const TestParams& params, std::uint64_t key,
                          std::vector<std::uint8_t>& latent) {
  if (latent.size() != panels.size() || pi.size() != panels.size())
    throw std::invalid_argument("update_latent: size mismatch");
  for (std::size_t i = 0; i < panels.size(); ++i) {
    const double p = latent_full_conditional(panels[i], pi[i], params);
    latent[i] = rng::keyed_uniform(key, i) < p ? 1 : 0;
  }
}

void update_latent(const std::vector<TestPanel>& panels,
                   const std::vector<double>& pi, const TestParams& params,
                   std::uint64_t key, std::vector<std::uint8_t>& latent) {
  if (latent.size() != panels.size() || pi.size() != panels.size())
    throw std::invalid_argument("update_latent: size mismatch");
  const long long n = static_cast<long long>(panels.size());
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const double p = latent_full_conditional(panels[idx], pi[idx], params);
    latent[idx] = rng::keyed_uniform(key, idx) < p ? 1 : 0;
  }
}

double weighted_sum_serial(const std::vector<double>& values,
                           const std::vector<double>& weights) {
  double total = 0.0;
  for (std::size_t lo = 0; lo < values.size(); lo += kChunk)
    total +=
        weighted_range(values, weights, lo, std::min(lo + kChunk, values.size()));
  return total;
}

double weighted_sum(const std::vector<double>& values,
                    const std::vector<double>& weights) {
  return chunked_sum(values.size(), [&](std::size_t lo, std::size_t hi) {
    return weighted_range(values, weights, lo, hi);
  });
}

}  // namespace seroprev::kernels
