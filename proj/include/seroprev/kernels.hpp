#pragma once

// Data-parallel inner loops of the sampler and poststratification, each with
// a serial reference implementation and an OpenMP variant. Reductions use
// fixed-size chunks combined in order, so results are bit-identical across
// thread counts; the latent update draws from keyed per-participant streams
// for the same reason.

#include <cstdint>
#include <vector>

#include "seroprev/domain.hpp"

namespace seroprev::kernels {

inline constexpr std::size_t kChunk = 512;

/// Sum_i log Pr(T_i | params, D_i).
double test_loglik_serial(const std::vector<TestPanel>& panels,
                          const std::vector<std::uint8_t>& latent,
                          const TestParams& params);
double test_loglik(const std::vector<TestPanel>& panels,
                   const std::vector<std::uint8_t>& latent,
                   const TestParams& params);

/// Sum_i D_i log(expit(eta_i)) + (1 - D_i) log(1 - expit(eta_i)).
double bernoulli_loglik_serial(const std::vector<double>& logits,
                               const std::vector<std::uint8_t>& latent);
double bernoulli_loglik(const std::vector<double>& logits,
                        const std::vector<std::uint8_t>& latent);

/// Gibbs update of every latent indicator: D_i ~ Bernoulli of its exact full
/// conditional. The uniform for participant i comes from (key, i), so the
/// result is independent of scheduling.
void update_latent_serial(const std::vector<TestPanel>& panels,
                          const std::vector<double>& pi,
                          const TestParams& params, std::uint64_t key,
                          std::vector<std::uint8_t>& latent);
void update_latent(const std::vector<TestPanel>& panels,
                   const std::vector<double>& pi, const TestParams& params,
                   std::uint64_t key, std::vector<std::uint8_t>& latent);

/// Sum_k values[k] * weights[k], deterministic chunked reduction.
double weighted_sum_serial(const std::vector<double>& values,
                           const std::vector<double>& weights);
double weighted_sum(const std::vector<double>& values,
                    const std::vector<double>& weights);

}  // namespace seroprev::kernels
