// Batched population scoring against a plain fitness_of loop over the same
// 100,000 genomes and 512 cases. Exits nonzero below a 5x speedup.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <thread>
#include <vector>

#include "rpnlgp/benchmark.hpp"
#include "rpnlgp/evaluator.hpp"
#include "rpnlgp/fitness.hpp"

using namespace rpnlgp;

int main() {
  const std::size_t population = 100000;
  const ProblemSpec& spec = find_problem("I.11.19");
  const Dataset data = generate_dataset(spec, 1);
  const DatasetBatch& batch = data.train;
  const FitnessConfig fit{1000, batch.n_cases()};

  Rng rng(77);
  GenomeConfig cfg;
  Arena arena(population);
  for (std::size_t i = 0; i < population; ++i) arena[arena.acquire()].genome = random_genome(rng, cfg, spec.arity());

  using clock = std::chrono::steady_clock;
  PopulationEvaluator evaluator;
  auto t0 = clock::now();
  const std::span<const double> batched = evaluator.evaluate_population(arena, batch, fit);
  const double t_batched = std::chrono::duration<double>(clock::now() - t0).count();

  t0 = clock::now();
  std::size_t mismatches = 0;
  const auto alive = arena.alive();
  for (std::size_t i = 0; i < alive.size(); ++i) {
    const double s = fitness_of(arena[alive[i]].genome, batch, fit);
    mismatches += !(s == batched[i] || (std::isnan(s) && std::isnan(batched[i])));
  }
  const double t_loop = std::chrono::duration<double>(clock::now() - t0).count();

  const double speedup = t_loop / t_batched;
  const double cases = static_cast<double>(population) * batch.n_cases();
  std::printf("%u hardware threads, %d evaluator workers\n", std::thread::hardware_concurrency(), evaluator.workers());
  std::printf("batched %.2f s (%.1fM case-evals/s), fitness_of loop %.2f s (%.1fM/s), speedup %.2fx, %zu mismatches\n",
              t_batched, cases / t_batched / 1e6, t_loop, cases / t_loop / 1e6, speedup, mismatches);
  const bool pass = speedup >= 5.0 && mismatches == 0;
  std::printf("%s throughput: batched evaluation >= 5x the per-genome loop\n", pass ? "PASS" : "FAIL");
  return pass ? 0 : 1;
}
