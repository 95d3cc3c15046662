#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <set>

#include "rpnlgp/benchmark.hpp"
#include "rpnlgp/errors.hpp"
#include "rpnlgp/evaluator.hpp"

using namespace rpnlgp;

namespace {

void fill(Arena& arena, Rng& rng, int n, int arity) {
  GenomeConfig cfg;
  for (int i = 0; i < n; ++i) arena[arena.acquire()].genome = random_genome(rng, cfg, arity);
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("arena basics") {
  Arena arena(10);
  const SlotId a = arena.acquire();
  arena.release(a);
  CHECK(arena.acquire() == a);

  for (int i = 0; i < 9; ++i) arena.acquire();
  CHECK(arena.alive_count() == 10);
  CHECK_THROWS_AS(arena.acquire(), CapacityError);

  arena.release(3);
  CHECK_THROWS_AS(arena.release(3), UsageError);
  CHECK_THROWS_AS(arena.release(99), UsageError);
  CHECK_FALSE(arena[3].alive);
  CHECK(arena.dead_pool_size() == 1);
}

TEST_CASE("arena against a set-based reference allocator") {
  const std::size_t cap = 64;
  Arena arena(cap);
  std::set<SlotId> alive, dead, used;
  std::vector<SlotId> dead_stack;
  Rng rng(1);
  for (int step = 0; step < 1000000; ++step) {
    if (alive.empty() || (alive.size() < cap && bernoulli(rng, 0.5))) {
      const SlotId s = arena.acquire();
      REQUIRE(alive.count(s) == 0);
      if (!dead_stack.empty()) {
        REQUIRE(s == dead_stack.back());  // LIFO reuse before fresh slots
        dead_stack.pop_back();
        dead.erase(s);
      } else {
        REQUIRE(used.count(s) == 0);
      }
      alive.insert(s);
      used.insert(s);
    } else {
      auto it = alive.begin();
      std::advance(it, static_cast<long>(uniform_index(rng, alive.size())));
      const SlotId s = *it;
      arena.release(s);
      alive.erase(it);
      dead.insert(s);
      dead_stack.push_back(s);
    }
    REQUIRE(arena.alive_count() == alive.size());
    REQUIRE(arena.dead_pool_size() == dead.size());
    REQUIRE(arena.alive_count() + arena.dead_pool_size() + arena.never_used() == cap);
  }
  const std::set<SlotId> listed(arena.alive().begin(), arena.alive().end());
  CHECK(listed == alive);
  for (SlotId s : alive) CHECK(arena[s].alive);
}

TEST_CASE("batched kernel matches the single-case VM bit for bit") {
  const Dataset data = generate_dataset(find_problem("III.4.32"), 2);
  Rng rng(7);
  GenomeConfig cfg;
  KernelScratch scratch;
  std::vector<EvalOutcome> out(static_cast<std::size_t>(data.train.n_cases()));
  for (int t = 0; t < 500; ++t) {
    const Genome g = random_genome(rng, cfg, 4);
    eval_cases(g, data.train, scratch, out);
    for (int i = 0; i < data.train.n_cases(); ++i) {
      const EvalOutcome a = eval(g, data.train.row(i));
      const EvalOutcome b = out[static_cast<std::size_t>(i)];
      REQUIRE(a.is_valid() == b.is_valid());
      if (a.is_valid()) REQUIRE(same_bits(a.value(), b.value()));
    }
  }
}

TEST_CASE("evaluate_population") {
  const ProblemSpec& spec = find_problem("I.11.19");
  const Dataset data = generate_dataset(spec, 3);
  FitnessConfig fit;

  SUBCASE("exact model scores M times the case count") {
    Arena arena(4);
    arena[arena.acquire()].genome = parse_text("x0 x1 * x2 x3 * + x4 x5 * +");
    PopulationEvaluator ev(1);
    const auto scores = ev.evaluate_population(arena, data.train, fit);
    REQUIRE(scores.size() == 1);
    CHECK(scores[0] == doctest::Approx(512000.0).epsilon(1e-12));
  }

  Arena arena(2000);
  Rng rng(5);
  fill(arena, rng, 1000, spec.arity());
  std::vector<double> sequential;
  for (SlotId s : arena.alive()) sequential.push_back(fitness_of(arena[s].genome, data.train, fit));

  SUBCASE("equals a sequential fitness_of loop") {
    PopulationEvaluator ev(1);
    const auto scores = ev.evaluate_population(arena, data.train, fit);
    REQUIRE(scores.size() == sequential.size());
    for (std::size_t i = 0; i < scores.size(); ++i) REQUIRE(same_bits(scores[i], sequential[i]));
    for (std::size_t i = 0; i < scores.size(); ++i) REQUIRE(same_bits(arena[arena.alive()[i]].score, scores[i]));
  }
  SUBCASE("independent of worker count and chunk size") {
    for (int workers : {1, 2, 4}) {
      PopulationEvaluator ev(workers);
      for (std::size_t chunk : {std::size_t{0}, std::size_t{1}, std::size_t{37}, std::size_t{1000}, std::size_t{5000}}) {
        const std::vector<double> scores = [&] {
          const auto s = chunk == 0 ? ev.evaluate_population(arena, data.train, fit)
                                    : ev.evaluate_in_chunks(arena, data.train, fit, chunk);
          return std::vector<double>(s.begin(), s.end());
        }();
        REQUIRE(scores.size() == sequential.size());
        for (std::size_t i = 0; i < scores.size(); ++i) REQUIRE(same_bits(scores[i], sequential[i]));
      }
    }
  }
  SUBCASE("accounting") {
    PopulationEvaluator ev(2);
    const DatasetBatch small = data.train.head(100);
    for (int g = 0; g < 7; ++g) ev.evaluate_population(arena, small, FitnessConfig{1000, 100});
    CHECK(ev.stats().total_model_evaluations == 7u * 1000u);
    CHECK(ev.stats().total_case_evaluations == 7u * 1000u * 100u);
  }
  SUBCASE("score reuse skips only unchanged survivors") {
    PopulationEvaluator ev(1);
    ev.set_reuse_scores(true);
    ev.evaluate_population(arena, data.train, fit);
    CHECK(ev.stats().total_model_evaluations == 1000u);
    GenomeConfig cfg;
    for (int i = 0; i < 100; ++i) arena.release(arena.alive()[uniform_index(rng, arena.alive_count())]);
    for (int i = 0; i < 40; ++i) arena[arena.acquire()].genome = random_genome(rng, cfg, spec.arity());
    const auto scores = ev.evaluate_population(arena, data.train, fit);
    CHECK(ev.stats().total_model_evaluations == 1040u);
    CHECK(ev.stats().total_case_evaluations == 1040u * 512u);
    const auto alive = arena.alive();
    for (std::size_t i = 0; i < alive.size(); ++i) {
      REQUIRE(same_bits(scores[i], fitness_of(arena[alive[i]].genome, data.train, fit)));
    }
  }
  SUBCASE("max_chunk must be positive") {
    PopulationEvaluator ev(1);
    CHECK_THROWS_AS(ev.evaluate_in_chunks(arena, data.train, fit, 0), UsageError);
  }
}

TEST_CASE("a stable generation loop touches no new slots") {
  Arena arena(600);
  Rng rng(2);
  fill(arena, rng, 300, 3);
  const Dataset data = generate_dataset(find_problem("I.30.5"), 1);
  PopulationEvaluator ev(1);
  GenomeConfig cfg;
  for (int g = 0; g < 3; ++g) {  // warm-up
    ev.evaluate_population(arena, data.train, {});
    for (int i = 0; i < 50; ++i) arena.release(arena.alive()[uniform_index(rng, arena.alive_count())]);
    for (int i = 0; i < 50; ++i) arena[arena.acquire()].genome = random_genome(rng, cfg, 3);
  }
  const std::size_t fresh = arena.fresh_slot_count();
  for (int g = 0; g < 50; ++g) {
    ev.evaluate_population(arena, data.train, {});
    for (int i = 0; i < 50; ++i) arena.release(arena.alive()[uniform_index(rng, arena.alive_count())]);
    for (int i = 0; i < 50; ++i) arena[arena.acquire()].genome = random_genome(rng, cfg, 3);
  }
  CHECK(arena.fresh_slot_count() == fresh);
  CHECK(arena.alive_count() == 300);
}
