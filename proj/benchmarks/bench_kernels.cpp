#include <random>

#include <benchmark/benchmark.h>

#include "subsumlab/group.hpp"
#include "subsumlab/search.hpp"
#include "subsumlab/sequence.hpp"
#include "subsumlab/setpartition.hpp"
#include "subsumlab/verifiers.hpp"

using namespace subsum;

namespace {

Sequence random_sequence(const GroupSpec& g, std::size_t len, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Sequence s(g);
  for (std::size_t i = 0; i < len; ++i) s.add(static_cast<Elem>(rng() % static_cast<std::uint64_t>(g.order())));
  return s;
}

Subset random_subset(const GroupSpec& g, std::size_t size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Subset a(g);
  while (a.size() < size) a.insert(static_cast<Elem>(rng() % static_cast<std::uint64_t>(g.order())));
  return a;
}

void BM_Sumset(benchmark::State& state) {
  const GroupSpec g = GroupSpec::make({state.range(0)});
  const Subset a = random_subset(g, static_cast<std::size_t>(state.range(0) / 4), 1);
  const Subset b = random_subset(g, static_cast<std::size_t>(state.range(0) / 4), 2);
  for (auto _ : state) benchmark::DoNotOptimize(sumset(a, b));
}
BENCHMARK(BM_Sumset)->Arg(64)->Arg(512)->Arg(4096);

void BM_Stabilizer(benchmark::State& state) {
  const GroupSpec g = GroupSpec::make({state.range(0)});
  const Subset a = random_subset(g, static_cast<std::size_t>(state.range(0) / 2), 3);
  for (auto _ : state) benchmark::DoNotOptimize(stabilizer(a));
}
BENCHMARK(BM_Stabilizer)->Arg(64)->Arg(512)->Arg(4096);

void BM_SubsetSumTable(benchmark::State& state) {
  const GroupSpec g = GroupSpec::make({64});
  const Sequence s = random_sequence(g, static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(subsum_table(s, s.length()));
}
BENCHMARK(BM_SubsetSumTable)->Arg(8)->Arg(32)->Arg(128);

void BM_SubsumProfile(benchmark::State& state) {
  const GroupSpec g = GroupSpec::make({4, 16});
  const Sequence s = random_sequence(g, 40, 5);
  for (auto _ : state) benchmark::DoNotOptimize(subsum_profile(s, 10, 40));
}
BENCHMARK(BM_SubsumProfile);

void BM_EnumerateSubgroups(benchmark::State& state) {
  const GroupSpec g = GroupSpec::make({2, 4, 8});
  for (auto _ : state) benchmark::DoNotOptimize(enumerate_subgroups(g));
}
BENCHMARK(BM_EnumerateSubgroups);

void BM_PartitionSolve(benchmark::State& state) {
  const GroupSpec g = GroupSpec::make({16});
  const Sequence s = random_sequence(g, static_cast<std::size_t>(state.range(0)), 6);
  const std::int64_t n = std::max<std::int64_t>(s.height(), 3);
  for (auto _ : state) benchmark::DoNotOptimize(partition_solve(s, s, n));
}
BENCHMARK(BM_PartitionSolve)->Arg(12)->Arg(24);

void BM_MainPipeline(benchmark::State& state) {
  const GroupSpec g = GroupSpec::make({4});
  Sequence s(g);
  s.add(0, 6);
  s.add(2, 6);
  Sequence sp(g);
  sp.add(0, 5);
  sp.add(2, 5);
  for (auto _ : state) benchmark::DoNotOptimize(main_pipeline(g, s, sp, 5));
}
BENCHMARK(BM_MainPipeline);

void BM_ClassifySmallSumset(benchmark::State& state) {
  const GroupSpec g = GroupSpec::make({3, 3});
  Subset a(g);
  for (auto c : {std::vector<std::int64_t>{1, 0}, {2, 0}, {0, 1}}) a.insert(g.index_of(c));
  for (auto _ : state) benchmark::DoNotOptimize(classify_small_sumset(a, 3));
}
BENCHMARK(BM_ClassifySmallSumset);

void BM_AuditSmall(benchmark::State& state) {
  AuditConfig c;
  c.max_group_order = 6;
  c.exhaustive_len_cap = 5;
  c.checkers = audit_checker_ids();
  c.jobs = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_audit(c));
}
BENCHMARK(BM_AuditSmall)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_Davenport(benchmark::State& state) {
  const GroupSpec g = GroupSpec::make({2, 6});
  for (auto _ : state) benchmark::DoNotOptimize(davenport_bruteforce(g));
}
BENCHMARK(BM_Davenport)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
