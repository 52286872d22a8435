// Serial reference vs OpenMP kernels on synthetic PMU-sized streams.
#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "feederlab/kernels.hpp"

namespace k = feederlab::kernels;

namespace {

struct Streams {
	std::vector<double> t, theta1, theta2, freq, power, out;
	std::vector<std::uint8_t> valid, keep;

	explicit Streams(std::size_t n)
	    : t(n), theta1(n), theta2(n), freq(n), power(n), out(n), valid(n, 1), keep(n) {
		std::mt19937_64 rng(11);
		std::normal_distribution<double> noise(0.0, 1.0);
		for (std::size_t i = 0; i < n; ++i) {
			t[i] = 0.02 * static_cast<double>(i);
			theta1[i] = std::remainder(0.3 + 1e-3 * static_cast<double>(i), 2.0 * M_PI);
			theta2[i] = std::remainder(theta1[i] - 0.015 + 1e-4 * noise(rng), 2.0 * M_PI);
			freq[i] = 50.0 + 0.01 * noise(rng);
			power[i] = 2e4 * noise(rng);
		}
	}
};

template <bool Parallel>
void abs_deviation(benchmark::State& st) {
	Streams s(static_cast<std::size_t>(st.range(0)));
	for (auto _ : st)
		benchmark::DoNotOptimize(Parallel ? k::parallel::abs_deviation_sum(s.freq, 50.0)
		                                  : k::serial::abs_deviation_sum(s.freq, 50.0));
	st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void moments(benchmark::State& st) {
	Streams s(static_cast<std::size_t>(st.range(0)));
	for (auto _ : st)
		benchmark::DoNotOptimize(Parallel ? k::parallel::moments(s.freq) : k::serial::moments(s.freq));
	st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void frequency(benchmark::State& st) {
	Streams s(static_cast<std::size_t>(st.range(0)));
	for (auto _ : st) {
		if (Parallel)
			k::parallel::frequency_from_angles(s.theta1, s.t, 50.0, s.out);
		else
			k::serial::frequency_from_angles(s.theta1, s.t, 50.0, s.out);
		benchmark::ClobberMemory();
	}
	st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void rocof(benchmark::State& st) {
	Streams s(static_cast<std::size_t>(st.range(0)));
	const std::size_t n = s.freq.size() - 3;
	k::RocofIn in{s.freq, s.power, s.valid, 3, 0.06, 1e3};
	k::RatioOut out{std::span(s.out).first(n), std::span(s.keep).first(n)};
	for (auto _ : st)
		benchmark::DoNotOptimize(Parallel ? k::parallel::rocof_ratios(in, out) : k::serial::rocof_ratios(in, out));
	st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void padd(benchmark::State& st) {
	Streams s(static_cast<std::size_t>(st.range(0)));
	k::PaddIn in{s.theta1, s.theta2, s.power, 0.015, 5e3};
	k::RatioOut out{s.out, s.keep};
	for (auto _ : st)
		benchmark::DoNotOptimize(Parallel ? k::parallel::padd_ratios(in, out) : k::serial::padd_ratios(in, out));
	st.SetItemsProcessed(st.iterations() * st.range(0));
}

// 30k frames is one 600 s run at 50 fps; the larger sizes show scaling.
#define FEEDERLAB_PAIR(fn)                                                                   \
	BENCHMARK(fn<false>)->Name(#fn "/serial")->RangeMultiplier(10)->Range(30'000, 3'000'000); \
	BENCHMARK(fn<true>)->Name(#fn "/omp")->RangeMultiplier(10)->Range(30'000, 3'000'000)

FEEDERLAB_PAIR(abs_deviation);
FEEDERLAB_PAIR(moments);
FEEDERLAB_PAIR(frequency);
FEEDERLAB_PAIR(rocof);
FEEDERLAB_PAIR(padd);

} // namespace

BENCHMARK_MAIN();
