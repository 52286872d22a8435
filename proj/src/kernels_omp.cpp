#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "feederlab/foundation.hpp"
#include "feederlab/kernels.hpp"

namespace feederlab::kernels {

int max_threads() {
#ifdef _OPENMP
	return omp_get_max_threads();
#else
	return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
	omp_set_num_threads(n);
#else
	(void)n;
#endif
}

namespace parallel {

namespace {

std::ptrdiff_t blocks_of(std::size_t n) {
	return static_cast<std::ptrdiff_t>((n + kBlock - 1) / kBlock);
}

// Partial sums per fixed block, combined in block order.
template <typename F>
double blocked_sum(std::size_t n, F&& term) {
	const std::ptrdiff_t nb = blocks_of(n);
	std::vector<double> partial(static_cast<std::size_t>(nb), 0.0);
#pragma omp parallel for schedule(static)
	for (std::ptrdiff_t b = 0; b < nb; ++b) {
		const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
		const std::size_t hi = std::min(n, lo + kBlock);
		double s = 0.0;
		for (std::size_t k = lo; k < hi; ++k)
			s += term(k);
		partial[static_cast<std::size_t>(b)] = s;
	}
	double s = 0.0;
	for (double p : partial)
		s += p;
	return s;
}

} // namespace

double abs_deviation_sum(std::span<const double> x, double ref) {
	return blocked_sum(x.size(), [&](std::size_t k) { return std::abs(x[k] - ref); });
}

Moments moments(std::span<const double> x) {
	Moments m;
	if (x.empty())
		return m;
	const double n = static_cast<double>(x.size());
	const double shift = x[0];
	const double mu = blocked_sum(x.size(), [&](std::size_t k) { return x[k] - shift; }) / n;
	m.mean = shift + mu;
	m.variance = blocked_sum(x.size(), [&](std::size_t k) { return (x[k] - shift - mu) * (x[k] - shift - mu); }) / n;
	return m;
}

void frequency_from_angles(std::span<const double> theta, std::span<const double> t, double f0,
                           std::span<double> out) {
	if (!out.empty())
		out[0] = f0;
	const auto n = static_cast<std::ptrdiff_t>(theta.size());
#pragma omp parallel for schedule(static)
	for (std::ptrdiff_t k = 1; k < n; ++k)
		out[k] = f0 + wrap_angle(theta[k] - theta[k - 1]) / (kTwoPi * (t[k] - t[k - 1]));
}

std::size_t rocof_ratios(const RocofIn& in, RatioOut out) {
	const auto n = static_cast<std::ptrdiff_t>(in.freq.size() > in.lag ? in.freq.size() - in.lag : 0);
	std::size_t kept = 0;
#pragma omp parallel for schedule(static) reduction(+ : kept)
	for (std::ptrdiff_t k = 0; k < n; ++k) {
		const std::size_t i = static_cast<std::size_t>(k);
		const std::size_t j = i + in.lag;
		const double dp = in.power[j] - in.power[i];
		const bool ok = in.valid[i] && in.valid[j] && std::abs(dp) >= in.threshold && dp != 0.0;
		out.keep[i] = ok ? 1 : 0;
		out.value[i] = ok ? std::abs(((in.freq[j] - in.freq[i]) / in.window) / dp) : 0.0;
		kept += ok ? 1 : 0;
	}
	return kept;
}

std::size_t padd_ratios(const PaddIn& in, RatioOut out) {
	const auto n = static_cast<std::ptrdiff_t>(in.theta1.size());
	std::size_t kept = 0;
#pragma omp parallel for schedule(static) reduction(+ : kept)
	for (std::ptrdiff_t k = 0; k < n; ++k) {
		const double p = in.power[k];
		const bool ok = std::abs(p) >= in.threshold && p != 0.0;
		const double spread = wrap_angle(wrap_angle(in.theta1[k] - in.theta2[k]) - in.baseline);
		out.keep[k] = ok ? 1 : 0;
		out.value[k] = ok ? std::abs(rad2deg(spread) / (p / 1e3)) : 0.0;
		kept += ok ? 1 : 0;
	}
	return kept;
}

} // namespace parallel
} // namespace feederlab::kernels
