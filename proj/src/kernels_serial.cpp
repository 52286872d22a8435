#include <cmath>

#include "feederlab/foundation.hpp"
#include "feederlab/kernels.hpp"

namespace feederlab::kernels::serial {

double abs_deviation_sum(std::span<const double> x, double ref) {
	double s = 0.0;
	for (double v : x)
		s += std::abs(v - ref);
	return s;
}

Moments moments(std::span<const double> x) {
	Moments m;
	if (x.empty())
		return m;
	// Shifted by the first sample, so a constant input gives exactly zero.
	const double shift = x[0];
	double s = 0.0;
	for (double v : x)
		s += v - shift;
	const double mu = s / static_cast<double>(x.size());
	double q = 0.0;
	for (double v : x)
		q += (v - shift - mu) * (v - shift - mu);
	m.mean = shift + mu;
	m.variance = q / static_cast<double>(x.size());
	return m;
}

void frequency_from_angles(std::span<const double> theta, std::span<const double> t, double f0,
                           std::span<double> out) {
	if (!out.empty())
		out[0] = f0;
	for (std::size_t k = 1; k < theta.size(); ++k)
		out[k] = f0 + wrap_angle(theta[k] - theta[k - 1]) / (kTwoPi * (t[k] - t[k - 1]));
}

std::size_t rocof_ratios(const RocofIn& in, RatioOut out) {
	std::size_t kept = 0;
	const std::size_t n = in.freq.size() > in.lag ? in.freq.size() - in.lag : 0;
	for (std::size_t k = 0; k < n; ++k) {
		const std::size_t j = k + in.lag;
		const double dp = in.power[j] - in.power[k];
		const bool ok = in.valid[k] && in.valid[j] && std::abs(dp) >= in.threshold && dp != 0.0;
		out.keep[k] = ok ? 1 : 0;
		out.value[k] = ok ? std::abs(((in.freq[j] - in.freq[k]) / in.window) / dp) : 0.0;
		kept += ok ? 1 : 0;
	}
	return kept;
}

std::size_t padd_ratios(const PaddIn& in, RatioOut out) {
	std::size_t kept = 0;
	for (std::size_t k = 0; k < in.theta1.size(); ++k) {
		const double p = in.power[k];
		const bool ok = std::abs(p) >= in.threshold && p != 0.0;
		const double spread = wrap_angle(wrap_angle(in.theta1[k] - in.theta2[k]) - in.baseline);
		out.keep[k] = ok ? 1 : 0;
		out.value[k] = ok ? std::abs(rad2deg(spread) / (p / 1e3)) : 0.0;
		kept += ok ? 1 : 0;
	}
	return kept;
}

} // namespace feederlab::kernels::serial
