#include "feederlab/foundation.hpp"

#include <string>

namespace feederlab {

double wrap_angle(double rad) {
	double w = std::remainder(rad, kTwoPi);
	// remainder() maps odd multiples of pi to -pi; the frame convention is (-pi, pi].
	if (w <= -kPi)
		w += kTwoPi;
	return w;
}

Phasor::Phasor(double mag, double ang) : magnitude(mag), angle(ang) {
	if (!(mag >= 0.0) || !std::isfinite(mag))
		throw InputError("phasor magnitude must be finite and non-negative");
	if (!std::isfinite(ang))
		throw InputError("phasor angle must be finite");
}

void PerUnitBase::validate() const {
	for (double v : {s_base, v_slack, v_pcc, v_pbc, f0})
		if (!(v > 0.0) || !std::isfinite(v))
			throw InputError("per-unit bases must be strictly positive");
}

std::vector<double> unwrap_angles(std::span<const double> raw) {
	if (raw.empty())
		throw InputError("unwrap_angles: empty input");
	std::vector<double> out(raw.size());
	// Integer turn count instead of accumulating wrapped steps; keeps
	// out[k] - raw[k] an exact multiple of 2*pi over long records.
	double turns = 0.0;
	for (std::size_t k = 0; k < raw.size(); ++k) {
		if (!std::isfinite(raw[k]))
			throw InputError("unwrap_angles: non-finite sample at index " + std::to_string(k));
		if (k > 0) {
			const double step = raw[k] - raw[k - 1];
			turns += std::round((wrap_angle(step) - step) / kTwoPi);
		}
		out[k] = raw[k] + kTwoPi * turns;
	}
	return out;
}

ScalarSeries diff(const ScalarSeries& series) {
	if (series.size() < 2)
		throw InputError("diff: need at least two samples");
	std::vector<double> d(series.size() - 1);
	for (std::size_t k = 0; k + 1 < series.size(); ++k)
		d[k] = series.values[k + 1] - series.values[k];
	return {series.t0, series.dt, std::move(d)};
}

} // namespace feederlab
