#pragma once

// Data-parallel inner loops of the PMU and metrics layers. Each kernel has a
// plain serial reference and an OpenMP version. The OpenMP reductions use a
// fixed block partition, so their results do not depend on the thread count.

#include <cstddef>
#include <cstdint>
#include <span>

namespace feederlab::kernels {

/// Reduction block length for the parallel kernels.
inline constexpr std::size_t kBlock = 4096;

struct Moments {
	double mean = 0.0;
	double variance = 0.0; // population
};

/// Output of a per-sample ratio kernel: value[k] is meaningful only where keep[k] != 0.
struct RatioOut {
	std::span<double> value;
	std::span<std::uint8_t> keep;
};

/// Inputs of the windowed rRoCoF kernel: sample k pairs with sample k + lag.
struct RocofIn {
	std::span<const double> freq;  // Hz
	std::span<const double> power; // W
	std::span<const std::uint8_t> valid;
	std::size_t lag = 1;
	double window = 0.06;  // s
	double threshold = 0.0; // W
};

/// Inputs of the rPADD kernel.
struct PaddIn {
	std::span<const double> theta1; // rad, PMU 1
	std::span<const double> theta2; // rad, PMU 2
	std::span<const double> power;  // W, denominator per sample
	double baseline = 0.0;          // rad
	double threshold = 0.0;         // W
};

#define FEEDERLAB_KERNEL_SET                                                                         \
	double abs_deviation_sum(std::span<const double> x, double ref);                                 \
	Moments moments(std::span<const double> x);                                                      \
	void frequency_from_angles(std::span<const double> theta, std::span<const double> t, double f0,  \
	                           std::span<double> out);                                               \
	std::size_t rocof_ratios(const RocofIn& in, RatioOut out);                                       \
	std::size_t padd_ratios(const PaddIn& in, RatioOut out);

namespace serial {
FEEDERLAB_KERNEL_SET
}

namespace parallel {
FEEDERLAB_KERNEL_SET
}

#undef FEEDERLAB_KERNEL_SET

/// Number of OpenMP threads the parallel kernels would use (1 without OpenMP).
int max_threads();
void set_threads(int n);

} // namespace feederlab::kernels
