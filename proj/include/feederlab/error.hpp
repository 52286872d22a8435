#pragma once

#include <stdexcept>
#include <string>

namespace feederlab {

/// Base class for every domain failure raised by the library. The CLI maps it
/// to exit status 1.
class Error : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

/// Rejected input: violated precondition, malformed file, bad config value.
class InputError : public Error {
public:
	using Error::Error;
};

/// Newton iteration on the feeder did not converge.
class SolverError : public Error {
public:
	SolverError(const std::string& what, double residual)
		: Error(what), mResidual(residual) {}

	double residual() const noexcept { return mResidual; }

private:
	double mResidual;
};

/// A metric had no sample left after power thresholding.
class NoActiveSamples : public Error {
public:
	NoActiveSamples() : Error("no active samples") {}
};

} // namespace feederlab
