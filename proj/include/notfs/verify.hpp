#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "notfs/tfst.hpp"

// Machine-checkable invariant suites for the transform and the detector.
namespace notfs::verify {

struct PropertyCheck {
    std::string name;
    double max_error = 0.0;  // worst relative error seen
    double tolerance = 0.0;
    std::size_t cases = 0;
    bool passed = false;
};

/**
 * TFST identities on `signals` random frame-periodic signals for each of the
 * given (lambda, mu) pairs: quasi-periodicity, nu-periodicity, shift,
 * multiplication, convolution (both integral forms), time and Fourier
 * inversion, and basis completeness.
 */
std::vector<PropertyCheck> tfst_property_suite(
    std::size_t signals, std::uint64_t seed,
    const std::vector<std::pair<tfst::Rational, tfst::Rational>>& transform_params,
    double tolerance = 1e-8);

/**
 * Detector invariants: objective decomposition on `instances` random models up
 * to 8x8, schedule soundness for every frame size up to 8x8, and operation
 * counter conformance.
 */
std::vector<PropertyCheck> detect_property_suite(std::size_t instances, std::uint64_t seed);

/// Relative error ||a - b||_inf / max(||b||_inf, floor).
double relative_error(const std::vector<Complex>& a, const std::vector<Complex>& b,
                      double floor = 1e-300);

/// True when every cell's lower-right quadrant precedes it and the order is a permutation.
bool schedule_is_sound(std::size_t rows, std::size_t cols);

}  // namespace notfs::verify
