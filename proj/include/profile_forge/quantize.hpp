#pragma once

// Nearest-center quantizers for the token vocabulary.
//
// Lengths: 127 centers -1 + k/63 over [-1, 1].
// Angles:  121 bins at k * 2pi/120; bin 120 decodes to 0.
// Points:  127 x 127 grid with per-axis centers -0.5 + k/126.
// Inflines: (angle bin, length bin of d).
// Area / smooth fraction: 127 centers k/126 over [0, 1].
// Counts (complexity, loops): bin = clamp(n, 1, 127) - 1.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "errors.hpp"
#include "geometry.hpp"

namespace pforge {

inline constexpr int kLengthBins = 127;
inline constexpr int kAngleBins = 121;
inline constexpr int kPointBins = 127;
inline constexpr int kUnitBins = 127;
inline constexpr int kCountBins = 127;

inline constexpr double kLengthStep = 1.0 / 63.0;
inline constexpr double kAngleStep = kTwoPi / 120.0;
inline constexpr double kPointStep = 1.0 / 126.0;
inline constexpr double kUnitStep = 1.0 / 126.0;

inline constexpr double kLengthLimit = 1.0 + 0.5 * kLengthStep;
inline constexpr double kPointLimit = 0.5 + 0.5 * kPointStep;

namespace detail {

inline int nearest_bin(double v, double lo, double step, int bins, double limit, const char* what)
{
    if (!std::isfinite(v) || std::abs(v - (lo + 0.5 * (bins - 1) * step)) > limit)
        throw OutOfRange(std::string(what) + " out of range: " + std::to_string(v));
    const int k = static_cast<int>(std::lround((v - lo) / step));
    return std::clamp(k, 0, bins - 1);
}

inline void check_bin(int k, int bins, const char* what)
{
    if (k < 0 || k >= bins) throw OutOfRange(std::string(what) + " bin out of range");
}

}  // namespace detail

inline int quantize_length(double v)
{
    return detail::nearest_bin(v, -1.0, kLengthStep, kLengthBins, kLengthLimit, "length");
}

inline double dequantize_length(int k)
{
    detail::check_bin(k, kLengthBins, "length");
    // Symmetric form keeps -1, 0 and 1 exact.
    return static_cast<double>(k - 63) / 63.0;
}

inline int quantize_angle(double a)
{
    if (!std::isfinite(a)) throw OutOfRange("angle not finite");
    const int k = static_cast<int>(std::lround(normalize_angle(a) / kAngleStep));
    return k >= 120 ? 0 : k;
}

inline double dequantize_angle(int k)
{
    detail::check_bin(k, kAngleBins, "angle");
    if (k == 120) return 0.0;
    // reduced fraction, so pi/3, pi/2, pi and 3pi/2 come out bit-exact
    const int g = std::gcd(k, 60);
    return kPi * static_cast<double>(k / g) / static_cast<double>(60 / g);
}

inline int quantize_axis(double v)
{
    return detail::nearest_bin(v, -0.5, kPointStep, kPointBins, kPointLimit, "point coordinate");
}

inline double dequantize_axis(int k)
{
    detail::check_bin(k, kPointBins, "point coordinate");
    return static_cast<double>(k - 63) / 126.0;
}

struct PointBin {
    int ix = 0;
    int iy = 0;
    friend bool operator==(const PointBin&, const PointBin&) = default;
};

inline PointBin quantize_point(Point2 p) { return {quantize_axis(p.x), quantize_axis(p.y)}; }
inline Point2 dequantize_point(PointBin b) { return {dequantize_axis(b.ix), dequantize_axis(b.iy)}; }

struct InflineBin {
    int angle = 0;
    int dist = 0;
    friend bool operator==(const InflineBin&, const InflineBin&) = default;
};

inline InflineBin quantize_infline(const DirectedLine& l)
{
    return {quantize_angle(l.phi), quantize_length(l.d)};
}

inline DirectedLine dequantize_infline(InflineBin b)
{
    return {dequantize_angle(b.angle), dequantize_length(b.dist)};
}

// Values in [0, 1]: area fraction and smooth-vertex fraction.
inline int quantize_unit(double v)
{
    if (!std::isfinite(v) || v < -0.5 * kUnitStep || v > 1.0 + 0.5 * kUnitStep)
        throw OutOfRange("unit value out of range: " + std::to_string(v));
    return std::clamp(static_cast<int>(std::lround(v * 126.0)), 0, kUnitBins - 1);
}

inline double dequantize_unit(int k)
{
    detail::check_bin(k, kUnitBins, "unit value");
    return static_cast<double>(k) / 126.0;
}

inline int quantize_count(int n) { return std::clamp(n, 1, kCountBins) - 1; }

inline int dequantize_count(int k)
{
    detail::check_bin(k, kCountBins, "count");
    return k + 1;
}

inline double snap_length(double v) { return dequantize_length(quantize_length(v)); }
inline double snap_angle(double a) { return dequantize_angle(quantize_angle(a)); }
inline Point2 snap_point(Point2 p) { return dequantize_point(quantize_point(p)); }
inline DirectedLine snap_infline(const DirectedLine& l) { return dequantize_infline(quantize_infline(l)); }
inline double snap_unit(double v) { return dequantize_unit(quantize_unit(v)); }
inline int snap_count(int n) { return dequantize_count(quantize_count(n)); }

}  // namespace pforge
